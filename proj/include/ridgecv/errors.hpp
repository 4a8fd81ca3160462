#pragma once

#include <stdexcept>
#include <string>

namespace ridgecv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A covariate column has zero variance and cannot be scaled to unit variance.
struct ConstantColumn : Error {
    explicit ConstantColumn(int column_index, const std::string& name = "")
        : Error("constant column " + std::to_string(column_index) +
                (name.empty() ? "" : " (" + name + ")")),
          column(column_index) {}
    int column;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct ZeroResponse : Error {
    using Error::Error;
};

struct BadRank : Error {
    using Error::Error;
};

// 1 - Q_n(lambda) fell below threshold: point n is interpolated and the
// leave-one-out shortcut is undefined there.
struct LeverageOne : Error {
    explicit LeverageOne(int point_index, double lambda)
        : Error("leverage of point " + std::to_string(point_index) +
                " is 1 at lambda=" + std::to_string(lambda)),
          index(point_index) {}
    int index;
};

struct FlatSpectrumRequired : Error {
    using Error::Error;
};

struct NoPositiveRoot : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct DegenerateDraw : Error {
    using Error::Error;
};

struct CsvFormatError : Error {
    CsvFormatError(const std::string& what, long row, long column)
        : Error(what + " at row " + std::to_string(row) + ", column " +
                std::to_string(column)),
          row(row), column(column) {}
    long row;
    long column;
};

}  // namespace ridgecv
