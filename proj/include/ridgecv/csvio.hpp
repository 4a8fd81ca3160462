#pragma once

#include <iosfwd>
#include <string>

#include "ridgecv/dataset.hpp"
#include "ridgecv/loocv.hpp"

namespace ridgecv {

// Shortest text form that parses back to the identical double.
std::string format_double(double x);

// Loads a dataset from CSV. Header row required; `target` selects the
// response column by name. Non-numeric columns are one-hot encoded with
// levels sorted lexicographically and the first level dropped; encoded
// columns keep the input column order, so the feature layout is a pure
// function of the file. Rows with missing values ("", "NA", "?") are dropped.
// Throws CsvFormatError with row/column context.
RawDataset load_dataset_csv(const std::string& path, const std::string& target);
RawDataset parse_dataset_csv(std::istream& in, const std::string& target);

// Curve CSV: comment header lines carrying tail_limit, the problem hash and
// the grid, then lambda,loss,grad,hess rows. Doubles round-trip bitwise.
void write_curve_csv(const LoocvCurve& curve, std::ostream& out);
LoocvCurve read_curve_csv(std::istream& in);

}  // namespace ridgecv
