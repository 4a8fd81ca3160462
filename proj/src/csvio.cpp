#include "ridgecv/csvio.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "ridgecv/errors.hpp"

namespace ridgecv {

std::string format_double(double x) {
    char buf[64];
    // shortest representation that survives a parse round trip
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line,
                                        char delim = ',') {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

// Comma by default; semicolon when the header has semicolons and no commas
// (the layout several public datasets ship with).
char sniff_delimiter(const std::string& header) {
    if (header.find(',') == std::string::npos &&
        header.find(';') != std::string::npos)
        return ';';
    return ',';
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "?";
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

RawDataset parse_dataset_csv(std::istream& in, const std::string& target) {
    std::string line;
    if (!std::getline(in, line))
        throw CsvFormatError("empty input, header row required", 1, 1);
    const char delim = sniff_delimiter(line);
    const std::vector<std::string> header = split_csv_line(line, delim);

    long target_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (trimmed(header[j]) == target) target_idx = static_cast<long>(j);
    if (target_idx < 0)
        throw CsvFormatError("target column '" + target + "' not in header", 1, 1);

    std::vector<std::vector<std::string>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line, delim);
        if (fields.size() != header.size())
            throw CsvFormatError("expected " + std::to_string(header.size()) +
                                     " fields, found " +
                                     std::to_string(fields.size()),
                                 lineno, 1);
        for (auto& f : fields) f = trimmed(f);
        if (std::any_of(fields.begin(), fields.end(),
                        [](const std::string& f) { return is_missing(f); }))
            continue;  // rows with missing values are dropped
        rows.push_back(std::move(fields));
    }
    if (rows.size() < 3)
        throw CsvFormatError("need at least three complete data rows", lineno, 1);

    const std::size_t n_cols = header.size();
    std::vector<bool> numeric(n_cols, true);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < n_cols; ++j) {
            double v;
            if (!parse_number(row[j], v)) numeric[j] = false;
        }
    if (!numeric[static_cast<std::size_t>(target_idx)]) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double v;
            if (!parse_number(rows[i][static_cast<std::size_t>(target_idx)], v))
                throw CsvFormatError("target value '" +
                                         rows[i][static_cast<std::size_t>(target_idx)] +
                                         "' is not numeric",
                                     static_cast<long>(i) + 2, target_idx + 1);
        }
    }

    // columns in input order; categorical ones expand to sorted levels with
    // the first level dropped
    struct OutCol {
        std::size_t src;
        bool indicator;
        std::string level;
        std::string name;
    };
    std::vector<OutCol> out_cols;
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (static_cast<long>(j) == target_idx) continue;
        const std::string col_name = trimmed(header[j]);
        if (numeric[j]) {
            out_cols.push_back({j, false, "", col_name});
        } else {
            std::set<std::string> levels;
            for (const auto& row : rows) levels.insert(row[j]);
            if (levels.size() < 2)
                throw ConstantColumn(static_cast<int>(j), col_name);
            bool first = true;
            for (const auto& level : levels) {
                if (first) {  // reference level
                    first = false;
                    continue;
                }
                out_cols.push_back({j, true, level, col_name + "=" + level});
            }
        }
    }

    RawDataset ds;
    ds.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(out_cols.size()));
    ds.Y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double y = 0.0;
        parse_number(rows[i][static_cast<std::size_t>(target_idx)], y);
        ds.Y(static_cast<Eigen::Index>(i)) = y;
        for (std::size_t k = 0; k < out_cols.size(); ++k) {
            const OutCol& col = out_cols[k];
            double v;
            if (col.indicator) {
                v = rows[i][col.src] == col.level ? 1.0 : 0.0;
            } else if (!parse_number(rows[i][col.src], v)) {
                throw CsvFormatError("value '" + rows[i][col.src] +
                                         "' is not numeric",
                                     static_cast<long>(i) + 2,
                                     static_cast<long>(col.src) + 1);
            }
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
        }
    }
    for (const OutCol& col : out_cols) ds.feature_names.push_back(col.name);
    ds.validate();
    return ds;
}

RawDataset load_dataset_csv(const std::string& path, const std::string& target) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_dataset_csv(in, target);
}

void write_curve_csv(const LoocvCurve& curve, std::ostream& out) {
    out << "# tail_limit=" << format_double(curve.tail_limit) << "\n";
    out << "# problem_hash=" << std::hex << curve.hash << std::dec << "\n";
    out << "# grid_min=" << format_double(curve.grid.lambda_min)
        << " grid_max=" << format_double(curve.grid.lambda_max)
        << " points=" << curve.grid.points << "\n";
    out << "lambda,loss,grad,hess\n";
    for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
        out << format_double(curve.lambdas[i]) << ','
            << format_double(curve.loss[i]) << ','
            << format_double(curve.grad[i]) << ','
            << format_double(curve.hess[i]) << '\n';
}

LoocvCurve read_curve_csv(std::istream& in) {
    LoocvCurve curve;
    std::string line;
    long lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "tail_limit") curve.tail_limit = std::strtod(val.c_str(), nullptr);
                if (key == "problem_hash") curve.hash = std::strtoull(val.c_str(), nullptr, 16);
                if (key == "grid_min") curve.grid.lambda_min = std::strtod(val.c_str(), nullptr);
                if (key == "grid_max") curve.grid.lambda_max = std::strtod(val.c_str(), nullptr);
                if (key == "points") curve.grid.points = static_cast<int>(std::strtol(val.c_str(), nullptr, 10));
            }
            continue;
        }
        if (!header_seen) {
            if (line != "lambda,loss,grad,hess")
                throw CsvFormatError("unexpected curve header '" + line + "'",
                                     lineno, 1);
            header_seen = true;
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 4)
            throw CsvFormatError("curve rows need 4 fields", lineno, 1);
        double v[4];
        for (int k = 0; k < 4; ++k)
            if (!parse_number(fields[static_cast<std::size_t>(k)], v[k]))
                throw CsvFormatError("bad number '" + fields[static_cast<std::size_t>(k)] + "'",
                                     lineno, k + 1);
        curve.lambdas.push_back(v[0]);
        curve.loss.push_back(v[1]);
        curve.grad.push_back(v[2]);
        curve.hess.push_back(v[3]);
    }
    return curve;
}

}  // namespace ridgecv
