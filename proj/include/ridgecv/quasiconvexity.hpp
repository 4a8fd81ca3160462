#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ridgecv/loocv.hpp"

namespace ridgecv {

// One strict local minimum of the LOOCV loss over [0, inf].
// lambda is 0 for the left boundary and +inf for the tail.
struct LocalMinimum {
    double lambda;
    double loss;
    bool at_origin = false;
    bool at_tail = false;
};

struct QvxVerdict {
    bool is_quasiconvex = true;
    std::vector<LocalMinimum> minima;  // sorted by lambda
    std::string sign_pattern;          // compressed signs of L' over the grid
    bool includes_tail = false;        // lambda = inf acts as a candidate minimum
    double tail_limit = 0.0;           // ||Y||^2
    GridConfig grid;                   // grid actually used (after densification)
    int densifications = 0;
    // candidate minima suppressed by the strict-rise rule; razor-edge verdicts
    // show up here rather than flipping the flag silently
    int borderline_minima = 0;
};

// Classifies L as quasiconvex or not over [grid.lambda_min, inf].
//
// Every sign change of the analytic L' on the log grid is refined by
// bisection to 1e-10 relative lambda tolerance and labeled min/max via L''
// (value comparison when |L''| < 1e-12 * tail_limit). lambda = inf enters as
// a boundary candidate with value ||Y||^2, lambda = 0 likewise when
// L'(lambda_min) > 0. A strict local minimum must rise by more than
// 1e-9 * tail_limit on both sides before the next stationary point;
// shallower dips are merged. Quasiconvex means at most one strict minimum.
//
// GridTooCoarse triggers an automatic 4x densification, twice, then throws.
QvxVerdict classify(const SvdForm& svd, const Eigen::VectorXd& Y,
                    const GridConfig& grid);
QvxVerdict classify(const SvdForm& svd, const Eigen::VectorXd& Y);

struct MinimaCensus {
    int count = 0;
    double rel_gap = 0.0;  // worst minimum / best minimum - 1
    std::vector<LocalMinimum> minima;
};

MinimaCensus minima_census(const QvxVerdict& verdict);

std::string verdict_to_json(const QvxVerdict& verdict);

}  // namespace ridgecv
