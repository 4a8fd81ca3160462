#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "ridgecv/loocv.hpp"

namespace ridgecv {

// Numerical values of the regularity conditions behind the flat-spectrum
// quasiconvexity guarantee, so they can be audited on a concrete problem
// instance. Asymptotic conditions (O(1), o(1)) become finite-sample numbers
// here; a single instance never "passes" an asymptotic condition, and decay
// slopes require a family of instances (see fit_loglog_slope).
struct AssumptionReport {
    double a1_value = 0.0;     // (1/N) sum of squared residuals
    double a2_value = 0.0;     // ||theta_hat||
    double a3_numax = 0.0;     // nu_max
    double a4_value = 0.0;     // ||theta_hat||^2 - sum nu ((u^T th)^2 + 2 e^2)
    double cross_term = 0.0;   // sum (1 - nu) e u^T th
    double delta0 = 0.0;       // -sum (1/(1-nu)^3 - 1) nu e^2, always <= 0
    bool spectrum_flat = false;
    // positive roots of the summed L' and L'' quadratics (flat spectrum only);
    // NaN when absent, with the reason in lambda_q_status
    double lambda_q = std::numeric_limits<double>::quiet_NaN();
    double lambda_q2 = std::numeric_limits<double>::quiet_NaN();
    std::string lambda_q_status = "not-flat";
};

AssumptionReport assumption_report(const SvdForm& svd, const Eigen::VectorXd& Y);

// Positive root of xi1_sum l^2 + xi2_sum l + xi3_sum = 0. All roots of L' lie
// left of this point (up to the deviation terms). Throws NoPositiveRoot when
// no positive root exists, which signals a minimum at lambda = 0.
double lambda_q(const XiCoefficients& xi);

// Positive root of a_sum l^2 + b_sum l + c_sum = 0, the point beyond which
// the quadratic part of L'' goes negative.
double lambda_q2(const XiCoefficients& xi);

struct CurvatureCertificate {
    bool positive = false;   // min L'' > 0 over [0, lambda_max]
    double margin = 0.0;     // the minimum itself
    double arg_min = 0.0;
    double lambda_max = 0.0;
    int grid_points = 0;
};

// Evaluates L'' on a dense grid over [0, lambda_max] and reports whether it
// stays positive. Default range is lambda_q + 1 (and [0, 1] when the xi
// quadratic has no positive root). Flat spectrum required.
CurvatureCertificate second_deriv_certificate(
    const SvdForm& svd, const Eigen::VectorXd& Y,
    double lambda_max = std::numeric_limits<double>::quiet_NaN(),
    int grid_points = 2000);

// OLS slope of log(v) against log(n); the decay-rate fit used for coherence
// families.
double fit_loglog_slope(const std::vector<double>& n,
                        const std::vector<double>& v);

std::string report_to_json(const AssumptionReport& report);

}  // namespace ridgecv
