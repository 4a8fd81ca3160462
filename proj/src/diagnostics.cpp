#include "ridgecv/diagnostics.hpp"

#include <cmath>

#include "ridgecv/errors.hpp"

#include <json.hpp>

namespace ridgecv {

namespace {

// Largest positive root of q2 x^2 + q1 x + q0 = 0, or NoPositiveRoot.
double positive_root(double q2, double q1, double q0) {
    if (q2 == 0.0) {
        if (q1 != 0.0 && -q0 / q1 > 0.0) return -q0 / q1;
        throw NoPositiveRoot("quadratic degenerates with no positive root");
    }
    const double disc = q1 * q1 - 4.0 * q2 * q0;
    if (disc < 0.0) throw NoPositiveRoot("negative discriminant");
    if (q0 == 0.0) {
        const double other = -q1 / q2;
        if (other > 0.0) return other;
        throw NoPositiveRoot("roots are 0 and a nonpositive value");
    }
    const double sq = std::sqrt(disc);
    // evaluate the stable root first, derive the other from the product
    const double r1 = (-q1 - (q1 >= 0 ? sq : -sq)) / (2.0 * q2);
    const double r2 = (q0 / q2) / r1;
    const double hi = std::max(r1, r2);
    if (!(hi > 0.0)) throw NoPositiveRoot("both roots nonpositive");
    return hi;
}

}  // namespace

AssumptionReport assumption_report(const SvdForm& svd, const Eigen::VectorXd& Y) {
    const LeastSquaresFit fit = least_squares(svd, Y);
    const Eigen::ArrayXd p = fit.projections.array();
    const Eigen::ArrayXd e = fit.residuals.array();
    const Eigen::ArrayXd nu = svd.nu.array();
    const double n = static_cast<double>(svd.n());

    AssumptionReport rep;
    rep.a1_value = e.square().sum() / n;
    rep.a2_value = fit.theta_hat.norm();
    rep.a3_numax = svd.nu_max();
    rep.a4_value = fit.theta_hat.squaredNorm() -
                   (nu * (p.square() + 2.0 * e.square())).sum();
    rep.cross_term = ((1.0 - nu) * e * p).sum();
    rep.delta0 = -((1.0 / (1.0 - nu).cube() - 1.0) * nu * e.square()).sum();
    rep.spectrum_flat = svd.spectrum_is_flat();

    if (rep.spectrum_flat) {
        const XiCoefficients xi = xi_coefficients(svd, Y);
        try {
            rep.lambda_q = lambda_q(xi);
            rep.lambda_q_status = "ok";
        } catch (const NoPositiveRoot&) {
            rep.lambda_q_status = "no-positive-root";
        }
        try {
            rep.lambda_q2 = lambda_q2(xi);
        } catch (const NoPositiveRoot&) {
        }
    }
    return rep;
}

double lambda_q(const XiCoefficients& xi) {
    if (xi.xi3_sum >= 0.0 && xi.xi2_sum >= 0.0 && xi.xi1_sum >= 0.0)
        throw NoPositiveRoot(
            "all quadratic coefficients nonnegative: L' >= 0, minimum at 0");
    return positive_root(xi.xi1_sum, xi.xi2_sum, xi.xi3_sum);
}

double lambda_q2(const XiCoefficients& xi) {
    return positive_root(xi.a_sum, xi.b_sum, xi.c_sum);
}

CurvatureCertificate second_deriv_certificate(const SvdForm& svd,
                                              const Eigen::VectorXd& Y,
                                              double lambda_max,
                                              int grid_points) {
    if (!svd.spectrum_is_flat())
        throw FlatSpectrumRequired("curvature certificate requires S = 1");

    if (std::isnan(lambda_max)) {
        const XiCoefficients xi = xi_coefficients(svd, Y);
        try {
            lambda_max = lambda_q(xi) + 1.0;
        } catch (const NoPositiveRoot&) {
            lambda_max = 1.0;  // L' >= 0 regime: check a unit window
        }
    }

    const LoocvEvaluator eval(svd, Y);
    CurvatureCertificate cert;
    cert.lambda_max = lambda_max;
    cert.grid_points = grid_points;
    cert.margin = std::numeric_limits<double>::infinity();
    std::vector<double> lams(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i)
        lams[static_cast<std::size_t>(i)] =
            lambda_max * static_cast<double>(i) / (grid_points - 1);
    std::vector<double> loss, grad, hess;
    eval.curve_grid(lams, loss, grad, hess);
    for (int i = 0; i < grid_points; ++i) {
        if (hess[static_cast<std::size_t>(i)] < cert.margin) {
            cert.margin = hess[static_cast<std::size_t>(i)];
            cert.arg_min = lams[static_cast<std::size_t>(i)];
        }
    }
    cert.positive = cert.margin > 0.0;
    return cert;
}

double fit_loglog_slope(const std::vector<double>& n,
                        const std::vector<double>& v) {
    if (n.size() != v.size() || n.size() < 2)
        throw Error("slope fit needs matched samples, at least two");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(n[i]);
        const double y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::string report_to_json(const AssumptionReport& rep) {
    nlohmann::json j;
    j["a1_mean_sq_residual"] = rep.a1_value;
    j["a2_theta_norm"] = rep.a2_value;
    j["a3_nu_max"] = rep.a3_numax;
    j["a4_value"] = rep.a4_value;
    j["cross_term"] = rep.cross_term;
    j["delta0"] = rep.delta0;
    j["spectrum_flat"] = rep.spectrum_flat;
    if (std::isnan(rep.lambda_q))
        j["lambda_q"] = nullptr;
    else
        j["lambda_q"] = rep.lambda_q;
    if (std::isnan(rep.lambda_q2))
        j["lambda_q2"] = nullptr;
    else
        j["lambda_q2"] = rep.lambda_q2;
    j["lambda_q_status"] = rep.lambda_q_status;
    j["note"] =
        "asymptotic assumptions cannot be passed by one instance; "
        "fit decay slopes over a family of N";
    return j.dump(2);
}

}  // namespace ridgecv
