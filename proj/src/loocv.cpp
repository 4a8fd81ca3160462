#include "ridgecv/loocv.hpp"

#include <cmath>

#include "ridgecv/errors.hpp"

namespace ridgecv {

namespace {
constexpr double kLeverageEps = 1e-12;
}

GridConfig GridConfig::for_problem(const SvdForm& svd, int points) {
    const double s2bar = svd.mean_sq_singular();
    return GridConfig{1e-6 * s2bar, 1e6 * s2bar, points};
}

std::vector<double> GridConfig::log_grid() const {
    std::vector<double> out(static_cast<std::size_t>(points));
    if (points == 1) {
        out[0] = lambda_min;
        return out;
    }
    const double l0 = std::log(lambda_min);
    const double l1 = std::log(lambda_max);
    for (int i = 0; i < points; ++i)
        out[static_cast<std::size_t>(i)] =
            std::exp(l0 + (l1 - l0) * i / static_cast<double>(points - 1));
    out.front() = lambda_min;
    out.back() = lambda_max;
    return out;
}

LoocvEvaluator::LoocvEvaluator(const SvdForm& svd, const Eigen::VectorXd& Y)
    : svd_(svd),
      Y_(Y),
      U2_(svd.U.cwiseProduct(svd.U)),
      z_(svd.U.transpose() * Y),
      tail_limit_(Y.squaredNorm()) {}

// Everything at one lambda, assembled from the spectral weights
// w_d = s_d^2/(s_d^2 + lambda) and their lambda-derivatives.
struct LoocvEvaluator::Terms {
    Eigen::ArrayXd r;    // x_n^T theta_lambda - y_n
    Eigen::ArrayXd m;    // 1 - Q_n
    Eigen::ArrayXd pp;   // d/dl predictions
    Eigen::ArrayXd qp;   // d/dl Q
    Eigen::ArrayXd ppp;  // d2/dl2 predictions
    Eigen::ArrayXd qpp;  // d2/dl2 Q
};

LoocvEvaluator::Terms LoocvEvaluator::terms(double lambda, int order) const {
    const Eigen::ArrayXd s2 = svd_.S.array().square();
    const Eigen::ArrayXd denom = s2 + lambda;
    const Eigen::ArrayXd w = s2 / denom;

    Terms t;
    t.m = 1.0 - (U2_ * w.matrix()).array();
    t.r = (svd_.U * (w * z_.array()).matrix()).array() - Y_.array();

    Eigen::Index worst;
    if (t.m.minCoeff(&worst) <= kLeverageEps)
        throw LeverageOne(static_cast<int>(worst), lambda);

    if (order >= 1) {
        const Eigen::ArrayXd wp = -w / denom;
        t.qp = (U2_ * wp.matrix()).array();
        t.pp = (svd_.U * (wp * z_.array()).matrix()).array();
    }
    if (order >= 2) {
        const Eigen::ArrayXd wpp = 2.0 * w / denom.square();
        t.qpp = (U2_ * wpp.matrix()).array();
        t.ppp = (svd_.U * (wpp * z_.array()).matrix()).array();
    }
    return t;
}

double LoocvEvaluator::loss(double lambda) const {
    const Terms t = terms(lambda, 0);
    return (t.r.square() / t.m.square()).sum();
}

double LoocvEvaluator::grad(double lambda) const {
    const Terms t = terms(lambda, 1);
    return 2.0 * (t.r * t.pp / t.m.square() + t.r.square() * t.qp / t.m.cube()).sum();
}

double LoocvEvaluator::hess(double lambda) const {
    const Terms t = terms(lambda, 2);
    return 2.0 * ((t.pp.square() + t.r * t.ppp) / t.m.square() +
                  (4.0 * t.r * t.pp * t.qp + t.r.square() * t.qpp) / t.m.cube() +
                  3.0 * t.r.square() * t.qp.square() / t.m.pow(4)).sum();
}

LossDerivatives LoocvEvaluator::all(double lambda) const {
    const Terms t = terms(lambda, 2);
    LossDerivatives d;
    d.loss = (t.r.square() / t.m.square()).sum();
    d.grad = 2.0 * (t.r * t.pp / t.m.square() + t.r.square() * t.qp / t.m.cube()).sum();
    d.hess = 2.0 * ((t.pp.square() + t.r * t.ppp) / t.m.square() +
                    (4.0 * t.r * t.pp * t.qp + t.r.square() * t.qpp) / t.m.cube() +
                    3.0 * t.r.square() * t.qp.square() / t.m.pow(4)).sum();
    return d;
}

std::vector<double> LoocvEvaluator::grad_grid(
    const std::vector<double>& lambdas) const {
    const Eigen::Index G = static_cast<Eigen::Index>(lambdas.size());
    const Eigen::Index N = svd_.n();
    const Eigen::Index D = svd_.d();

    Eigen::MatrixXd w(D, G), wp(D, G);
    for (Eigen::Index g = 0; g < G; ++g)
        for (Eigen::Index d = 0; d < D; ++d) {
            const double s2 = svd_.S(d) * svd_.S(d);
            const double denom = s2 + lambdas[static_cast<std::size_t>(g)];
            w(d, g) = s2 / denom;
            wp(d, g) = -w(d, g) / denom;
        }
    const Eigen::MatrixXd q = U2_ * w;
    const Eigen::MatrixXd qp = U2_ * wp;
    const Eigen::MatrixXd p =
        svd_.U * (w.array().colwise() * z_.array()).matrix();
    const Eigen::MatrixXd pp =
        svd_.U * (wp.array().colwise() * z_.array()).matrix();

    std::vector<double> out(static_cast<std::size_t>(G));
    for (Eigen::Index g = 0; g < G; ++g) {
        double acc = 0.0;
        for (Eigen::Index n = 0; n < N; ++n) {
            const double r = p(n, g) - Y_(n);
            const double m = 1.0 - q(n, g);
            if (m <= kLeverageEps)
                throw LeverageOne(static_cast<int>(n),
                                  lambdas[static_cast<std::size_t>(g)]);
            const double m2 = m * m;
            acc += r * pp(n, g) / m2 + r * r * qp(n, g) / (m2 * m);
        }
        out[static_cast<std::size_t>(g)] = 2.0 * acc;
    }
    return out;
}

void LoocvEvaluator::curve_grid(const std::vector<double>& lambdas,
                                std::vector<double>& loss,
                                std::vector<double>& grad,
                                std::vector<double>& hess) const {
    const Eigen::Index G = static_cast<Eigen::Index>(lambdas.size());
    const Eigen::Index N = svd_.n();
    const Eigen::Index D = svd_.d();

    Eigen::MatrixXd w(D, G), wp(D, G), wpp(D, G);
    for (Eigen::Index g = 0; g < G; ++g)
        for (Eigen::Index d = 0; d < D; ++d) {
            const double s2 = svd_.S(d) * svd_.S(d);
            const double denom = s2 + lambdas[static_cast<std::size_t>(g)];
            w(d, g) = s2 / denom;
            wp(d, g) = -w(d, g) / denom;
            wpp(d, g) = -2.0 * wp(d, g) / denom;
        }
    const Eigen::MatrixXd q = U2_ * w;
    const Eigen::MatrixXd qp = U2_ * wp;
    const Eigen::MatrixXd qpp = U2_ * wpp;
    const Eigen::MatrixXd p =
        svd_.U * (w.array().colwise() * z_.array()).matrix();
    const Eigen::MatrixXd pp =
        svd_.U * (wp.array().colwise() * z_.array()).matrix();
    const Eigen::MatrixXd ppp =
        svd_.U * (wpp.array().colwise() * z_.array()).matrix();

    loss.assign(static_cast<std::size_t>(G), 0.0);
    grad.assign(static_cast<std::size_t>(G), 0.0);
    hess.assign(static_cast<std::size_t>(G), 0.0);
    for (Eigen::Index g = 0; g < G; ++g) {
        double l = 0.0, dg = 0.0, h = 0.0;
        for (Eigen::Index n = 0; n < N; ++n) {
            const double r = p(n, g) - Y_(n);
            const double m = 1.0 - q(n, g);
            if (m <= kLeverageEps)
                throw LeverageOne(static_cast<int>(n),
                                  lambdas[static_cast<std::size_t>(g)]);
            const double m2 = m * m;
            const double m3 = m2 * m;
            l += r * r / m2;
            dg += r * pp(n, g) / m2 + r * r * qp(n, g) / m3;
            h += (pp(n, g) * pp(n, g) + r * ppp(n, g)) / m2 +
                 (4.0 * r * pp(n, g) * qp(n, g) + r * r * qpp(n, g)) / m3 +
                 3.0 * r * r * qp(n, g) * qp(n, g) / (m2 * m2);
        }
        loss[static_cast<std::size_t>(g)] = l;
        grad[static_cast<std::size_t>(g)] = 2.0 * dg;
        hess[static_cast<std::size_t>(g)] = 2.0 * h;
    }
}

Eigen::VectorXd hat_values(const SvdForm& svd, double lambda) {
    const Eigen::ArrayXd s2 = svd.S.array().square();
    const Eigen::ArrayXd w = s2 / (s2 + lambda);
    return svd.U.cwiseProduct(svd.U) * w.matrix();
}

Eigen::VectorXd ridge_predictions(const SvdForm& svd, const Eigen::VectorXd& Y,
                                  double lambda) {
    const Eigen::ArrayXd s2 = svd.S.array().square();
    const Eigen::ArrayXd w = s2 / (s2 + lambda);
    return svd.U * (w * (svd.U.transpose() * Y).array()).matrix();
}

double loocv_loss(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda) {
    return LoocvEvaluator(svd, Y).loss(lambda);
}

double loocv_grad(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda) {
    return LoocvEvaluator(svd, Y).grad(lambda);
}

double loocv_hess(const SvdForm& svd, const Eigen::VectorXd& Y, double lambda) {
    return LoocvEvaluator(svd, Y).hess(lambda);
}

double brute_force_loocv(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                         double lambda) {
    const Eigen::Index N = X.rows();
    const Eigen::Index D = X.cols();
    double total = 0.0;
    Eigen::MatrixXd Xm(N - 1, D);
    Eigen::VectorXd Ym(N - 1);
    for (Eigen::Index n = 0; n < N; ++n) {
        Xm.topRows(n) = X.topRows(n);
        Xm.bottomRows(N - 1 - n) = X.bottomRows(N - 1 - n);
        Ym.head(n) = Y.head(n);
        Ym.tail(N - 1 - n) = Y.tail(N - 1 - n);

        if (lambda == 0.0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xm);
            const auto& s = svd.singularValues();
            if (s(s.size() - 1) <= 1e-12 * s(0))
                throw RankDeficient("leave-one-out subproblem " +
                                    std::to_string(n) + " is singular at lambda=0");
        }
        const Eigen::MatrixXd gram =
            Xm.transpose() * Xm +
            lambda * Eigen::MatrixXd::Identity(D, D);
        const Eigen::VectorXd theta = gram.ldlt().solve(Xm.transpose() * Ym);
        const double err = X.row(n).dot(theta) - Y(n);
        total += err * err;
    }
    return total;
}

double brute_force_loocv(const StandardizedDataset& ds, double lambda) {
    return brute_force_loocv(ds.X, ds.Y, lambda);
}

double XiCoefficients::grad_from_xi(double lambda) const {
    const Eigen::ArrayXd w = (1.0 + lambda) / (1.0 + lambda - nu.array());
    const Eigen::ArrayXd quad =
        xi1.array() * lambda * lambda + xi2.array() * lambda + xi3.array();
    return 2.0 / std::pow(1.0 + lambda, 4) * (w.cube() * quad).sum();
}

double XiCoefficients::hess_from_abc(double lambda) const {
    const Eigen::ArrayXd w = (1.0 + lambda) / (1.0 + lambda - nu.array());
    const Eigen::ArrayXd quad =
        a.array() * lambda * lambda + b.array() * lambda + c.array();
    return 2.0 / std::pow(1.0 + lambda, 5) * (w.pow(4) * quad).sum();
}

XiCoefficients xi_coefficients(const SvdForm& svd, const Eigen::VectorXd& Y) {
    if (!svd.spectrum_is_flat())
        throw FlatSpectrumRequired(
            "xi coefficients are defined for a flat spectrum (all s_d = 1)");

    const LeastSquaresFit fit = least_squares(svd, Y);
    const Eigen::ArrayXd p = fit.projections.array();
    const Eigen::ArrayXd e = fit.residuals.array();
    const Eigen::ArrayXd nu = svd.nu.array();

    XiCoefficients xi;
    xi.nu = svd.nu;
    xi.xi1 = (1.0 - nu) * p.square() - nu * e.square() + (1.0 - 2.0 * nu) * e * p;
    xi.xi2 = (1.0 - nu) * p.square() - 2.0 * nu * e.square() + (2.0 - 3.0 * nu) * e * p;
    xi.xi3 = -nu * e.square() + (1.0 - nu) * e * p;
    xi.a = -2.0 * xi.xi1.array();
    xi.b = (2.0 - nu) * xi.xi1.array() - 3.0 * xi.xi2.array();
    xi.c = -nu * xi.xi1.array() + xi.xi2.array() - 4.0 * xi.xi3.array();
    xi.xi1_sum = xi.xi1.sum();
    xi.xi2_sum = xi.xi2.sum();
    xi.xi3_sum = xi.xi3.sum();
    xi.a_sum = xi.a.sum();
    xi.b_sum = xi.b.sum();
    xi.c_sum = xi.c.sum();
    return xi;
}

LoocvCurve compute_curve(const SvdForm& svd, const Eigen::VectorXd& Y,
                         const GridConfig& grid) {
    const LoocvEvaluator eval(svd, Y);
    LoocvCurve curve;
    curve.grid = grid;
    curve.lambdas = grid.log_grid();
    curve.tail_limit = eval.tail_limit();
    curve.hash = problem_hash(svd, Y);
    eval.curve_grid(curve.lambdas, curve.loss, curve.grad, curve.hess);
    return curve;
}

}  // namespace ridgecv
