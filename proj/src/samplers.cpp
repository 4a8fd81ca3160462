#include "ridgecv/samplers.hpp"

#include <cmath>
#include <string>

#include "ridgecv/errors.hpp"

namespace ridgecv {

namespace {

constexpr int kMaxRedraws = 64;

Eigen::MatrixXd gaussian_matrix(int N, int D, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(N, D);
    for (int j = 0; j < D; ++j)
        for (int i = 0; i < N; ++i) a(i, j) = normal(gen);
    return a;
}

// Modified Gram-Schmidt with a second orthogonalization pass. `fixed` holds
// already-orthonormal columns every output must be orthogonal to.
Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& fixed, int N, int D,
                             std::mt19937_64& gen) {
    Eigen::MatrixXd U(N, D);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < D; ++j) {
        Eigen::VectorXd w(N);
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxRedraws && !accepted; ++attempt) {
            for (int i = 0; i < N; ++i) w(i) = normal(gen);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < fixed.cols(); ++k)
                    w -= fixed.col(k).dot(w) * fixed.col(k);
                for (int k = 0; k < j; ++k) w -= U.col(k).dot(w) * U.col(k);
            }
            const double norm = w.norm();
            // fresh N(0,1) draws keep ||w|| ~ sqrt(N - j); anything tiny means
            // a near-linear dependence
            if (norm > 1e-6 * std::sqrt(static_cast<double>(N))) {
                U.col(j) = w / norm;
                accepted = true;
            }
        }
        if (!accepted)
            throw DegenerateDraw("Gram-Schmidt failed to find an independent "
                                 "direction for column " + std::to_string(j));
    }
    return U;
}

}  // namespace

void LinearModelSpec::validate() const {
    if (std::abs(theta_star.norm() - 1.0) > 1e-12)
        throw Error("theta_star must be unit norm");
    if (sigma2 < 0.0) throw Error("sigma2 must be nonnegative");
}

Eigen::MatrixXd sample_zero_mean_orthonormal(int N, int D, RngStream rng) {
    if (D >= N - 1)
        throw Error("zero-mean orthonormal sampling requires D < N - 1");
    auto gen = rng.engine();
    Eigen::MatrixXd ones(N, 1);
    ones.setConstant(1.0 / std::sqrt(static_cast<double>(N)));
    return gram_schmidt(ones, N, D, gen);
}

Eigen::MatrixXd sample_orthonormal(int N, int D, RngStream rng) {
    if (D >= N) throw Error("orthonormal sampling requires D < N");
    auto gen = rng.engine();
    return gram_schmidt(Eigen::MatrixXd(N, 0), N, D, gen);
}

Eigen::VectorXd sample_null_residual(const Eigen::MatrixXd& U, RngStream rng,
                                     bool project_out_ones) {
    const auto N = U.rows();
    auto gen = rng.engine();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Eigen::VectorXd a(N);
        for (Eigen::Index i = 0; i < N; ++i) a(i) = normal(gen);
        Eigen::VectorXd b = a - U * (U.transpose() * a);
        if (project_out_ones) b.array() -= b.mean();
        // second pass tightens orthogonality
        b -= U * (U.transpose() * b);
        if (project_out_ones) b.array() -= b.mean();
        const double norm = b.norm();
        if (norm > 1e-8) return b / norm;
    }
    throw DegenerateDraw("null-space residual projection kept collapsing");
}

Eigen::MatrixXd degenerate_U(int N, int N0, int D, RngStream rng) {
    if (!(D < N0 - 1 && N0 <= N))
        throw Error("degenerate_U requires D < N0 - 1 <= N - 1");
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, D);
    U.topRows(N0) = sample_zero_mean_orthonormal(N0, D, rng);
    return U;
}

Eigen::VectorXd spectrum_family(double alpha, int D) {
    if (alpha < 0.0) throw Error("spectrum_family requires alpha >= 0");
    Eigen::VectorXd s(D);
    for (int d = 1; d <= D; ++d)
        s(d - 1) = std::exp(alpha * static_cast<double>(d - D));
    return s;
}

Eigen::VectorXd generate_responses(const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& S,
                                   const LinearModelSpec& spec, RngStream rng,
                                   bool recenter) {
    spec.validate();
    auto gen = rng.engine();
    std::normal_distribution<double> normal(0.0, std::sqrt(spec.sigma2));
    Eigen::VectorXd e(U.rows());
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(gen);
    if (recenter) e.array() -= e.mean();
    return U * (S.asDiagonal() * spec.theta_star) + e;
}

const char* to_string(SubgaussianFamily family) {
    switch (family) {
        case SubgaussianFamily::gaussian: return "gaussian";
        case SubgaussianFamily::rademacher: return "rademacher";
        case SubgaussianFamily::uniform: return "uniform";
    }
    return "?";
}

SubgaussianFamily subgaussian_family_from_string(const std::string& name) {
    if (name == "gaussian") return SubgaussianFamily::gaussian;
    if (name == "rademacher") return SubgaussianFamily::rademacher;
    if (name == "uniform") return SubgaussianFamily::uniform;
    throw Error("unknown sub-Gaussian family: " + name);
}

Eigen::MatrixXd sample_subgaussian_X(int N, int D, SubgaussianFamily family,
                                     RngStream rng) {
    auto gen = rng.engine();
    Eigen::MatrixXd x(N, D);
    switch (family) {
        case SubgaussianFamily::gaussian:
            return gaussian_matrix(N, D, gen);
        case SubgaussianFamily::rademacher: {
            std::bernoulli_distribution coin(0.5);
            for (int j = 0; j < D; ++j)
                for (int i = 0; i < N; ++i) x(i, j) = coin(gen) ? 1.0 : -1.0;
            return x;
        }
        case SubgaussianFamily::uniform: {
            // [-sqrt(3), sqrt(3)] has unit variance
            std::uniform_real_distribution<double> unif(-std::sqrt(3.0),
                                                        std::sqrt(3.0));
            for (int j = 0; j < D; ++j)
                for (int i = 0; i < N; ++i) x(i, j) = unif(gen);
            return x;
        }
    }
    throw Error("unreachable");
}

Eigen::VectorXd random_unit_vector(int D, RngStream rng) {
    auto gen = rng.engine();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Eigen::VectorXd v(D);
        for (int i = 0; i < D; ++i) v(i) = normal(gen);
        const double norm = v.norm();
        if (norm > 1e-8) return v / norm;
    }
    throw DegenerateDraw("unit vector draw kept collapsing");
}

}  // namespace ridgecv
