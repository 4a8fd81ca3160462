#pragma once

#include <Eigen/Dense>

#include "ridgecv/rng.hpp"

namespace ridgecv {

// Well-specified linear model: responses U diag(S) theta_star + noise.
struct LinearModelSpec {
    Eigen::VectorXd theta_star;  // unit norm
    double sigma2 = 0.5;
    Eigen::VectorXd spectrum;

    void validate() const;
};

// Uniform draw from N x D matrices with orthonormal, zero-mean columns:
// Gram-Schmidt applied to {1, a_1, ..., a_D} with i.i.d. standard normal a_d,
// keeping outputs 2..D+1. Orthogonalization runs twice so that
// ||U^T U - I||_max and ||1^T U||_max stay below 1e-10 even at N ~ 20000.
// Requires D < N - 1. Throws DegenerateDraw after bounded internal retries.
Eigen::MatrixXd sample_zero_mean_orthonormal(int N, int D, RngStream rng);

// Same pathway without the all-ones vector: uniform orthonormal N x D.
Eigen::MatrixXd sample_orthonormal(int N, int D, RngStream rng);

// Unit vector uniform over the null space of U^T: project a standard normal
// draw with I - U U^T and normalize. With project_out_ones, the all-ones
// direction is removed as well (needed when the residual must keep the
// response zero-mean). Throws DegenerateDraw when the projection collapses.
Eigen::VectorXd sample_null_residual(const Eigen::MatrixXd& U, RngStream rng,
                                     bool project_out_ones = false);

// Coherence-violating family: a valid N0 x D zero-mean orthonormal block with
// N - N0 zero rows appended, so nu_max stays constant as N grows.
Eigen::MatrixXd degenerate_U(int N, int N0, int D, RngStream rng);

// Spectrum S_d = exp(alpha d) / exp(alpha D), d = 1..D: nondecreasing with
// S_D = 1; alpha = 0 gives the flat spectrum.
Eigen::VectorXd spectrum_family(double alpha, int D);

// Y = U diag(S) theta_star + E, E ~ N(0, sigma2 I). With recenter, E is
// shifted to zero mean so the response satisfies the zero-mean condition
// exactly.
Eigen::VectorXd generate_responses(const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& S,
                                   const LinearModelSpec& spec, RngStream rng,
                                   bool recenter = false);

enum class SubgaussianFamily { gaussian, rademacher, uniform };

const char* to_string(SubgaussianFamily family);
SubgaussianFamily subgaussian_family_from_string(const std::string& name);

// N x D matrix of i.i.d. unit-variance entries from the chosen family.
Eigen::MatrixXd sample_subgaussian_X(int N, int D, SubgaussianFamily family,
                                     RngStream rng);

// Unit-norm direction, uniform on the sphere.
Eigen::VectorXd random_unit_vector(int D, RngStream rng);

}  // namespace ridgecv
