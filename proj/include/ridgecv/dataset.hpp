#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ridgecv {

// Library-wide numeric tolerances. Overridable where it matters; the defaults
// are what every invariant check in this library uses.
struct Tolerances {
    double abs = 1e-10;
    double rel = 1e-8;
    double rank = 1e-12;  // smallest/largest singular value cutoff
};

// Covariates and responses as loaded, before any preprocessing.
// Requires D < N, N >= 3, finite entries.
struct RawDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index d() const { return X.cols(); }
    void validate() const;
};

// Thin SVD X = U diag(S) V^T plus the squared row norms nu_n = ||u_n||^2
// (the leverage/coherence values everything downstream runs on).
struct SvdForm {
    Eigen::MatrixXd U;   // N x D, orthonormal columns
    Eigen::VectorXd S;   // length D, nonincreasing, positive
    Eigen::MatrixXd V;   // D x D, orthonormal
    Eigen::VectorXd nu;  // length N, nu_n = ||u_n||^2

    Eigen::Index n() const { return U.rows(); }
    Eigen::Index d() const { return U.cols(); }

    double nu_max() const { return nu.maxCoeff(); }
    // Mean squared singular value; sets the scale of the default lambda grid.
    double mean_sq_singular() const { return S.squaredNorm() / static_cast<double>(S.size()); }
    bool spectrum_is_flat(double tol = 1e-8) const {
        return (S.array() - 1.0).abs().maxCoeff() <= tol;
    }

    // Thin SVD of X; throws RankDeficient when s_min <= tol.rank * s_max.
    static SvdForm from_matrix(const Eigen::MatrixXd& X, const Tolerances& tol = {});
    // Wraps precomputed factors, recomputing nu. Orthonormality is the
    // caller's responsibility (checked when validate = true).
    static SvdForm from_components(Eigen::MatrixXd U, Eigen::VectorXd S,
                                   Eigen::MatrixXd V, bool validate = false);
};

// Dataset after Condition-1-style preprocessing, with the SVD cached.
// standardize() guarantees zero-mean Y, zero-mean unit-variance columns;
// reduce_frame()/pcr_truncate() outputs keep zero means but deliberately do
// not rescale columns.
struct StandardizedDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;
    SvdForm svd;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index d() const { return X.cols(); }
};

// Unregularized least-squares summary in the SVD frame.
struct LeastSquaresFit {
    Eigen::VectorXd theta_hat;    // (X^T X)^-1 X^T Y in the original frame
    Eigen::VectorXd residuals;    // Y - X theta_hat; orthogonal to col(U)
    Eigen::VectorXd projections;  // fitted values u_n^T U^T Y
};

// Center Y, center and scale columns of X so that sum_n x_nd^2 = N
// (population variance), compute and cache the SVD.
// Throws ConstantColumn / RankDeficient.
StandardizedDataset standardize(const RawDataset& raw, const Tolerances& tol = {});

// Equivalent problem with V = I (covariates U diag(S)) and Y rescaled to unit
// norm. Quasiconvexity of the LOOCV loss is preserved; the loss itself scales
// by 1/||Y||^2. Throws ZeroResponse.
StandardizedDataset reduce_frame(const StandardizedDataset& ds);

// Principal component regression: keep the top `rank` singular directions,
// X' = U[:, :rank] diag(S[:rank]). Columns are not re-standardized. Throws BadRank.
StandardizedDataset pcr_truncate(const StandardizedDataset& ds, int rank);

LeastSquaresFit least_squares(const SvdForm& svd, const Eigen::VectorXd& Y);

// FNV-1a over dims and the U, S, Y payload; identifies a problem instance in
// exported files.
std::uint64_t problem_hash(const SvdForm& svd, const Eigen::VectorXd& Y);

}  // namespace ridgecv
