#include "ridgecv/dataset.hpp"

#include <cmath>
#include <cstring>

#include "ridgecv/errors.hpp"

namespace ridgecv {

void RawDataset::validate() const {
    if (X.rows() != Y.size())
        throw Error("X and Y row counts disagree");
    if (d() < 1) throw Error("need at least one covariate column");
    if (n() < 3) throw Error("need at least three rows");
    if (d() >= n())
        throw Error("this library covers the low-dimensional case D < N");
    if (!X.allFinite() || !Y.allFinite())
        throw Error("dataset contains NaN or Inf entries");
}

SvdForm SvdForm::from_matrix(const Eigen::MatrixXd& X, const Tolerances& tol) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s(s.size() - 1) <= tol.rank * s(0))
        throw RankDeficient("covariate matrix is rank deficient: s_min/s_max = " +
                            std::to_string(s(s.size() - 1) / s(0)));
    return from_components(svd.matrixU(), s, svd.matrixV());
}

SvdForm SvdForm::from_components(Eigen::MatrixXd U, Eigen::VectorXd S,
                                 Eigen::MatrixXd V, bool validate) {
    SvdForm out;
    out.nu = U.rowwise().squaredNorm();
    out.U = std::move(U);
    out.S = std::move(S);
    out.V = std::move(V);
    if (validate) {
        const auto D = out.d();
        if ((out.U.transpose() * out.U - Eigen::MatrixXd::Identity(D, D))
                .cwiseAbs().maxCoeff() > 1e-10)
            throw Error("U columns are not orthonormal");
        if ((out.V.transpose() * out.V - Eigen::MatrixXd::Identity(D, D))
                .cwiseAbs().maxCoeff() > 1e-10)
            throw Error("V is not orthonormal");
        for (Eigen::Index i = 0; i + 1 < D; ++i)
            if (out.S(i) < out.S(i + 1))
                throw Error("singular values not sorted nonincreasing");
        if (out.S(D - 1) <= 0.0) throw Error("nonpositive singular value");
    }
    return out;
}

StandardizedDataset standardize(const RawDataset& raw, const Tolerances& tol) {
    raw.validate();
    const auto N = raw.n();
    const auto D = raw.d();

    Eigen::VectorXd y = raw.Y.array() - raw.Y.mean();
    Eigen::MatrixXd x = raw.X;
    for (Eigen::Index j = 0; j < D; ++j) {
        const double mean = x.col(j).mean();
        x.col(j).array() -= mean;
        // population variance: column squared norm becomes exactly N
        const double msq = x.col(j).squaredNorm() / static_cast<double>(N);
        if (std::sqrt(msq) <= 1e-12 * std::max(1.0, std::abs(mean))) {
            const std::string name =
                j < static_cast<Eigen::Index>(raw.feature_names.size())
                    ? raw.feature_names[j] : std::string();
            throw ConstantColumn(static_cast<int>(j), name);
        }
        x.col(j) /= std::sqrt(msq);
    }

    StandardizedDataset out;
    out.svd = SvdForm::from_matrix(x, tol);
    out.X = std::move(x);
    out.Y = std::move(y);
    out.feature_names = raw.feature_names;
    return out;
}

StandardizedDataset reduce_frame(const StandardizedDataset& ds) {
    const double ynorm = ds.Y.norm();
    if (ynorm == 0.0) throw ZeroResponse("response vector has zero norm");

    StandardizedDataset out;
    out.X = ds.svd.U * ds.svd.S.asDiagonal();
    out.Y = ds.Y / ynorm;
    out.svd = SvdForm::from_components(
        ds.svd.U, ds.svd.S, Eigen::MatrixXd::Identity(ds.d(), ds.d()));
    out.feature_names = ds.feature_names;
    return out;
}

StandardizedDataset pcr_truncate(const StandardizedDataset& ds, int rank) {
    if (rank < 1 || rank > ds.d())
        throw BadRank("pcr rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(ds.d()) + "]");
    const Eigen::MatrixXd u = ds.svd.U.leftCols(rank);
    const Eigen::VectorXd s = ds.svd.S.head(rank);

    StandardizedDataset out;
    out.X = u * s.asDiagonal();
    out.Y = ds.Y;
    out.svd = SvdForm::from_components(u, s, Eigen::MatrixXd::Identity(rank, rank));
    for (int j = 0; j < rank; ++j)
        out.feature_names.push_back("pc" + std::to_string(j + 1));
    return out;
}

LeastSquaresFit least_squares(const SvdForm& svd, const Eigen::VectorXd& Y) {
    LeastSquaresFit fit;
    const Eigen::VectorXd z = svd.U.transpose() * Y;
    fit.projections = svd.U * z;
    fit.residuals = Y - fit.projections;
    fit.theta_hat = svd.V * (z.array() / svd.S.array()).matrix();
    return fit;
}

std::uint64_t problem_hash(const SvdForm& svd, const Eigen::VectorXd& Y) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t dims[2] = {svd.n(), svd.d()};
    eat(dims, sizeof(dims));
    eat(svd.S.data(), sizeof(double) * svd.S.size());
    eat(svd.U.data(), sizeof(double) * svd.U.size());
    eat(Y.data(), sizeof(double) * Y.size());
    return h;
}

}  // namespace ridgecv
