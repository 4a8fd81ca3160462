#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "ridgecv/csvio.hpp"
#include "ridgecv/dataset.hpp"
#include "ridgecv/errors.hpp"
#include "ridgecv/loocv.hpp"

#include "helpers.hpp"

using namespace ridgecv;

namespace {

RawDataset tiny_raw() {
    RawDataset raw;
    raw.X.resize(3, 1);
    raw.X << 0, 2, 4;
    raw.Y.resize(3);
    raw.Y << 1, 2, 3;
    raw.feature_names = {"x"};
    return raw;
}

}  // namespace

TEST_CASE("standardize centers the response") {
    const StandardizedDataset ds = standardize(tiny_raw());
    CHECK(ds.Y(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(ds.Y(1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ds.Y(2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(ds.Y.sum()) < 1e-12);
}

TEST_CASE("standardize scales columns to squared norm N") {
    const StandardizedDataset ds = standardize(tiny_raw());
    CHECK(ds.X.col(0).squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(ds.X.col(0).sum()) < 1e-12);
}

TEST_CASE("standardize rejects constant columns") {
    RawDataset raw = tiny_raw();
    raw.X.conservativeResize(3, 2);
    raw.X.col(1) << 5, 5, 5;
    raw.feature_names = {"x", "flat"};
    CHECK_THROWS_AS(standardize(raw), ConstantColumn);
}

TEST_CASE("standardize rejects duplicated columns as rank deficient") {
    RawDataset raw;
    raw.X.resize(4, 2);
    raw.X << 0, 0, 1, 2, 2, 4, 5, 10;  // col1 = 2 * col0 after centering
    raw.Y.resize(4);
    raw.Y << 1, 2, 3, 4;
    CHECK_THROWS_AS(standardize(raw), RankDeficient);
}

TEST_CASE("svd invariants on random standardized data") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const testutil::Problem p = testutil::random_problem(seed, 20, 4);
        RawDataset raw;
        raw.X = p.X;
        raw.Y = p.Y;
        const StandardizedDataset ds = standardize(raw);
        const auto D = ds.d();

        CHECK((ds.svd.U.transpose() * ds.svd.U -
               Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((ds.svd.V.transpose() * ds.svd.V -
               Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff() < 1e-10);
        // reconstruction
        const Eigen::MatrixXd rebuilt =
            ds.svd.U * ds.svd.S.asDiagonal() * ds.svd.V.transpose();
        CHECK((rebuilt - ds.X).norm() <= 1e-10 * ds.X.norm());
        // coherence values sum to D, each within [0, 1]
        CHECK(ds.svd.nu.sum() == doctest::Approx(double(D)).epsilon(1e-10));
        CHECK(ds.svd.nu.minCoeff() >= 0.0);
        CHECK(ds.svd.nu.maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("least squares fit invariants") {
    const testutil::Problem p = testutil::random_problem(7, 25, 5);
    const LeastSquaresFit fit = least_squares(p.svd, p.Y);
    CHECK((p.svd.U.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-10);
    const double pythagoras =
        fit.projections.squaredNorm() + fit.residuals.squaredNorm();
    CHECK(testutil::rel_gap(pythagoras, p.Y.squaredNorm()) < 1e-12);
    // theta_hat solves the normal equations in the original frame
    const Eigen::VectorXd lhs = p.X.transpose() * (p.X * fit.theta_hat);
    const Eigen::VectorXd rhs = p.X.transpose() * p.Y;
    CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm());
}

TEST_CASE("reduce_frame normalizes the response and rescales the loss") {
    const testutil::Problem p = testutil::random_problem(11, 18, 3);
    StandardizedDataset ds;
    ds.X = p.X;
    ds.Y = p.Y;
    ds.svd = p.svd;
    const StandardizedDataset red = reduce_frame(ds);

    CHECK(red.Y.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // V = I afterwards, covariates U diag(S) unchanged in this frame
    CHECK((red.svd.V - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((red.X - p.X).cwiseAbs().maxCoeff() < 1e-12);

    const double y2 = p.Y.squaredNorm();
    const GridConfig grid = GridConfig::for_problem(p.svd, 20);
    for (double lam : grid.log_grid()) {
        const double full = loocv_loss(ds.svd, ds.Y, lam);
        const double reduced = loocv_loss(red.svd, red.Y, lam);
        CHECK(testutil::rel_gap(full / y2, reduced) < 1e-10);
    }
}

TEST_CASE("reduce_frame rejects a zero response") {
    const testutil::Problem p = testutil::random_problem(13, 12, 3);
    StandardizedDataset ds;
    ds.X = p.X;
    ds.Y = Eigen::VectorXd::Zero(12);
    ds.svd = p.svd;
    CHECK_THROWS_AS(reduce_frame(ds), ZeroResponse);
}

TEST_CASE("pcr_truncate keeps the top directions") {
    const testutil::Problem p = testutil::random_problem(17, 20, 5);
    StandardizedDataset ds;
    ds.X = p.X;
    ds.Y = p.Y;
    ds.svd = p.svd;

    const StandardizedDataset full = pcr_truncate(ds, 5);
    CHECK((full.X - p.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((full.svd.S - p.svd.S).cwiseAbs().maxCoeff() == 0.0);

    const StandardizedDataset one = pcr_truncate(ds, 1);
    CHECK(one.d() == 1);
    CHECK(one.X.col(0).norm() == doctest::Approx(p.svd.S(0)).epsilon(1e-12));

    CHECK_THROWS_AS(pcr_truncate(ds, 0), BadRank);
    CHECK_THROWS_AS(pcr_truncate(ds, 6), BadRank);
}

TEST_CASE("csv loader: numeric, categorical, missing rows") {
    std::istringstream in(
        "age,city,income,score\n"
        "30,ny,50,1.5\n"
        "40,sf,60,2.5\n"
        "50,ny,70,3.5\n"
        "60,la,80,4.5\n"
        "35,NA,90,5.5\n"  // dropped: missing value
        "45,sf,100,6.5\n");
    const RawDataset ds = parse_dataset_csv(in, "score");
    CHECK(ds.n() == 5);
    // columns in input order; city expands to sorted levels minus the first:
    // la is reference, so indicators are ny and sf
    REQUIRE(ds.feature_names.size() == 4);
    CHECK(ds.feature_names[0] == "age");
    CHECK(ds.feature_names[1] == "city=ny");
    CHECK(ds.feature_names[2] == "city=sf");
    CHECK(ds.feature_names[3] == "income");
    CHECK(ds.X(0, 1) == 1.0);  // ny
    CHECK(ds.X(1, 2) == 1.0);  // sf
    CHECK(ds.X(3, 1) == 0.0);  // la row: both indicators zero
    CHECK(ds.X(3, 2) == 0.0);
    CHECK(ds.Y(4) == 6.5);
}

TEST_CASE("csv loader sniffs semicolon-delimited files") {
    std::istringstream in(
        "\"a\";\"b\";\"score\"\n"
        "1;2;0.5\n"
        "3;5;1.5\n"
        "5;6;2.5\n"
        "7;9;3.5\n");
    const RawDataset ds = parse_dataset_csv(in, "score");
    CHECK(ds.n() == 4);
    CHECK(ds.d() == 2);
    CHECK(ds.feature_names[0] == "a");
    CHECK(ds.X(1, 1) == 5.0);
    CHECK(ds.Y(3) == 3.5);
}

TEST_CASE("csv loader error paths carry context") {
    std::istringstream missing_target("a,b\n1,2\n3,4\n5,6\n");
    CHECK_THROWS_AS(parse_dataset_csv(missing_target, "zzz"), CsvFormatError);

    std::istringstream ragged("a,b\n1,2\n3\n5,6\n");
    CHECK_THROWS_AS(parse_dataset_csv(ragged, "b"), CsvFormatError);

    std::istringstream too_small("a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(parse_dataset_csv(too_small, "b"), CsvFormatError);
}

TEST_CASE("problem hash separates distinct problems") {
    const testutil::Problem a = testutil::random_problem(1, 15, 3);
    const testutil::Problem b = testutil::random_problem(2, 15, 3);
    CHECK(problem_hash(a.svd, a.Y) == problem_hash(a.svd, a.Y));
    CHECK(problem_hash(a.svd, a.Y) != problem_hash(b.svd, b.Y));
}
