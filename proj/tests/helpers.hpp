#pragma once

// Shared fixtures: seeded synthetic regression problems and the independent
// oracles (finite differences, dense-grid minima count) the library is
// checked against. Nothing here calls into the code paths it verifies.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ridgecv/dataset.hpp"
#include "ridgecv/errors.hpp"
#include "ridgecv/loocv.hpp"
#include "ridgecv/rng.hpp"
#include "ridgecv/samplers.hpp"

namespace testutil {

struct Problem {
    ridgecv::SvdForm svd;
    Eigen::VectorXd Y;
    Eigen::MatrixXd X;  // U diag(S), the V = I frame
};

// Well-specified problem on a zero-mean orthonormal U with a log-normal
// spectrum (spread = 0 gives S = 1 exactly).
inline Problem random_problem(std::uint64_t seed, int N, int D,
                              double sigma2 = 0.5, double spectrum_spread = 0.4) {
    using namespace ridgecv;
    const RngStream root(seed);
    Problem p;
    Eigen::MatrixXd U = sample_zero_mean_orthonormal(N, D, root.fork(1));
    Eigen::VectorXd S(D);
    if (spectrum_spread == 0.0) {
        S.setOnes();
    } else {
        auto gen = root.fork(2).engine();
        std::normal_distribution<double> normal(0.0, spectrum_spread);
        for (int d = 0; d < D; ++d) S(d) = std::exp(normal(gen));
        std::sort(S.data(), S.data() + D, std::greater<double>());
    }
    LinearModelSpec model;
    model.theta_star = random_unit_vector(D, root.fork(3));
    model.sigma2 = sigma2;
    p.Y = generate_responses(U, S, model, root.fork(4));
    p.X = U * S.asDiagonal();
    p.svd = SvdForm::from_components(std::move(U), std::move(S),
                                     Eigen::MatrixXd::Identity(D, D));
    return p;
}

inline double rel_gap(double a, double b, double floor = 0.0) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

// Central difference of the loss; the gradient oracle.
inline double fd_grad(const ridgecv::LoocvEvaluator& eval, double lambda) {
    const double h = 1e-5 * (1.0 + lambda);
    return (eval.loss(lambda + h) - eval.loss(lambda - h)) / (2.0 * h);
}

// Central difference of the analytic gradient; the curvature oracle (the
// gradient itself is vouched for by fd_grad).
inline double fd_hess(const ridgecv::LoocvEvaluator& eval, double lambda) {
    const double h = 1e-5 * (1.0 + lambda);
    return (eval.grad(lambda + h) - eval.grad(lambda - h)) / (2.0 * h);
}

// Counts strict local minima of the loss over [0, inf] from raw samples on a
// dense log grid: direction changes of the sampled values plus the two
// boundary candidates, simplified with the same strict-rise threshold the
// classifier pins (1e-9 * tail). Reimplemented here from values only; no
// derivatives, no root refinement.
inline int dense_grid_minima_count(const ridgecv::SvdForm& svd,
                                   const Eigen::VectorXd& Y,
                                   int points = 100000) {
    using namespace ridgecv;
    const LoocvEvaluator eval(svd, Y);
    const GridConfig grid = GridConfig::for_problem(svd, points);
    const std::vector<double> lambdas = grid.log_grid();
    const double tail = eval.tail_limit();

    std::vector<double> v;
    v.reserve(lambdas.size() + 2);
    try {
        v.push_back(eval.loss(0.0));
    } catch (const LeverageOne&) {
        v.push_back(eval.loss(lambdas.front()));
    }
    for (double lam : lambdas) v.push_back(eval.loss(lam));
    v.push_back(tail);

    // alternating extrema of the sampled sequence, endpoints included
    struct Ext {
        double value;
        bool is_min;
    };
    std::vector<Ext> seq;
    int dir = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const int d = (v[i] > v[i - 1]) - (v[i] < v[i - 1]);
        if (d == 0) continue;
        if (dir == 0)
            seq.push_back({v[0], d > 0});  // left endpoint
        else if (d != dir)
            seq.push_back({v[i - 1], d > 0});
        dir = d;
    }
    if (dir == 0) return 1;                  // flat curve
    seq.push_back({v.back(), dir < 0});      // right endpoint

    const double tol = 1e-9 * std::max(tail, 1e-300);
    while (seq.size() >= 2) {
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            const double gap = std::abs(seq[i + 1].value - seq[i].value);
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best_gap > tol) break;
        seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(best),
                  seq.begin() + static_cast<std::ptrdiff_t>(best) + 2);
    }
    int count = 0;
    for (const Ext& e : seq) count += e.is_min ? 1 : 0;
    return count == 0 ? 1 : count;
}

}  // namespace testutil
