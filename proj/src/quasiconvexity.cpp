#include "ridgecv/quasiconvexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ridgecv/errors.hpp"

#include <json.hpp>

namespace ridgecv {

namespace {

constexpr double kRefineRelTol = 1e-10;
constexpr int kMaxDensify = 2;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

struct Extremum {
    double lambda;  // +inf for the tail
    double value;
    bool is_min;
    bool at_origin = false;
    bool at_tail = false;
};

// Bisection on the analytic gradient, geometric midpoints.
double refine_root(const LoocvEvaluator& eval, double lo, double hi, int sign_lo) {
    for (int it = 0; it < 200 && (hi - lo) > kRefineRelTol * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double g = eval.grad(mid);
        if (g == 0.0) return mid;
        if (sign_of(g) == sign_lo)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

// Loss at the lambda = 0 boundary; falls back to the grid edge when a
// leverage hits one there (possible for coherent U at lambda = 0).
double left_edge_loss(const LoocvEvaluator& eval, double lambda_min) {
    try {
        return eval.loss(0.0);
    } catch (const LeverageOne&) {
        return eval.loss(lambda_min);
    }
}

QvxVerdict classify_once(const LoocvEvaluator& eval, const GridConfig& grid) {
    const std::vector<double> lambdas = grid.log_grid();
    const double tail = eval.tail_limit();

    const std::vector<double> grads = eval.grad_grid(lambdas);
    std::vector<int> signs(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        signs[i] = sign_of(grads[i]);

    QvxVerdict verdict;
    verdict.grid = grid;
    verdict.tail_limit = tail;

    for (std::size_t i = 0; i < signs.size(); ++i) {
        const char c = signs[i] > 0 ? '+' : (signs[i] < 0 ? '-' : '0');
        if (verdict.sign_pattern.empty() || verdict.sign_pattern.back() != c)
            verdict.sign_pattern.push_back(c);
    }

    // Stationary points: sign changes between consecutive nonzero-sign grid
    // points, plus runs of exact zeros (vanishingly rare in floats).
    struct Root {
        double lambda;
        int sign_before, sign_after;
    };
    std::vector<Root> roots;
    std::ptrdiff_t prev = -1;  // previous index with nonzero sign
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (signs[i] == 0) continue;
        if (prev >= 0 && signs[static_cast<std::size_t>(prev)] != signs[i]) {
            const int s_lo = signs[static_cast<std::size_t>(prev)];
            double lam;
            if (static_cast<std::size_t>(prev) + 1 == i) {
                lam = refine_root(eval, lambdas[static_cast<std::size_t>(prev)],
                                  lambdas[i], s_lo);
            } else {
                // crossed a run of exact zeros; take its geometric middle
                lam = std::sqrt(lambdas[static_cast<std::size_t>(prev) + 1] *
                                lambdas[i - 1]);
            }
            roots.push_back({lam, s_lo, signs[i]});
        }
        prev = static_cast<std::ptrdiff_t>(i);
    }

    // Indistinguishable adjacent roots mean the grid cannot separate the
    // stationary points it found.
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (roots[i].lambda - roots[i - 1].lambda <
            10.0 * kRefineRelTol * roots[i].lambda)
            throw GridTooCoarse("stationary points collide at lambda ~ " +
                                std::to_string(roots[i].lambda));

    const int first_sign = [&] {
        for (int s : signs)
            if (s != 0) return s;
        return 0;
    }();
    const int last_sign = [&] {
        for (auto it = signs.rbegin(); it != signs.rend(); ++it)
            if (*it != 0) return *it;
        return 0;
    }();

    if (first_sign == 0) {
        // gradient identically zero on the grid: flat curve, minimum at tail
        verdict.is_quasiconvex = true;
        verdict.includes_tail = true;
        verdict.minima = {{std::numeric_limits<double>::infinity(), tail, false, true}};
        return verdict;
    }

    // Alternating extremum sequence over [0, inf]. Boundary entries act as
    // candidates (minima) or barriers (maxima) depending on the edge slope.
    std::vector<Extremum> seq;
    seq.push_back({0.0, left_edge_loss(eval, lambdas.front()), first_sign > 0,
                   true, false});

    const double hess_tol = 1e-12 * std::max(tail, 1e-300);
    for (const Root& r : roots) {
        const bool min_by_sign = r.sign_before < 0;  // - to + crossing
        const double h = eval.hess(r.lambda);
        bool is_min;
        if (std::abs(h) > hess_tol) {
            is_min = h > 0.0;
        } else {
            const double dl = 1e-4 * r.lambda;
            const double here = eval.loss(r.lambda);
            is_min = eval.loss(r.lambda - dl) > here &&
                     eval.loss(r.lambda + dl) > here;
        }
        if (is_min != min_by_sign)
            throw GridTooCoarse(
                "curvature label contradicts the gradient sign change at "
                "lambda ~ " + std::to_string(r.lambda));
        seq.push_back({r.lambda, eval.loss(r.lambda), is_min});
    }

    seq.push_back({std::numeric_limits<double>::infinity(), tail, last_sign < 0,
                   false, true});

    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i].is_min == seq[i - 1].is_min)
            throw GridTooCoarse("extrema fail to alternate; a stationary point "
                                "was missed between grid points");

    // Strict-rise merge: repeatedly drop the adjacent (min, max) pair with the
    // smallest value gap until every remaining rise clears the threshold.
    const double rise_tol = 1e-9 * std::max(tail, 1e-300);
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
        if (best_gap > rise_tol) break;
        seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(best),
                  seq.begin() + static_cast<std::ptrdiff_t>(best) + 2);
        ++verdict.borderline_minima;
    }

    for (const Extremum& e : seq) {
        if (!e.is_min) continue;
        verdict.minima.push_back({e.lambda, e.value, e.at_origin, e.at_tail});
        if (e.at_tail) verdict.includes_tail = true;
    }

    if (verdict.minima.empty()) {
        // everything merged away: an essentially flat curve
        const Extremum* best = nullptr;
        double best_value = std::numeric_limits<double>::infinity();
        for (const Extremum& e : seq)
            if (e.value < best_value) best_value = e.value, best = &e;
        if (best != nullptr)
            verdict.minima.push_back({best->lambda, best->value, best->at_origin,
                                      best->at_tail});
        else
            verdict.minima.push_back(
                {std::numeric_limits<double>::infinity(), tail, false, true});
        verdict.includes_tail = verdict.minima.back().at_tail;
    }

    verdict.is_quasiconvex = verdict.minima.size() <= 1;
    return verdict;
}

}  // namespace

QvxVerdict classify(const SvdForm& svd, const Eigen::VectorXd& Y,
                    const GridConfig& grid) {
    const LoocvEvaluator eval(svd, Y);
    GridConfig g = grid;
    for (int attempt = 0;; ++attempt) {
        try {
            QvxVerdict verdict = classify_once(eval, g);
            verdict.densifications = attempt;
            return verdict;
        } catch (const GridTooCoarse&) {
            if (attempt >= kMaxDensify) throw;
            g.points *= 4;
        }
    }
}

QvxVerdict classify(const SvdForm& svd, const Eigen::VectorXd& Y) {
    return classify(svd, Y, GridConfig::for_problem(svd));
}

MinimaCensus minima_census(const QvxVerdict& verdict) {
    MinimaCensus census;
    census.minima = verdict.minima;
    census.count = static_cast<int>(verdict.minima.size());
    if (census.count >= 2) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const LocalMinimum& m : verdict.minima) {
            lo = std::min(lo, m.loss);
            hi = std::max(hi, m.loss);
        }
        census.rel_gap = lo > 0.0 ? hi / lo - 1.0
                                  : std::numeric_limits<double>::infinity();
    }
    return census;
}

std::string verdict_to_json(const QvxVerdict& verdict) {
    nlohmann::json j;
    j["is_qvx"] = verdict.is_quasiconvex;
    j["minima"] = nlohmann::json::array();
    for (const LocalMinimum& m : verdict.minima) {
        nlohmann::json jm;
        if (std::isinf(m.lambda))
            jm["lambda"] = "inf";
        else
            jm["lambda"] = m.lambda;
        jm["loss"] = m.loss;
        jm["at_origin"] = m.at_origin;
        jm["at_tail"] = m.at_tail;
        j["minima"].push_back(jm);
    }
    j["tail_limit"] = verdict.tail_limit;
    j["grid"] = {{"min", verdict.grid.lambda_min},
                 {"max", verdict.grid.lambda_max},
                 {"points", verdict.grid.points}};
    j["sign_pattern"] = verdict.sign_pattern;
    j["includes_tail"] = verdict.includes_tail;
    j["densifications"] = verdict.densifications;
    j["borderline_minima"] = verdict.borderline_minima;
    return j.dump(2);
}

}  // namespace ridgecv
