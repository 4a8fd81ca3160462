#include "ridgecv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ridgecv/csvio.hpp"
#include "ridgecv/dataset.hpp"
#include "ridgecv/diagnostics.hpp"
#include "ridgecv/errors.hpp"
#include "ridgecv/loocv.hpp"
#include "ridgecv/parallel.hpp"
#include "ridgecv/quasiconvexity.hpp"
#include "ridgecv/samplers.hpp"
#include "ridgecv/version.hpp"

#include <json.hpp>

namespace ridgecv {

namespace {

// rng path roots; every draw in an experiment hangs off one of these
constexpr std::uint64_t kPathTheta = 1;
constexpr std::uint64_t kPathU = 2;
constexpr std::uint64_t kPathNoise = 3;
constexpr std::uint64_t kPathBlocks = 4;
constexpr std::uint64_t kPathSubsets = 5;
constexpr std::uint64_t kPathReplicas = 6;

std::vector<int> logspace_ints(int lo, int hi, int count) {
    std::vector<int> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0
                                    : static_cast<double>(i) / (count - 1);
        const int v = static_cast<int>(std::lround(
            std::exp(std::log(static_cast<double>(lo)) +
                     t * (std::log(static_cast<double>(hi)) -
                          std::log(static_cast<double>(lo))))));
        if (out.empty() || v != out.back()) out.push_back(v);
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * i / static_cast<double>(count - 1);
    return out;
}

std::string fmt_int(long long v) { return std::to_string(v); }

SvdForm make_problem(Eigen::MatrixXd U, Eigen::VectorXd S_descending) {
    const auto d = S_descending.size();
    return SvdForm::from_components(std::move(U), std::move(S_descending),
                                    Eigen::MatrixXd::Identity(d, d));
}

Eigen::VectorXd descending(Eigen::VectorXd s) {
    std::sort(s.data(), s.data() + s.size(), std::greater<double>());
    return s;
}

// Outcome of one classification trial.
struct Trial {
    int status = 0;  // 0 = qvx, 1 = non-qvx, 2 = failed
    int borderline = 0;
};

Trial classify_trial(const SvdForm& svd, const Eigen::VectorXd& Y,
                     int grid_points) {
    Trial t;
    try {
        const QvxVerdict v =
            classify(svd, Y, GridConfig::for_problem(svd, grid_points));
        t.status = v.is_quasiconvex ? 0 : 1;
        t.borderline = v.borderline_minima > 0 ? 1 : 0;
    } catch (const Error&) {
        t.status = 2;
    }
    return t;
}

struct CellCounts {
    long long trials = 0, failures = 0, non_qvx = 0, borderline = 0;
    void add(const Trial& t) {
        ++trials;
        if (t.status == 2)
            ++failures;
        else if (t.status == 1)
            ++non_qvx;
        borderline += t.borderline;
    }
    double fraction() const {
        const long long classified = trials - failures;
        return classified > 0 ? static_cast<double>(non_qvx) / classified : 0.0;
    }
};

void push_count_columns(std::vector<std::string>& columns) {
    columns.insert(columns.end(),
                   {"trials", "failures", "non_qvx", "borderline",
                    "fraction_non_qvx"});
}

void push_count_cells(std::vector<std::string>& row, const CellCounts& c) {
    row.push_back(fmt_int(c.trials));
    row.push_back(fmt_int(c.failures));
    row.push_back(fmt_int(c.non_qvx));
    row.push_back(fmt_int(c.borderline));
    row.push_back(format_double(c.fraction()));
}

}  // namespace

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::atlas: return "atlas";
        case ExperimentKind::delta_sweep: return "delta_sweep";
        case ExperimentKind::coherence: return "coherence";
        case ExperimentKind::residual_norm: return "residual_norm";
        case ExperimentKind::coherence_decay: return "coherence_decay";
        case ExperimentKind::subgaussian: return "subgaussian";
        case ExperimentKind::realdata: return "realdata";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::atlas, ExperimentKind::delta_sweep,
          ExperimentKind::coherence, ExperimentKind::residual_norm,
          ExperimentKind::coherence_decay, ExperimentKind::subgaussian,
          ExperimentKind::realdata})
        if (name == to_string(k)) return k;
    throw Error("unknown experiment kind: " + name);
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind,
                                            bool paper_scale) {
    ExperimentConfig c;
    c.kind = kind;
    c.paper_scale = paper_scale;
    switch (kind) {
        case ExperimentKind::atlas:
            c.atlas_s2 = {0.2, 0.5, 0.9};
            c.atlas_points = 100;  // reference grid size
            break;
        case ExperimentKind::delta_sweep:
            c.n_list = {10, 20, 40};
            c.sigma2 = 0.5;
            if (paper_scale) {
                c.alphas = linspace(0.0, 1.0, 11);
                c.n_u = 100;
                c.n_y = 100;
            } else {
                c.alphas = linspace(0.0, 1.0, 6);
                c.n_u = 20;
                c.n_y = 20;
            }
            break;
        case ExperimentKind::coherence:
            c.n_list = logspace_ints(10, 300, 10);
            c.n0 = 8;
            c.sigma2 = 0.5;
            if (paper_scale) {
                c.n_u = 500;
                c.n_y = 100;
            } else {
                c.n_u = 50;
                c.n_y = 40;
            }
            break;
        case ExperimentKind::residual_norm:
            c.residual_nus = linspace(0.0, 2.0, 60);
            if (paper_scale) {
                c.n_list = {10, 15, 20, 25, 30};
                c.n_u = 4000;
                c.n_y = 250;
            } else {
                // the boundary violations are ~1e-3..1e-4 events, so the desk
                // scale still needs 10^4 problems per cell to resolve them
                c.n_list = {10, 20};
                c.n_u = 100;
                c.n_y = 100;
            }
            break;
        case ExperimentKind::coherence_decay:
            if (paper_scale) {
                c.n_list = logspace_ints(2500, 20500, 50);
                c.n_u = 750;
            } else {
                c.n_list = logspace_ints(2500, 20500, 10);
                c.n_u = 50;
            }
            break;
        case ExperimentKind::subgaussian:
            c.families = {"gaussian", "rademacher", "uniform"};
            c.sigma2 = 0.1;
            if (paper_scale) {
                c.n_list = {250, 500, 1000, 2000, 4000};
                c.n_u = 40;
                c.n_y = 25;
            } else {
                c.n_list = {250, 500, 1000, 2000};
                c.n_u = 10;
                c.n_y = 10;
            }
            break;
        case ExperimentKind::realdata:
            c.subset_size = 50;
            c.subset_count = 400;
            break;
    }
    return c;
}

std::string ExperimentConfig::canonical_string() const {
    std::ostringstream ss;
    auto ints = [](const std::vector<int>& v) {
        std::string s;
        for (int x : v) s += std::to_string(x) + "|";
        return s;
    };
    auto dbls = [](const std::vector<double>& v) {
        std::string s;
        for (double x : v) s += format_double(x) + "|";
        return s;
    };
    auto strs = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += x + "|";
        return s;
    };
    ss << "kind=" << to_string(kind) << ";n_list=" << ints(n_list)
       << ";dim=" << dim << ";n0=" << n0 << ";n_u=" << n_u << ";n_y=" << n_y
       << ";sigma2=" << format_double(sigma2) << ";alphas=" << dbls(alphas)
       << ";atlas_s2=" << dbls(atlas_s2) << ";atlas_points=" << atlas_points
       << ";residual_nus=" << dbls(residual_nus) << ";families=" << strs(families)
       << ";grid_points=" << grid_points << ";master_seed=" << master_seed
       << ";threads=" << threads << ";paper_scale=" << paper_scale
       << ";input_path=" << input_path << ";target_column=" << target_column
       << ";pcr_ranks=" << ints(pcr_ranks) << ";subset_size=" << subset_size
       << ";subset_count=" << subset_count << ";curve_dir=" << curve_dir;
    return ss.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string s = config.canonical_string();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int ExperimentResult::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw Error("no column named " + name);
}

double ExperimentResult::num(std::size_t row, const std::string& name) const {
    return std::strtod(cell(row, name).c_str(), nullptr);
}

const std::string& ExperimentResult::cell(std::size_t row,
                                          const std::string& name) const {
    return rows.at(row).at(static_cast<std::size_t>(col(name)));
}

void ExperimentResult::add_meta(const std::string& key,
                                const std::string& value) {
    metadata.emplace_back(key, value);
}

const std::string* ExperimentResult::find_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return &v;
    return nullptr;
}

// ---------------------------------------------------------------------------
// atlas: N = 3, D = 2. Fixed orthonormal basis of the zero-sum plane in R^3;
// Y and the first column of U sweep the unit circle of that plane, the second
// column is the first rotated by pi/2. One panel per spectrum setting.
// ---------------------------------------------------------------------------
ExperimentResult run_atlas(const ExperimentConfig& config) {
    const Eigen::Vector3d b1 = Eigen::Vector3d(1, -1, 0) / std::sqrt(2.0);
    const Eigen::Vector3d b2 = Eigen::Vector3d(1, 1, -2) / std::sqrt(6.0);
    const int P = config.atlas_points;
    const double two_pi = 2.0 * std::acos(-1.0);

    struct Slot {
        int non_qvx = 0;
        int n_minima = 0;
        int failed = 0;
    };
    const std::size_t total = config.atlas_s2.size() *
                              static_cast<std::size_t>(P) *
                              static_cast<std::size_t>(P);
    std::vector<Slot> slots(total);

    parallel_for(config.atlas_s2.size() * static_cast<std::size_t>(P),
                 config.threads, [&](std::size_t task) {
        const std::size_t si = task / static_cast<std::size_t>(P);
        const int pi_idx = static_cast<int>(task % static_cast<std::size_t>(P));
        const double s2 = config.atlas_s2[si];
        const double psi = two_pi * pi_idx / P;

        Eigen::MatrixXd U(3, 2);
        U.col(0) = std::cos(psi) * b1 + std::sin(psi) * b2;
        U.col(1) = -std::sin(psi) * b1 + std::cos(psi) * b2;
        Eigen::VectorXd S(2);
        S << 1.0, s2;
        const SvdForm svd = make_problem(U, S);

        for (int phi_idx = 0; phi_idx < P; ++phi_idx) {
            const double phi = two_pi * phi_idx / P;
            const Eigen::VectorXd Y = std::cos(phi) * b1 + std::sin(phi) * b2;
            Slot& slot = slots[(si * static_cast<std::size_t>(P) +
                                static_cast<std::size_t>(pi_idx)) *
                                   static_cast<std::size_t>(P) +
                               static_cast<std::size_t>(phi_idx)];
            try {
                const QvxVerdict v = classify(
                    svd, Y, GridConfig::for_problem(svd, config.grid_points));
                slot.non_qvx = v.is_quasiconvex ? 0 : 1;
                slot.n_minima = static_cast<int>(v.minima.size());
            } catch (const Error&) {
                slot.failed = 1;
            }
        }
    });

    ExperimentResult res;
    res.columns = {"s2", "psi_index", "phi_index", "psi", "phi",
                   "non_qvx", "n_minima", "failed"};
    std::size_t k = 0;
    for (std::size_t si = 0; si < config.atlas_s2.size(); ++si) {
        CellCounts counts;
        for (int a = 0; a < P; ++a)
            for (int b = 0; b < P; ++b, ++k) {
                const Slot& slot = slots[k];
                res.rows.push_back({format_double(config.atlas_s2[si]),
                                    fmt_int(a), fmt_int(b),
                                    format_double(two_pi * a / P),
                                    format_double(two_pi * b / P),
                                    fmt_int(slot.non_qvx),
                                    fmt_int(slot.n_minima),
                                    fmt_int(slot.failed)});
                Trial t;
                t.status = slot.failed ? 2 : slot.non_qvx;
                counts.add(t);
            }
        res.add_meta("fraction_non_qvx_s2=" + format_double(config.atlas_s2[si]),
                     format_double(counts.fraction()));
    }
    return res;
}

// ---------------------------------------------------------------------------
// delta_sweep: spectrum S_d = exp(alpha d)/exp(alpha D); per (N, alpha) cell,
// n_u zero-mean orthonormal U and n_y well-specified responses each.
// ---------------------------------------------------------------------------
ExperimentResult run_delta_sweep(const ExperimentConfig& config) {
    const RngStream root(config.master_seed);
    LinearModelSpec model;
    model.theta_star = random_unit_vector(config.dim, root.fork(kPathTheta));
    model.sigma2 = config.sigma2;

    struct UTask {
        CellCounts counts;
    };
    const std::size_t n_cells = config.n_list.size() * config.alphas.size();
    std::vector<UTask> slots(n_cells * static_cast<std::size_t>(config.n_u));

    parallel_for(slots.size(), config.threads, [&](std::size_t task) {
        const std::size_t cell = task / static_cast<std::size_t>(config.n_u);
        const std::uint64_t u_idx = task % static_cast<std::size_t>(config.n_u);
        const int N = config.n_list[cell / config.alphas.size()];
        const double alpha = config.alphas[cell % config.alphas.size()];
        const Eigen::VectorXd S = descending(spectrum_family(alpha, config.dim));

        const Eigen::MatrixXd U = sample_zero_mean_orthonormal(
            N, config.dim, root.fork(kPathU).fork(cell).fork(u_idx));
        const SvdForm svd = make_problem(U, S);
        for (int y = 0; y < config.n_y; ++y) {
            const Eigen::VectorXd Y = generate_responses(
                U, S, model,
                root.fork(kPathNoise).fork(cell).fork(u_idx).fork(
                    static_cast<std::uint64_t>(y)));
            slots[task].counts.add(classify_trial(svd, Y, config.grid_points));
        }
    });

    ExperimentResult res;
    res.columns = {"n", "alpha", "spectrum_dist_1"};
    push_count_columns(res.columns);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const int N = config.n_list[cell / config.alphas.size()];
        const double alpha = config.alphas[cell % config.alphas.size()];
        const Eigen::VectorXd S = spectrum_family(alpha, config.dim);
        CellCounts counts;
        for (int u = 0; u < config.n_u; ++u) {
            const CellCounts& c =
                slots[cell * static_cast<std::size_t>(config.n_u) +
                      static_cast<std::size_t>(u)].counts;
            counts.trials += c.trials;
            counts.failures += c.failures;
            counts.non_qvx += c.non_qvx;
            counts.borderline += c.borderline;
        }
        std::vector<std::string> row = {
            fmt_int(N), format_double(alpha),
            format_double((S.array() - 1.0).abs().sum())};
        push_count_cells(row, counts);
        res.rows.push_back(std::move(row));
    }
    return res;
}

// ---------------------------------------------------------------------------
// coherence: flat spectrum; an assumption-satisfying family (fresh zero-mean
// orthonormal U per N) against the violating family (a fixed set of N0 x D
// blocks padded with zero rows). The violating blocks are drawn once and
// reused across N, which is what keeps their nu_max constant.
// ---------------------------------------------------------------------------
ExperimentResult run_coherence(const ExperimentConfig& config) {
    const RngStream root(config.master_seed);
    LinearModelSpec model;
    model.theta_star = random_unit_vector(config.dim, root.fork(kPathTheta));
    model.sigma2 = config.sigma2;
    const Eigen::VectorXd S = Eigen::VectorXd::Ones(config.dim);

    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(config.n_u));
    for (int u = 0; u < config.n_u; ++u)
        blocks.push_back(sample_zero_mean_orthonormal(
            config.n0, config.dim,
            root.fork(kPathBlocks).fork(static_cast<std::uint64_t>(u))));

    struct UTask {
        CellCounts counts;
        double nu_max = 0.0;
    };
    const std::size_t n_cells = config.n_list.size() * 2;  // x family
    std::vector<UTask> slots(n_cells * static_cast<std::size_t>(config.n_u));

    parallel_for(slots.size(), config.threads, [&](std::size_t task) {
        const std::size_t cell = task / static_cast<std::size_t>(config.n_u);
        const std::uint64_t u_idx = task % static_cast<std::size_t>(config.n_u);
        const int N = config.n_list[cell / 2];
        const bool violating = (cell % 2) == 1;

        Eigen::MatrixXd U;
        if (violating) {
            U = Eigen::MatrixXd::Zero(N, config.dim);
            U.topRows(config.n0) = blocks[u_idx];
        } else {
            U = sample_zero_mean_orthonormal(
                N, config.dim, root.fork(kPathU).fork(cell).fork(u_idx));
        }
        const SvdForm svd = make_problem(U, S);
        slots[task].nu_max = svd.nu_max();
        for (int y = 0; y < config.n_y; ++y) {
            const Eigen::VectorXd Y = generate_responses(
                U, S, model,
                root.fork(kPathNoise).fork(cell).fork(u_idx).fork(
                    static_cast<std::uint64_t>(y)));
            slots[task].counts.add(classify_trial(svd, Y, config.grid_points));
        }
    });

    ExperimentResult res;
    res.columns = {"n", "family", "nu_max_stat"};
    push_count_columns(res.columns);
    std::vector<double> n_sat, numax_sat;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const int N = config.n_list[cell / 2];
        const bool violating = (cell % 2) == 1;
        CellCounts counts;
        // max nu_max across draws for the satisfying family, min for the
        // violating one (its ceiling is fixed by construction)
        double stat = violating ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
        for (int u = 0; u < config.n_u; ++u) {
            const UTask& t = slots[cell * static_cast<std::size_t>(config.n_u) +
                                   static_cast<std::size_t>(u)];
            counts.trials += t.counts.trials;
            counts.failures += t.counts.failures;
            counts.non_qvx += t.counts.non_qvx;
            counts.borderline += t.counts.borderline;
            stat = violating ? std::min(stat, t.nu_max) : std::max(stat, t.nu_max);
        }
        if (!violating) {
            n_sat.push_back(static_cast<double>(N));
            numax_sat.push_back(stat);
        }
        std::vector<std::string> row = {fmt_int(N),
                                        violating ? "violating" : "satisfying",
                                        format_double(stat)};
        push_count_cells(row, counts);
        res.rows.push_back(std::move(row));
    }
    if (n_sat.size() >= 2)
        res.add_meta("numax_slope_satisfying",
                     format_double(fit_loglog_slope(n_sat, numax_sat)));
    return res;
}

// ---------------------------------------------------------------------------
// residual_norm: covariates U (flat spectrum), responses U theta* + nu R with
// R unit norm, orthogonal to col(U) and to the ones vector. The same (U, R)
// pairs sweep the whole nu grid; the boundary nu_max(N) is the largest grid
// nu below which no non-quasiconvex problem appears.
// ---------------------------------------------------------------------------
ExperimentResult run_residual_norm(const ExperimentConfig& config) {
    const RngStream root(config.master_seed);
    LinearModelSpec model;
    model.theta_star = random_unit_vector(config.dim, root.fork(kPathTheta));
    model.sigma2 = 0.0;
    const Eigen::VectorXd S = Eigen::VectorXd::Ones(config.dim);
    const std::size_t n_nus = config.residual_nus.size();

    struct UTask {
        std::vector<CellCounts> per_nu;
    };
    std::vector<UTask> slots(config.n_list.size() *
                             static_cast<std::size_t>(config.n_u));

    parallel_for(slots.size(), config.threads, [&](std::size_t task) {
        const std::size_t n_idx = task / static_cast<std::size_t>(config.n_u);
        const std::uint64_t u_idx = task % static_cast<std::size_t>(config.n_u);
        const int N = config.n_list[n_idx];

        const Eigen::MatrixXd U = sample_zero_mean_orthonormal(
            N, config.dim, root.fork(kPathU).fork(n_idx).fork(u_idx));
        const SvdForm svd = make_problem(U, S);
        const Eigen::VectorXd signal = U * model.theta_star;

        UTask& out = slots[task];
        out.per_nu.resize(n_nus);
        for (int r = 0; r < config.n_y; ++r) {
            const Eigen::VectorXd R = sample_null_residual(
                U,
                root.fork(kPathNoise).fork(n_idx).fork(u_idx).fork(
                    static_cast<std::uint64_t>(r)),
                /*project_out_ones=*/true);
            for (std::size_t k = 0; k < n_nus; ++k) {
                const Eigen::VectorXd Y = signal + config.residual_nus[k] * R;
                out.per_nu[k].add(classify_trial(svd, Y, config.grid_points));
            }
        }
    });

    ExperimentResult res;
    res.columns = {"n", "nu"};
    push_count_columns(res.columns);
    for (std::size_t n_idx = 0; n_idx < config.n_list.size(); ++n_idx) {
        double boundary = std::numeric_limits<double>::quiet_NaN();
        bool boundary_found = false;
        for (std::size_t k = 0; k < n_nus; ++k) {
            CellCounts counts;
            for (int u = 0; u < config.n_u; ++u) {
                const CellCounts& c =
                    slots[n_idx * static_cast<std::size_t>(config.n_u) +
                          static_cast<std::size_t>(u)].per_nu[k];
                counts.trials += c.trials;
                counts.failures += c.failures;
                counts.non_qvx += c.non_qvx;
                counts.borderline += c.borderline;
            }
            if (!boundary_found && counts.non_qvx > 0) {
                boundary = config.residual_nus[k];
                boundary_found = true;
            }
            std::vector<std::string> row = {
                fmt_int(config.n_list[n_idx]),
                format_double(config.residual_nus[k])};
            push_count_cells(row, counts);
            res.rows.push_back(std::move(row));
        }
        if (!boundary_found) boundary = config.residual_nus.back();
        res.add_meta("nu_max_n=" + std::to_string(config.n_list[n_idx]),
                     format_double(boundary));
        res.add_meta("nu_max_is_grid_end_n=" + std::to_string(config.n_list[n_idx]),
                     boundary_found ? "0" : "1");
    }
    return res;
}

// ---------------------------------------------------------------------------
// coherence_decay: mean nu_max of zero-mean-constrained vs unconstrained
// orthonormal draws across large N. No responses, no classification.
// ---------------------------------------------------------------------------
ExperimentResult run_coherence_decay(const ExperimentConfig& config) {
    const RngStream root(config.master_seed);

    struct Slot {
        double nu_max = 0.0;
    };
    const std::size_t n_cells = config.n_list.size() * 2;
    std::vector<Slot> slots(n_cells * static_cast<std::size_t>(config.n_u));

    parallel_for(slots.size(), config.threads, [&](std::size_t task) {
        const std::size_t cell = task / static_cast<std::size_t>(config.n_u);
        const std::uint64_t rep = task % static_cast<std::size_t>(config.n_u);
        const int N = config.n_list[cell / 2];
        const bool constrained = (cell % 2) == 0;
        const RngStream rng = root.fork(kPathU).fork(cell).fork(rep);
        const Eigen::MatrixXd U =
            constrained ? sample_zero_mean_orthonormal(N, config.dim, rng)
                        : sample_orthonormal(N, config.dim, rng);
        slots[task].nu_max = U.rowwise().squaredNorm().maxCoeff();
    });

    ExperimentResult res;
    res.columns = {"n", "family", "reps", "mean_numax", "stderr_numax"};
    std::vector<double> ns, mean_con, mean_unc;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const int N = config.n_list[cell / 2];
        const bool constrained = (cell % 2) == 0;
        double sum = 0.0, sum_sq = 0.0;
        for (int r = 0; r < config.n_u; ++r) {
            const double v = slots[cell * static_cast<std::size_t>(config.n_u) +
                                   static_cast<std::size_t>(r)].nu_max;
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / config.n_u;
        const double var =
            std::max(0.0, (sum_sq - config.n_u * mean * mean) /
                              std::max(1, config.n_u - 1));
        const double se = std::sqrt(var / config.n_u);
        if (constrained) {
            ns.push_back(static_cast<double>(N));
            mean_con.push_back(mean);
        } else {
            mean_unc.push_back(mean);
        }
        res.rows.push_back({fmt_int(N),
                            constrained ? "zero_mean" : "unconstrained",
                            fmt_int(config.n_u), format_double(mean),
                            format_double(se)});
    }
    res.add_meta("numax_slope_zero_mean",
                 format_double(fit_loglog_slope(ns, mean_con)));
    res.add_meta("numax_slope_unconstrained",
                 format_double(fit_loglog_slope(ns, mean_unc)));
    return res;
}

// ---------------------------------------------------------------------------
// subgaussian: i.i.d. unit-variance covariate entries, well-specified
// responses with small noise; tracks the non-qvx fraction and the spectral
// ratio s_1/s_D as N grows.
// ---------------------------------------------------------------------------
ExperimentResult run_subgaussian(const ExperimentConfig& config) {
    const RngStream root(config.master_seed);
    const int per_cell = config.n_u * config.n_y;

    struct Slot {
        Trial trial;
        double ratio = 0.0;
    };
    const std::size_t n_cells = config.n_list.size() * config.families.size();
    std::vector<Slot> slots(n_cells * static_cast<std::size_t>(per_cell));

    parallel_for(slots.size(), config.threads, [&](std::size_t task) {
        const std::size_t cell = task / static_cast<std::size_t>(per_cell);
        const std::uint64_t t = task % static_cast<std::size_t>(per_cell);
        const int N = config.n_list[cell / config.families.size()];
        const SubgaussianFamily family = subgaussian_family_from_string(
            config.families[cell % config.families.size()]);

        const RngStream rng = root.fork(kPathU).fork(cell).fork(t);
        const Eigen::MatrixXd X =
            sample_subgaussian_X(N, config.dim, family, rng);
        Slot& slot = slots[task];
        try {
            const SvdForm svd = SvdForm::from_matrix(X);
            slot.ratio = svd.S(0) / svd.S(svd.d() - 1);
            const Eigen::VectorXd theta =
                random_unit_vector(config.dim, root.fork(kPathTheta));
            auto gen = root.fork(kPathNoise).fork(cell).fork(t).engine();
            std::normal_distribution<double> noise(0.0, std::sqrt(config.sigma2));
            Eigen::VectorXd Y = X * theta;
            for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) += noise(gen);
            slot.trial = classify_trial(svd, Y, config.grid_points);
        } catch (const Error&) {
            slot.trial.status = 2;
        }
    });

    ExperimentResult res;
    res.columns = {"n", "family", "sigma2", "mean_spectral_ratio"};
    push_count_columns(res.columns);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const int N = config.n_list[cell / config.families.size()];
        const std::string& family =
            config.families[cell % config.families.size()];
        CellCounts counts;
        double ratio_sum = 0.0;
        int ratio_n = 0;
        for (int t = 0; t < per_cell; ++t) {
            const Slot& slot =
                slots[cell * static_cast<std::size_t>(per_cell) +
                      static_cast<std::size_t>(t)];
            counts.add(slot.trial);
            if (slot.trial.status != 2) {
                ratio_sum += slot.ratio;
                ++ratio_n;
            }
        }
        std::vector<std::string> row = {
            fmt_int(N), family, format_double(config.sigma2),
            format_double(ratio_n > 0 ? ratio_sum / ratio_n : 0.0)};
        push_count_cells(row, counts);
        res.rows.push_back(std::move(row));
    }
    return res;
}

// ---------------------------------------------------------------------------
// realdata: full-set verdict, PCR rank sweep, and the random-subset search.
// Subsets are drawn from the loaded rows and re-standardized individually.
// ---------------------------------------------------------------------------
ExperimentResult run_realdata(const ExperimentConfig& config) {
    if (config.input_path.empty() || config.target_column.empty())
        throw Error("realdata experiment needs input_path and target_column");
    const RawDataset raw = load_dataset_csv(config.input_path, config.target_column);
    const RngStream root(config.master_seed);

    ExperimentResult res;
    res.columns = {"mode", "id", "n_rows", "n_cols", "non_qvx",
                   "n_minima", "rel_gap", "borderline", "error"};

    struct RowOut {
        std::string mode;
        long long id = 0;
        Eigen::Index n = 0, d = 0;
        int non_qvx = 0, n_minima = 0, borderline = 0;
        double rel_gap = 0.0;
        std::string error;
        bool flagged = false;
        LoocvCurve curve;  // only filled when flagged and curves requested
    };

    const bool want_curves = !config.curve_dir.empty();
    auto classify_into = [&](const StandardizedDataset& ds, RowOut& out) {
        out.n = ds.n();
        out.d = ds.d();
        const GridConfig grid = GridConfig::for_problem(ds.svd, config.grid_points);
        const QvxVerdict v = classify(ds.svd, ds.Y, grid);
        const MinimaCensus census = minima_census(v);
        out.non_qvx = v.is_quasiconvex ? 0 : 1;
        out.n_minima = census.count;
        out.rel_gap = std::isfinite(census.rel_gap) ? census.rel_gap : -1.0;
        out.borderline = v.borderline_minima;
        if (!v.is_quasiconvex) {
            out.flagged = true;
            if (want_curves) out.curve = compute_curve(ds.svd, ds.Y, v.grid);
        }
    };

    std::vector<RowOut> out_rows;

    // full dataset + PCR sweep
    try {
        const StandardizedDataset full = standardize(raw);
        RowOut full_row;
        full_row.mode = "full";
        classify_into(full, full_row);
        out_rows.push_back(full_row);

        std::vector<int> ranks = config.pcr_ranks;
        if (ranks.empty())
            for (int r = 1; r <= full.d(); ++r) ranks.push_back(r);
        for (int r : ranks) {
            RowOut row;
            row.mode = "pcr";
            row.id = r;
            try {
                classify_into(pcr_truncate(full, r), row);
            } catch (const Error& e) {
                row.error = e.what();
            }
            out_rows.push_back(row);
        }
    } catch (const Error& e) {
        RowOut row;
        row.mode = "full";
        row.error = e.what();
        out_rows.push_back(row);
    }

    // random subsets, re-standardized each time
    std::vector<RowOut> subset_rows(
        static_cast<std::size_t>(config.subset_count));
    parallel_for(subset_rows.size(), config.threads, [&](std::size_t i) {
        RowOut& row = subset_rows[i];
        row.mode = "subset";
        row.id = static_cast<long long>(i);
        auto gen = root.fork(kPathSubsets).fork(i).engine();
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(raw.n()));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), gen);
        const int m = std::min<int>(config.subset_size,
                                    static_cast<int>(raw.n()));
        RawDataset sub;
        sub.X.resize(m, raw.d());
        sub.Y.resize(m);
        for (int k = 0; k < m; ++k) {
            sub.X.row(k) = raw.X.row(idx[static_cast<std::size_t>(k)]);
            sub.Y(k) = raw.Y(idx[static_cast<std::size_t>(k)]);
        }
        sub.feature_names = raw.feature_names;
        try {
            classify_into(standardize(sub), row);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    out_rows.insert(out_rows.end(), subset_rows.begin(), subset_rows.end());

    long long flagged_subsets = 0;
    for (const RowOut& row : out_rows) {
        res.rows.push_back({row.mode, fmt_int(row.id), fmt_int(row.n),
                            fmt_int(row.d), fmt_int(row.non_qvx),
                            fmt_int(row.n_minima), format_double(row.rel_gap),
                            fmt_int(row.borderline), row.error});
        if (row.mode == "subset" && row.flagged) ++flagged_subsets;
        if (row.flagged && want_curves) {
            std::filesystem::create_directories(config.curve_dir);
            const std::string name = config.curve_dir + "/" + row.mode + "_" +
                                     std::to_string(row.id) + "_curve.csv";
            std::ofstream out(name);
            write_curve_csv(row.curve, out);
        }
    }
    res.add_meta("subset_count", fmt_int(config.subset_count));
    res.add_meta("flagged_subsets", fmt_int(flagged_subsets));
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult res;
    switch (config.kind) {
        case ExperimentKind::atlas: res = run_atlas(config); break;
        case ExperimentKind::delta_sweep: res = run_delta_sweep(config); break;
        case ExperimentKind::coherence: res = run_coherence(config); break;
        case ExperimentKind::residual_norm: res = run_residual_norm(config); break;
        case ExperimentKind::coherence_decay: res = run_coherence_decay(config); break;
        case ExperimentKind::subgaussian: res = run_subgaussian(config); break;
        case ExperimentKind::realdata: res = run_realdata(config); break;
    }
    ExperimentResult out;
    out.columns = res.columns;
    out.rows = std::move(res.rows);
    out.add_meta("kind", to_string(config.kind));
    out.add_meta("master_seed", std::to_string(config.master_seed));
    for (auto& kv : res.metadata) out.metadata.push_back(std::move(kv));
    return out;
}

ExperimentResult replicate_with_errorbars(const ExperimentConfig& config,
                                          int reps, bool distinct_seeds) {
    if (reps < 1) throw Error("need at least one replication");
    std::vector<ExperimentResult> runs;
    runs.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        ExperimentConfig c = config;
        if (distinct_seeds)
            c.master_seed = RngStream::mix(
                RngStream::mix(config.master_seed, kPathReplicas),
                static_cast<std::uint64_t>(r));
        runs.push_back(run_experiment(c));
    }

    const ExperimentResult& first = runs.front();
    for (const ExperimentResult& run : runs)
        if (run.columns != first.columns || run.rows.size() != first.rows.size())
            throw Error("replications produced incompatible tables");

    ExperimentResult out;
    out.add_meta("kind", to_string(config.kind));
    out.add_meta("master_seed", std::to_string(config.master_seed));
    out.add_meta("replications", std::to_string(reps));
    out.add_meta("distinct_seeds", distinct_seeds ? "1" : "0");

    // Statistic columns are aggregated as mean plus a 2-standard-deviation
    // companion; everything else is a key and must match across reps. Known
    // statistics always aggregate (so a zero-spread run still reports its
    // zero); any other column that varies across reps is treated the same.
    const std::vector<std::string> known_stats = {
        "fraction_non_qvx", "non_qvx",     "failures",
        "borderline",       "nu_max_stat", "mean_numax",
        "stderr_numax",     "mean_spectral_ratio"};
    std::vector<bool> is_key(first.columns.size(), true);
    for (std::size_t j = 0; j < first.columns.size(); ++j) {
        for (const std::string& name : known_stats)
            if (first.columns[j] == name) is_key[j] = false;
        if (!is_key[j]) continue;
        for (const ExperimentResult& run : runs) {
            for (std::size_t i = 0; i < first.rows.size(); ++i)
                if (run.rows[i][j] != first.rows[i][j]) {
                    is_key[j] = false;
                    break;
                }
            if (!is_key[j]) break;
        }
    }

    for (std::size_t j = 0; j < first.columns.size(); ++j) {
        out.columns.push_back(first.columns[j]);
        if (!is_key[j]) out.columns.push_back(first.columns[j] + "_2sd");
    }
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < first.columns.size(); ++j) {
            if (is_key[j]) {
                row.push_back(first.rows[i][j]);
                continue;
            }
            double sum = 0.0, sum_sq = 0.0;
            for (const ExperimentResult& run : runs) {
                const double v = std::strtod(run.rows[i][j].c_str(), nullptr);
                sum += v;
                sum_sq += v * v;
            }
            const double mean = sum / reps;
            const double var = reps > 1
                ? std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1))
                : 0.0;
            row.push_back(format_double(mean));
            row.push_back(format_double(2.0 * std::sqrt(var)));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

void write_result_csv(const ExperimentResult& result, std::ostream& out) {
    for (const auto& [k, v] : result.metadata) out << "# " << k << "=" << v << "\n";
    for (std::size_t j = 0; j < result.columns.size(); ++j)
        out << (j ? "," : "") << result.columns[j];
    out << "\n";
    for (const auto& row : result.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << row[j];
        out << "\n";
    }
}

std::string manifest_json(const ExperimentConfig& config,
                          const ExperimentResult& result, double wall_seconds) {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    nlohmann::json j;
    j["kind"] = to_string(config.kind);
    j["config_hash"] = hash_hex;
    j["master_seed"] = config.master_seed;
    j["threads"] = config.threads;
    j["paper_scale"] = config.paper_scale;
    j["wall_time_s"] = wall_seconds;
    j["rows"] = result.rows.size();
    j["library_version"] = kVersion;
    return j.dump(2);
}

}  // namespace ridgecv
