#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ridgecv/rng.hpp"

namespace ridgecv {

enum class ExperimentKind {
    atlas,            // N=3, D=2 quasiconvexity map over (U, Y) angles
    delta_sweep,      // fraction non-qvx vs spectrum distance from uniform
    coherence,        // assumption-satisfying vs zero-padded U families
    residual_norm,    // fraction non-qvx vs residual norm, boundary per N
    coherence_decay,  // nu_max decay, zero-mean vs unconstrained sampling
    subgaussian,      // i.i.d. covariate families, spectral ratio and fraction
    realdata,         // CSV pipeline: PCR rank sweep + random subset search
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

// Seeded sweep specification. Defaults are desk-scale versions of the
// reference counts (minutes, not hours); paper_scale restores full counts.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::delta_sweep;

    std::vector<int> n_list;
    int dim = 5;
    int n0 = 8;   // nonzero block height of the degenerate family
    int n_u = 20; // U draws per cell
    int n_y = 20; // response/residual draws per U
    double sigma2 = 0.5;

    std::vector<double> alphas;       // delta_sweep spectrum exponents
    std::vector<double> atlas_s2;     // atlas panels: second singular value
    int atlas_points = 100;           // atlas grid size per circle
    std::vector<double> residual_nus; // residual norms
    std::vector<std::string> families;

    int grid_points = 400;
    std::uint64_t master_seed = 1729;
    int threads = 1;
    bool paper_scale = false;

    // realdata
    std::string input_path;
    std::string target_column;
    std::vector<int> pcr_ranks; // empty = all ranks 1..D
    int subset_size = 50;
    int subset_count = 400;
    std::string curve_dir;      // non-empty: write curves of flagged subsets

    static ExperimentConfig defaults(ExperimentKind kind, bool paper_scale = false);
    std::string canonical_string() const;
};

std::uint64_t config_hash(const ExperimentConfig& config);

// Tabular outcome. Cells are preformatted so CSV output is byte-stable;
// metadata holds per-run summaries (boundaries, slopes, fractions) and never
// anything volatile like wall time.
struct ExperimentResult {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    int col(const std::string& name) const;
    double num(std::size_t row, const std::string& name) const;
    const std::string& cell(std::size_t row, const std::string& name) const;
    void add_meta(const std::string& key, const std::string& value);
    const std::string* find_meta(const std::string& key) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentResult run_atlas(const ExperimentConfig& config);
ExperimentResult run_delta_sweep(const ExperimentConfig& config);
ExperimentResult run_coherence(const ExperimentConfig& config);
ExperimentResult run_residual_norm(const ExperimentConfig& config);
ExperimentResult run_coherence_decay(const ExperimentConfig& config);
ExperimentResult run_subgaussian(const ExperimentConfig& config);
ExperimentResult run_realdata(const ExperimentConfig& config);

// Repeats the experiment with derived seeds and aggregates: columns whose
// values vary across repetitions become mean plus a `_2sd` companion (twice
// the sample standard deviation); identical columns pass through.
// distinct_seeds=false reuses the master seed, which must give zero spread.
ExperimentResult replicate_with_errorbars(const ExperimentConfig& config,
                                          int reps = 5,
                                          bool distinct_seeds = true);

void write_result_csv(const ExperimentResult& result, std::ostream& out);

std::string manifest_json(const ExperimentConfig& config,
                          const ExperimentResult& result, double wall_seconds);

}  // namespace ridgecv
