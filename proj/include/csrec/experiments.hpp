#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace csrec {

// Flat key=value configuration shared by every subcommand. Defaults are
// per-experiment (default_config); a config file and flag overrides are
// layered on top via set_key. Unknown keys are rejected.
struct ExperimentConfig {
    std::string experiment;           // recover | sweep-m | sweep-n | noise | bounds | modelcheck
    std::size_t n = 1024;             // signal length
    std::size_t k = 26;               // model sparsity (blocks for block model)
    std::size_t j = 64;               // block length
    std::size_t m = 80;               // measurement count (recover)
    std::vector<double> grid;         // sweep-m: M/K multiples; bounds: K values
    std::vector<std::size_t> n_grid;  // sweep-n signal lengths
    std::vector<double> sigma_grid;   // noise standard deviations
    std::string model = "tree";       // plain | tree | block
    std::string signal;               // heavisine | piecewise | tree-random |
                                      // block-random | block-compressible
    std::string algorithms;           // comma list over {model,plain}-{cosamp,iht}
    std::size_t trials = 1;
    std::size_t max_iters = 50;
    std::size_t attempts = 5;         // sweep-n recoveries per probed M
    double target_factor = 2.5;       // sweep-n target multiplier on sigma_K
    double s = 1.0;                   // decay exponent for compressible signals
    double delta = 0.1;               // bounds: RIP target
    double eps = 0.1;                 // bounds: amplification slack
    double r = 0.5;                   // bounds: regularity exponent
    double t = 1.0;                   // bounds: log-probability slack
    double c = 1.0;                   // bounds: absolute constant
    double ensemble_scale = 0.0;      // Phi multiplier for IHT; 0 = automatic
    bool timing = true;               // false zeroes wall_time_s columns
    std::uint64_t seed = 1;
    std::string out;                  // CSV destination; empty = stdout
    std::string signal_out;           // recover: side CSV with recovered signals
};

ExperimentConfig default_config(const std::string& experiment);

// Applies one key=value pair; throws std::invalid_argument on unknown keys
// or unparseable values.
void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Line-oriented key=value file, '#' starts a comment. A contained
// experiment= key must agree with cfg.experiment.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

void validate_config(const ExperimentConfig& cfg);

extern const char* const kResultHeader;  // fixed result-CSV header
extern const char* const kBoundsHeader;  // fixed bounds-CSV header

// Multiplier on a unit-variance/M Gaussian ensemble that places the
// expected spectral norm of 3K-column submatrices at sqrt(2), the edge of
// the unit-step IHT contraction region.
double iht_ensemble_scale(std::size_t m, std::size_t k);

// Each command returns the full CSV text (header + rows). Rows appear in
// deterministic order: per-trial rows first in loop order, aggregate rows
// (trial = -1) last. (config, seed) determines the bytes exactly when
// timing is off.
std::string cmd_recover(const ExperimentConfig& cfg);
std::string cmd_sweep_m(const ExperimentConfig& cfg);
std::string cmd_sweep_n(const ExperimentConfig& cfg);
std::string cmd_noise(const ExperimentConfig& cfg);
std::string cmd_bounds(const ExperimentConfig& cfg);

struct ModelCheckResult {
    std::string report;
    bool ok = false;
};

// Oracle-equivalence and invariant suite behind the modelcheck subcommand:
// CSSA vs exhaustive subtree search (N=16), block approximation vs
// exhaustive block subsets, Catalan subtree counts, count-vs-bound,
// transform round-trip, admissibility of model approximations.
ModelCheckResult run_modelcheck(std::size_t vectors_per_case, std::uint64_t seed);

// Dispatch on cfg.experiment (modelcheck renders its report as text).
std::string run_experiment(const ExperimentConfig& cfg);

}  // namespace csrec
