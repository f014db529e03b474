#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmab/adversary.hpp"
#include "mmab/env.hpp"
#include "mmab/metrics.hpp"
#include "mmab/runner.hpp"

namespace mmab {

struct RunConfig {
    std::string algo = "sic-gt"; // selfish-robust-mmab | sic-gt | rsd-gt
    int num_arms = 0;
    int num_players = 0;
    long horizon = 0;
    std::string means_spec;                 // "0.9,0.8,..." | "uniform-gaps:hi:lo" | "random:min-gap:g"
    double delta = 0.0;                     // > 0 selects the heterogeneous model
    std::optional<Sensing> sensing;         // override; defaults per algorithm
    std::optional<std::string> adversary;   // adversary spec text; replaces the last player
    std::vector<std::uint64_t> seeds;
    std::string checkpoints = "pow2";       // "pow2" | "linear:<n>" | comma list
    std::string out_path;                   // CSV path; JSON summary lands next to it
    double beta = 39.0;
    int threads = 1;

    void validate() const;                  // throws with the offending field named
    Sensing effective_sensing() const;
    std::vector<long> checkpoint_rounds() const;

    // Simple nested key=value file; later command-line flags override.
    static RunConfig from_file(const std::string& path);
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    RunResult result;
    RegretTrajectory trajectory;
    long punish_round = -1;
    std::string final_phase;
};

struct BatchResult {
    RunConfig config;
    EnvModel env;
    std::vector<SeedOutcome> outcomes; // ordered by position in config.seeds
};

// Builds the environment named by the config (means generators are seeded
// from the first seed so a config is fully self-describing).
EnvModel build_env(const RunConfig& config);

// One full run: cooperative players plus the configured adversary in the
// last slot.
SeedOutcome run_seed(const RunConfig& config, const EnvModel& env, std::uint64_t seed);

// All seeds, optionally on a worker pool; outcomes are merged back in seed
// order so parallel and sequential execution emit identical bytes.
BatchResult run_batch(const RunConfig& config);

void write_csv(const BatchResult& batch, std::ostream& os);
void write_summary_json(const BatchResult& batch, std::ostream& os);

// Executes run_batch and writes <out>.csv / <out>.json per the config.
int run_batch_to_files(const RunConfig& config);

} // namespace mmab
