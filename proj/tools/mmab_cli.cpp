// Command-line front end: seeded experiment batches (run), the acceptance
// matrix (bench), and RSD welfare benchmarks (rsd-benchmark).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mmab/acceptance.hpp"
#include "mmab/harness.hpp"
#include "mmab/metrics.hpp"

namespace {

std::vector<std::vector<double>> read_means_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open means file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(row);
    }
    if (rows.empty()) throw std::invalid_argument("means file is empty");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) {
            throw std::invalid_argument("means file rows must have equal length");
        }
    }
    return rows;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multiplayer bandit simulator"};
    app.require_subcommand(1);

    mmab::RunConfig cfg;
    std::string config_file;
    std::string sensing_flag;
    std::string adversary_flag;
    std::string seeds_flag;
    long seed_count = 0;
    std::uint64_t seed_base = 1;

    auto* run = app.add_subcommand("run", "run a seeded experiment batch");
    run->add_option("--config", config_file, "config file (key = value lines; flags override)");
    run->add_option("--algo", cfg.algo, "selfish-robust-mmab | sic-gt | rsd-gt");
    run->add_option("--K", cfg.num_arms, "number of arms");
    run->add_option("--M", cfg.num_players, "number of players");
    run->add_option("--T", cfg.horizon, "horizon");
    run->add_option("--means", cfg.means_spec,
                    "comma list, uniform-gaps:hi:lo, or random:min-gap:g");
    run->add_option("--delta", cfg.delta, "heterogeneity level (rsd-gt)");
    run->add_option("--sensing", sensing_flag, "full | statistic | none");
    run->add_option("--adversary", adversary_flag,
                    "adversary spec, e.g. best-arm-committer or stat-liar:arm=2,v1=1,v2=0");
    run->add_option("--seeds", seeds_flag, "explicit comma list of seeds");
    run->add_option("--seed-count", seed_count, "number of consecutive seeds");
    run->add_option("--seed-base", seed_base, "first seed when using --seed-count");
    run->add_option("--checkpoints", cfg.checkpoints, "pow2 | linear:<n> | comma list");
    run->add_option("--beta", cfg.beta, "EstimateM constant override");
    run->add_option("--threads", cfg.threads, "worker pool size");
    run->add_option("--out", cfg.out_path, "output basename (.csv/.json appended)");

    int bench_threads = 2;
    std::string suite = "acceptance";
    auto* bench = app.add_subcommand("bench", "run a benchmark suite");
    bench->add_option("--suite", suite, "suite name (acceptance)");
    bench->add_option("--threads", bench_threads, "worker pool size");

    std::string means_file;
    long mc_samples = 0;
    auto* rsdb = app.add_subcommand("rsd-benchmark", "print RSD welfare for a means matrix");
    rsdb->add_option("--means-file", means_file, "whitespace matrix, one row per player")
        ->required();
    rsdb->add_option("--mc", mc_samples, "Monte Carlo sample count (0 = exact)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            mmab::RunConfig base =
                config_file.empty() ? mmab::RunConfig{} : mmab::RunConfig::from_file(config_file);
            // Flags override file values wherever given.
            if (run->count("--algo")) base.algo = cfg.algo;
            if (run->count("--K")) base.num_arms = cfg.num_arms;
            if (run->count("--M")) base.num_players = cfg.num_players;
            if (run->count("--T")) base.horizon = cfg.horizon;
            if (run->count("--means")) base.means_spec = cfg.means_spec;
            if (run->count("--delta")) base.delta = cfg.delta;
            if (run->count("--checkpoints")) base.checkpoints = cfg.checkpoints;
            if (run->count("--beta")) base.beta = cfg.beta;
            if (run->count("--threads")) base.threads = cfg.threads;
            if (run->count("--out")) base.out_path = cfg.out_path;
            if (!sensing_flag.empty()) {
                if (sensing_flag == "full") base.sensing = mmab::Sensing::FullSensing;
                else if (sensing_flag == "statistic") base.sensing = mmab::Sensing::StatisticSensing;
                else if (sensing_flag == "none") base.sensing = mmab::Sensing::NoSensing;
                else throw std::invalid_argument("config.sensing: unknown value " + sensing_flag);
            }
            if (!adversary_flag.empty()) base.adversary = adversary_flag;
            if (!seeds_flag.empty()) {
                base.seeds.clear();
                std::stringstream ss(seeds_flag);
                std::string item;
                while (std::getline(ss, item, ',')) base.seeds.push_back(std::stoull(item));
            } else if (seed_count > 0) {
                base.seeds.clear();
                for (long i = 0; i < seed_count; ++i) {
                    base.seeds.push_back(seed_base + static_cast<std::uint64_t>(i));
                }
            }
            base.validate();
            // MMAB_LOG is the only environment knob: "debug" echoes the run.
            const char* log = std::getenv("MMAB_LOG");
            if (log && std::string_view(log) == "debug") {
                std::cerr << "run: algo=" << base.algo << " K=" << base.num_arms
                          << " M=" << base.num_players << " T=" << base.horizon << " seeds="
                          << base.seeds.size() << " adversary="
                          << (base.adversary ? *base.adversary : "none") << "\n";
            }
            return mmab::run_batch_to_files(base);
        }
        if (bench->parsed()) {
            if (suite != "acceptance") {
                std::cerr << "unknown suite '" << suite << "'\n";
                return 2;
            }
            const auto results = mmab::acceptance::run_all(std::cout, bench_threads);
            return mmab::acceptance::all_passed(results) ? 0 : 1;
        }
        if (rsdb->parsed()) {
            const auto means = read_means_file(means_file);
            if (mc_samples > 0) {
                mmab::Rng rng(12345);
                const auto bench_mc = mmab::rsd_welfare_monte_carlo(means, mc_samples, rng);
                std::cout << "rsd_welfare_mc " << bench_mc.expected_welfare << "\n";
            } else {
                const auto bench_exact = mmab::rsd_welfare_exact(means);
                std::cout << "rsd_welfare_exact " << bench_exact.expected_welfare << "\n";
                for (std::size_t j = 0; j < bench_exact.per_player.size(); ++j) {
                    std::cout << "player_" << j << " " << bench_exact.per_player[j] << "\n";
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
