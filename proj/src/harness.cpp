#include "mmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mmab/algo_rsdgt.hpp"
#include "mmab/algo_sicgt.hpp"
#include "mmab/algo_statistic.hpp"

namespace mmab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::vector<double> parse_means(const RunConfig& cfg) {
    const auto parts = split(cfg.means_spec, ':');
    if (parts.empty()) throw std::invalid_argument("config.means: empty");
    if (parts[0] == "uniform-gaps") {
        if (parts.size() != 3) throw std::invalid_argument("config.means: uniform-gaps:hi:lo");
        const double hi = std::stod(parts[1]);
        const double lo = std::stod(parts[2]);
        std::vector<double> mu(static_cast<std::size_t>(cfg.num_arms));
        for (int k = 0; k < cfg.num_arms; ++k) {
            mu[static_cast<std::size_t>(k)] =
                cfg.num_arms == 1 ? hi : hi - (hi - lo) * k / (cfg.num_arms - 1);
        }
        return mu;
    }
    if (parts[0] == "random") {
        if (parts.size() != 3 || parts[1] != "min-gap") {
            throw std::invalid_argument("config.means: random:min-gap:g");
        }
        const double gap = std::stod(parts[2]);
        if (gap * (cfg.num_arms - 1) >= 0.9) {
            throw std::invalid_argument("config.means: min-gap infeasible for K");
        }
        Rng rng = Rng::substream(cfg.seeds.empty() ? 0 : cfg.seeds.front(), "means");
        std::vector<double> mu;
        for (int attempt = 0; attempt < 100000; ++attempt) {
            mu.clear();
            for (int k = 0; k < cfg.num_arms; ++k) mu.push_back(0.05 + 0.9 * rng.uniform01());
            std::vector<double> sorted(mu);
            std::sort(sorted.begin(), sorted.end());
            bool ok = true;
            for (std::size_t i = 1; i < sorted.size(); ++i) {
                if (sorted[i] - sorted[i - 1] < gap) ok = false;
            }
            if (ok) return mu;
        }
        throw std::runtime_error("config.means: could not sample means with the requested gap");
    }
    std::vector<double> mu;
    for (const auto& p : split(cfg.means_spec, ',')) mu.push_back(std::stod(p));
    return mu;
}

} // namespace

Sensing RunConfig::effective_sensing() const {
    if (sensing) return *sensing;
    return algo == "selfish-robust-mmab" ? Sensing::StatisticSensing : Sensing::FullSensing;
}

void RunConfig::validate() const {
    if (algo != "selfish-robust-mmab" && algo != "sic-gt" && algo != "rsd-gt") {
        throw std::invalid_argument("config.algo: unknown algorithm '" + algo + "'");
    }
    if (num_arms < 1) throw std::invalid_argument("config.K: must be positive");
    if (num_players < 1 || num_players > num_arms) {
        throw std::invalid_argument("config.M: requires 1 <= M <= K");
    }
    if (horizon < 2) throw std::invalid_argument("config.T: must be at least 2");
    if (means_spec.empty()) throw std::invalid_argument("config.means: required");
    if (seeds.empty()) throw std::invalid_argument("config.seeds: at least one seed required");
    if (beta <= 0) throw std::invalid_argument("config.beta: must be positive");
    const Sensing s = effective_sensing();
    if (algo == "selfish-robust-mmab" && s == Sensing::NoSensing) {
        throw std::invalid_argument("config.sensing: selfish-robust-mmab needs arm values");
    }
    if ((algo == "sic-gt" || algo == "rsd-gt") && s != Sensing::FullSensing) {
        throw std::invalid_argument("config.sensing: " + algo + " requires full sensing");
    }
    if (algo == "sic-gt" && num_players < 3) {
        throw std::invalid_argument("config.M: sic-gt requires M >= 3");
    }
    if (algo == "rsd-gt") {
        if (num_players >= num_arms) {
            throw std::invalid_argument("config.M: rsd-gt requires M < K");
        }
        if (!rsd_punish_feasible(num_arms, num_players, delta)) {
            throw std::invalid_argument(
                "config.delta: punishment infeasible, needs ((1+d)/(1-d))^2 (1-1/K)^(M-1) < 1");
        }
    }
    if (delta > 0.0 && algo != "rsd-gt") {
        throw std::invalid_argument("config.delta: heterogeneous means require rsd-gt");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("config.delta: must lie in [0,1)");
    }
}

std::vector<long> RunConfig::checkpoint_rounds() const {
    std::vector<long> out;
    if (checkpoints == "pow2") {
        for (long t = 1; t < horizon; t *= 2) out.push_back(t);
        out.push_back(horizon);
    } else if (checkpoints.rfind("linear:", 0) == 0) {
        const long n = std::stol(checkpoints.substr(7));
        for (long i = 1; i <= n; ++i) out.push_back(horizon * i / n);
    } else {
        for (const auto& p : split(checkpoints, ',')) out.push_back(std::stol(p));
        std::sort(out.begin(), out.end());
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (long t : out) {
        if (t < 1 || t > horizon) {
            throw std::invalid_argument("config.checkpoints: rounds must lie in [1, T]");
        }
    }
    return out;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "algo") cfg.algo = val;
        else if (key == "K") cfg.num_arms = std::stoi(val);
        else if (key == "M") cfg.num_players = std::stoi(val);
        else if (key == "T") cfg.horizon = std::stol(val);
        else if (key == "means") cfg.means_spec = val;
        else if (key == "delta") cfg.delta = std::stod(val);
        else if (key == "adversary") cfg.adversary = val;
        else if (key == "checkpoints") cfg.checkpoints = val;
        else if (key == "out") cfg.out_path = val;
        else if (key == "beta") cfg.beta = std::stod(val);
        else if (key == "threads") cfg.threads = std::stoi(val);
        else if (key == "sensing") {
            if (val == "full") cfg.sensing = Sensing::FullSensing;
            else if (val == "statistic") cfg.sensing = Sensing::StatisticSensing;
            else if (val == "none") cfg.sensing = Sensing::NoSensing;
            else throw std::invalid_argument("config.sensing: unknown value " + val);
        } else if (key == "seeds") {
            for (const auto& s : split(val, ',')) cfg.seeds.push_back(std::stoull(s));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

EnvModel build_env(const RunConfig& config) {
    const std::vector<double> means = parse_means(config);
    if (static_cast<int>(means.size()) != config.num_arms) {
        throw std::invalid_argument("config.means: expected K entries");
    }
    if (config.delta > 0.0) {
        Rng rng = Rng::substream(config.seeds.empty() ? 0 : config.seeds.front(), "het");
        std::vector<std::vector<double>> mult(static_cast<std::size_t>(config.num_players));
        for (auto& row : mult) {
            row.resize(static_cast<std::size_t>(config.num_arms));
            for (auto& f : row) f = 1.0 - config.delta + 2.0 * config.delta * rng.uniform01();
        }
        return EnvModel::heterogeneous(config.num_arms, config.num_players, config.horizon, means,
                                       config.delta, mult, config.effective_sensing());
    }
    return EnvModel::homogeneous(config.num_arms, config.num_players, config.horizon, means,
                                 config.effective_sensing());
}

SeedOutcome run_seed(const RunConfig& config, const EnvModel& env, std::uint64_t seed) {
    std::vector<std::unique_ptr<Player>> players;
    const int adversary_slot = config.adversary ? config.num_players - 1 : -1;
    for (int j = 0; j < config.num_players; ++j) {
        Rng rng = Rng::substream(seed, "player", static_cast<std::uint64_t>(j));
        if (j == adversary_slot) {
            players.push_back(make_adversary(AdversarySpec::parse(*config.adversary), config.algo,
                                             env, j, config.beta, rng));
        } else if (config.algo == "selfish-robust-mmab") {
            players.push_back(std::make_unique<SelfishRobustMmab>(
                SelfishRobustMmabConfig{config.num_arms, config.horizon, config.beta}, rng));
        } else if (config.algo == "sic-gt") {
            players.push_back(std::make_unique<SicGtPlayer>(
                SicGtPlayer::Config{config.num_arms, config.horizon}, rng));
        } else {
            players.push_back(std::make_unique<RsdGtPlayer>(
                RsdGtPlayer::Config{config.num_arms, config.horizon, config.delta}, rng));
        }
    }

    SeedOutcome out;
    out.seed = seed;
    const std::vector<long> cps = config.checkpoint_rounds();
    out.result = run_game(env, players, seed, cps);
    if (env.heterogeneous()) {
        const RsdBenchmark bench = rsd_welfare_exact(env.player_means);
        out.trajectory = rsd_regret(out.result, env, bench, cps);
    } else {
        out.trajectory = pseudo_regret(out.result, env, cps);
    }
    for (const RunEvent& e : out.result.events) {
        if (e.kind == EventKind::PunishTriggered) {
            out.punish_round = e.round;
            break;
        }
    }
    out.final_phase = players.front()->phase_name();
    return out;
}

BatchResult run_batch(const RunConfig& config) {
    config.validate();
    BatchResult batch;
    batch.config = config;
    batch.env = build_env(config);

    batch.outcomes.resize(config.seeds.size());
    const int workers = std::max(1, config.threads);
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= config.seeds.size()) return;
            batch.outcomes[i] = run_seed(config, batch.env, config.seeds[i]);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return batch;
}

void write_csv(const BatchResult& batch, std::ostream& os) {
    const int M = batch.config.num_players;
    os << "run_id,seed,algo,K,M,T,t,cum_regret,punish_round,phase";
    for (int j = 0; j < M; ++j) os << ",rew_" << j;
    os << "\n";
    long run_id = 0;
    for (const SeedOutcome& oc : batch.outcomes) {
        for (std::size_t c = 0; c < oc.trajectory.checkpoints.size(); ++c) {
            os << run_id << ',' << oc.seed << ',' << batch.config.algo << ','
               << batch.config.num_arms << ',' << M << ',' << batch.config.horizon << ','
               << oc.trajectory.checkpoints[c] << ',' << format_double(oc.trajectory.cum_regret[c])
               << ',' << oc.punish_round << ','
               << (c < oc.result.phase_at.size() ? oc.result.phase_at[c] : oc.final_phase);
            for (int j = 0; j < M; ++j) {
                os << ',' << format_double(oc.trajectory.per_player_expected[c][static_cast<std::size_t>(j)]);
            }
            os << "\n";
        }
        run_id += 1;
    }
}

void write_summary_json(const BatchResult& batch, std::ostream& os) {
    nlohmann::ordered_json j;
    j["algo"] = batch.config.algo;
    j["K"] = batch.config.num_arms;
    j["M"] = batch.config.num_players;
    j["T"] = batch.config.horizon;
    j["means"] = batch.env.means;
    j["delta"] = batch.config.delta;
    j["sensing"] = to_string(batch.config.effective_sensing());
    j["adversary"] = batch.config.adversary ? *batch.config.adversary : "none";
    j["seeds"] = batch.config.seeds;

    const std::vector<long> cps = batch.config.checkpoint_rounds();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < cps.size(); ++c) {
        double mean = 0.0;
        for (const auto& oc : batch.outcomes) mean += oc.trajectory.cum_regret[c];
        mean /= static_cast<double>(batch.outcomes.size());
        double var = 0.0;
        for (const auto& oc : batch.outcomes) {
            const double d = oc.trajectory.cum_regret[c] - mean;
            var += d * d;
        }
        var = batch.outcomes.size() > 1 ? var / static_cast<double>(batch.outcomes.size() - 1)
                                        : 0.0;
        rows.push_back({{"t", cps[c]}, {"regret_mean", mean}, {"regret_std", std::sqrt(var)}});
    }
    j["regret"] = rows;

    long punished = 0;
    for (const auto& oc : batch.outcomes) {
        if (oc.punish_round >= 0) punished += 1;
    }
    j["punish_rate"] = static_cast<double>(punished) / static_cast<double>(batch.outcomes.size());

    std::vector<double> reward_mean(static_cast<std::size_t>(batch.config.num_players), 0.0);
    for (const auto& oc : batch.outcomes) {
        for (std::size_t p = 0; p < reward_mean.size(); ++p) {
            reward_mean[p] += oc.result.cum_reward[p];
        }
    }
    for (double& r : reward_mean) r /= static_cast<double>(batch.outcomes.size());
    j["reward_mean"] = reward_mean;

    os << j.dump(2) << "\n";
}

int run_batch_to_files(const RunConfig& config) {
    const BatchResult batch = run_batch(config);
    const std::string base = config.out_path.empty() ? "mmab_run" : config.out_path;
    {
        std::ofstream csv(base + ".csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot open output file " + base + ".csv");
        write_csv(batch, csv);
    }
    {
        std::ofstream js(base + ".json", std::ios::binary);
        write_summary_json(batch, js);
    }
    return 0;
}

} // namespace mmab
