// bsn: binary-derivative sensor network simulator and estimator harness.
//
// Subcommands:
//   simulate     emit per-period sign reports and the counter field as CSV
//   estimate-cv  batch velocity estimate (SVM or PPR), JSON result
//   track        online tracker over a simulated run, track-log CSV
//   bench        Monte Carlo sweep, MSE CSV
//
// Exit codes: 0 success, 2 invalid configuration, 3 run/estimator failure.
// Errors go to stderr as one-line JSON records.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsn/analysis.hpp"
#include "bsn/io.hpp"
#include "bsn/scenario_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<long> reps;
    std::optional<std::string> estimator;
};

void emit_error(const std::string& code, const std::string& field, const std::string& message) {
    json err{{"error", {{"code", code}, {"message", message}}}};
    if (!field.empty()) err["error"]["field"] = field;
    std::cerr << err.dump() << "\n";
}

// Seed priority: --seed flag, then the config file, then BT_SEED, then 0.
std::uint64_t resolve_seed(const CliArgs& args, const bsn::LoadedScenario& loaded) {
    if (args.seed) return *args.seed;
    if (loaded.seed_in_file) return loaded.config.seed;
    if (const char* env = std::getenv("BT_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return 0;
}

int run_simulate(const bsn::ScenarioConfig& cfg, std::uint64_t config_hash, const fs::path& out) {
    const bsn::Rng rng(cfg.seed);
    const auto field = bsn::sample_field(cfg.field.n, cfg.field.bounds, rng.derive("field"));
    const auto run = bsn::simulate_run(field, cfg.motion, cfg.observation, rng);
    bsn::write_snapshot_csv((out / "snapshots.csv").string(), field, run.snapshots, config_hash,
                            cfg.seed);
    bsn::write_counters_csv((out / "counters.csv").string(), field, run.counters, config_hash,
                            cfg.seed);
    return 0;
}

int run_estimate_cv(const bsn::ScenarioConfig& cfg, std::uint64_t config_hash,
                    const fs::path& out) {
    const bsn::Rng rng(cfg.seed);
    const auto field = bsn::sample_field(cfg.field.n, cfg.field.bounds, rng.derive("field"));
    const auto run = bsn::simulate_run(field, cfg.motion, cfg.observation, rng);
    const auto est = bsn::estimate_cv(field, run, cfg.estimator, cfg.observation.period);

    json result{
        {"method", bsn::to_string(est.method)},
        {"direction", {{"x", est.direction.x}, {"y", est.direction.y}}},
        {"angle_rad", std::atan2(est.direction.y, est.direction.x)},
        {"speed", est.speed ? json(*est.speed) : json(nullptr)},
        {"degraded", est.degraded},
        {"seed", cfg.seed},
        {"config_hash", bsn::format_hash(config_hash)},
    };
    const std::string text = result.dump(2) + "\n";
    std::ofstream file(out / "estimate.json", std::ios::binary);
    file << text;
    std::cout << text;
    return 0;
}

int run_track(const bsn::ScenarioConfig& cfg, std::uint64_t config_hash, const fs::path& out) {
    const bsn::Rng rng(cfg.seed);
    const auto field = bsn::sample_field(cfg.field.n, cfg.field.bounds, rng.derive("field"));
    const auto run = bsn::simulate_run(field, cfg.motion, cfg.observation, rng);
    const auto tracking = bsn::run_tracker(field, run, cfg.estimator, rng, cfg.observation.period);
    bsn::write_track_csv((out / "track.csv").string(), tracking, config_hash, cfg.seed);
    return 0;
}

int run_bench(const bsn::ScenarioConfig& cfg, std::uint64_t config_hash, const fs::path& out) {
    if (std::holds_alternative<bsn::GaussianRandomWalk>(cfg.motion)) {
        const auto res = bsn::run_monte_carlo_tracking(cfg, cfg.reps, cfg.seed);
        bsn::write_mse_csv((out / "mse.csv").string(), res.curve, cfg.observation.period,
                           config_hash, cfg.seed);
    } else {
        const auto pts =
            bsn::run_monte_carlo_batch(cfg, cfg.estimator.method, cfg.reps, cfg.seed);
        bsn::write_mse_csv((out / "mse.csv").string(), pts, config_hash, cfg.seed);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary-derivative sensor network toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // accept global options after the subcommand name

    CliArgs args;
    app.add_option("--config", args.config_path, "scenario config (JSON)")->required();
    app.add_option("--seed", args.seed, "override the scenario seed");
    app.add_option("--out", args.out_dir, "output directory");
    app.add_option("--reps", args.reps, "bench replications override");
    app.add_option("--estimator", args.estimator, "estimator: svm2d|svm3d|svm2p|ppr");

    auto* cmd_simulate = app.add_subcommand("simulate", "emit sign/counter CSVs");
    auto* cmd_estimate = app.add_subcommand("estimate-cv", "batch velocity estimate, JSON");
    auto* cmd_track = app.add_subcommand("track", "online tracker, track-log CSV");
    auto* cmd_bench = app.add_subcommand("bench", "Monte Carlo sweep, MSE CSV");

    CLI11_PARSE(app, argc, argv);

    bsn::LoadedScenario loaded;
    try {
        loaded = bsn::load_scenario(args.config_path);
        if (args.estimator)
            loaded.config.estimator.method = bsn::detail::parse_method(*args.estimator, "--estimator");
        if (args.reps) {
            if (*args.reps < 1) throw bsn::ConfigError("--reps", "must be >= 1");
            loaded.config.reps = *args.reps;
        }
    } catch (const bsn::ConfigError& e) {
        emit_error("config", e.field, e.what());
        return 2;
    }
    loaded.config.seed = resolve_seed(args, loaded);
    if (args.out_dir) loaded.config.out_dir = *args.out_dir;

    fs::path out(loaded.config.out_dir);
    try {
        fs::create_directories(out);
        if (cmd_simulate->parsed()) return run_simulate(loaded.config, loaded.config_hash, out);
        if (cmd_estimate->parsed()) return run_estimate_cv(loaded.config, loaded.config_hash, out);
        if (cmd_track->parsed()) return run_track(loaded.config, loaded.config_hash, out);
        if (cmd_bench->parsed()) return run_bench(loaded.config, loaded.config_hash, out);
    } catch (const std::exception& e) {
        emit_error("estimator", "", e.what());
        return 3;
    }
    return 0;
}
