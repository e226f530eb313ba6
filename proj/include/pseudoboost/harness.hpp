#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "distributions.hpp"
#include "losses.hpp"

namespace pseudoboost {

using ordered_json = nlohmann::ordered_json;

enum class ScheduleKind { Practical, Theorem };

// Self-training stage tunables.  Unset optionals mean "auto":
//   eta        -> 0.1 / dimension
//   sigma      -> max(R, ||mu||)
//   batch_size -> ceil(batch_constant * ln(2/delta) / epsilon)
struct SelfTrainSettings {
    std::optional<double> eta;
    std::optional<double> sigma;
    std::optional<std::int64_t> batch_size;
    std::int64_t iterations = 2000;
    double theta0_deg = 20.0;               // initial angle to mu, degrees in [0, 180]
    std::optional<std::string> beta0_file;  // overrides theta0_deg when set
    int err_mc_samples = 10000;
    double batch_constant = 2.0;
};

// Supervised (pseudolabeler) stage tunables, desk-scale defaults.
struct SupervisedSettings {
    double eta = 0.01;
    std::int64_t iterations = 2000;
    int runs = 4;
    int validation_size = 200;
    double handoff_threshold = 0.25;  // pipeline aborts above this oracle error
    double target_err = 0.05;         // per-trial pass target for the supervised command
};

struct ExperimentConfig {
    int dimension = 20;
    double mu_norm = 2.0;
    bool random_mu_direction = false;  // key "mu_direction": "e1" | "random"
    NoiseSpec noise = NoiseSpec::gaussian();
    LossSpec loss = LossSpec::logistic();
    std::uint64_t seed = 1;
    int trials = 20;
    double epsilon = 0.02;           // target excess error over err(mu_bar)
    double delta = 0.01;             // failure probability used by schedules
    double min_pass_fraction = 0.9;  // summary passes iff pass_count/trials >= this
    SelfTrainSettings selftrain;
    SupervisedSettings supervised;
};

// Config file I/O: strict JSON, unknown keys rejected, "auto" kept verbatim.
ExperimentConfig parse_config(const ordered_json& j);
ExperimentConfig load_config_file(const std::string& path);
ordered_json serialize_config(const ExperimentConfig& cfg);

struct RunOptions {
    std::string out_dir = "out";
    int jobs = 1;
    int stride = 1;                                    // CSV row subsampling
    ScheduleKind schedule = ScheduleKind::Practical;
    std::string which = "all";                         // verify selector
    std::uint64_t verify_seed = 1;
};

struct CommandResult {
    int exit_code = 0;       // 0 pass, 1 target/check failure, 2 config/usage error
    ordered_json document;   // summary.json / report.json content
};

CommandResult run_selftrain(const ExperimentConfig& cfg, const RunOptions& opt);
CommandResult run_supervised(const ExperimentConfig& cfg, const RunOptions& opt);
CommandResult run_pipeline(const ExperimentConfig& cfg, const RunOptions& opt);
CommandResult run_verify(const RunOptions& opt);

// Full CLI: subcommands selftrain | supervised | pipeline | verify with flags
// --config, --out, --seed, --jobs, --stride, --schedule, --which.  The
// PSEUDOBOOST_SEED environment variable overrides the config seed; an explicit
// --seed flag beats both.
int run_cli(int argc, const char* const* argv);

}  // namespace pseudoboost
