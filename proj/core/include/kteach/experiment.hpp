#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kteach/teaching.hpp"

namespace kteach {

enum class Mode { SingleSequential, Vanilla, Communicated };

/// Fully resolved experiment description. Every field maps 1:1 onto a
/// `key = value` line of the config-file format; the CLI flags mirror the
/// same keys and override file values.
struct ExperimentConfig {
    std::string preset = "image-gray";
    std::string image_path;            // empty: presets fall back to the demo raster
    std::string synthetic;             // overrides the 1-D target, see parse_synthetic
    std::size_t channels = 0;          // 0 = take from file / preset
    Mode mode = Mode::Vanilla;
    Strategy strategy = Strategy::Gft;
    std::size_t partition_rows = 1;
    std::size_t partition_cols = 1;
    std::vector<double> etas{0.1};     // one entry broadcasts to all learners
    std::size_t iterations = 0;        // 0 = preset default
    double epsilon = 1e-3;
    std::string comm_mode = "while-far";
    std::size_t comm_every_k = 1;
    double comm_far_threshold = 0.0;   // 0 = 10 * epsilon
    std::string comm_solver = "closed-form";
    std::size_t comm_max_steps = 1000;
    double comm_tolerance = 1e-2;
    double comm_ridge = 1e-8;
    bool comm_row_sum_one = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string output_dir = "out";
    std::size_t snapshots = 6;
    std::size_t grid_points = 0;       // 0 = preset default
    double domain_lo = 0.0;            // used when both lo/hi given
    double domain_hi = 0.0;
    std::string sampling = "uniform";  // uniform | gaussian
    std::vector<double> sampling_means{0.0};
    double sampling_stddev = 1.0;
    std::string init = "zero";         // zero | random
    double bandwidth_divisor = 0.0;    // 0 = preset default
    std::string gamma_range = "unit";  // unit | signed (-1..1)
    double gamma_step = 0.1;
    std::size_t image_size = 32;       // demo raster resolution
};

/// Raised for malformed flags/config keys; the CLI maps it to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& known_config_keys();
const std::vector<std::string>& known_presets();

/// Ordered key/value pairs as collected from a config file and/or flags.
using ConfigKv = std::vector<std::pair<std::string, std::string>>;

/// Applies one key = value pair; unknown keys raise UsageError naming the key
/// and listing the valid ones.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Line-oriented `key = value` file; '#' starts a comment.
ConfigKv read_config_file(const std::string& path);

/// Preset baseline first, then the pairs in order (so later pairs override
/// earlier ones), then consistency checks.
ExperimentConfig resolve_config(const ConfigKv& pairs);

/// Stable, complete serialization; resolving it back reproduces the run.
std::string serialize_config(const ExperimentConfig& cfg);

/// Consistency checks (mode/strategy conflicts, missing seed for rft, ...).
void validate_config(const ExperimentConfig& cfg, const ConfigKv& user_pairs = {});

struct ExperimentResult {
    std::size_t iterations = 0;          // updates performed (sequential: total)
    double final_loss = 0.0;             // full-grid square loss of the final state
    double final_disagreement = 0.0;
    std::string final_psnr;              // "inf" when saturated
    bool reached_epsilon = false;
    bool aborted = false;
    std::string abort_reason;
    double iteration_bound_hint = 0.0;   // 2 E[L(f^0)] / (d eta_min epsilon)
    std::vector<std::string> trace_paths;
    std::string summary_path;
    std::string config_echo_path;
};

/// Runs the configured experiment and writes traces, snapshots, an echoed
/// config, and a summary into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// gamma sweep: distance between the best mixed initialization and the
/// interpolated target, per gamma. Returns (gamma, distance) pairs and
/// writes them as CSV when out_csv is non-empty.
std::vector<std::pair<double, double>> gamma_sweep(const ExperimentConfig& cfg,
                                                   const std::string& out_csv);

/// Standalone mixing-matrix solve between a preset's initialization and its
/// target (gamma selects the interpolated target for the gamma-sweep preset).
CommMatrix solve_preset_comm(const ExperimentConfig& cfg, double gamma = 1.0);

}  // namespace kteach
