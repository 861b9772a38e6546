#include "kteach/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kteach/image.hpp"
#include "kteach/metrics.hpp"
#include "kteach/patterns.hpp"
#include "kteach/rng.hpp"
#include "kteach/synthetic.hpp"
#include "kteach/trace_io.hpp"

namespace fs = std::filesystem;

namespace kteach {

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt_g(vs[i]);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("invalid number '" + item + "' for key '" + key + "'");
        }
    }
    if (out.empty()) throw UsageError("empty value for key '" + key + "'");
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    const auto v = parse_doubles(s, key);
    if (v.size() != 1) throw UsageError("key '" + key + "' takes a single number");
    return v[0];
}

std::size_t parse_size(const std::string& s, const std::string& key) {
    try {
        return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
        throw UsageError("invalid integer '" + s + "' for key '" + key + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "1" || s == "true" || s == "on") return true;
    if (s == "0" || s == "false" || s == "off") return false;
    throw UsageError("invalid boolean '" + s + "' for key '" + key + "'");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::SingleSequential: return "single-sequential";
        case Mode::Vanilla: return "vanilla";
        case Mode::Communicated: return "communicated";
    }
    return "vanilla";
}

Mode parse_mode(const std::string& s) {
    if (s == "single-sequential") return Mode::SingleSequential;
    if (s == "vanilla") return Mode::Vanilla;
    if (s == "communicated") return Mode::Communicated;
    throw UsageError("invalid mode '" + s + "' (single-sequential | vanilla | communicated)");
}

std::string strategy_name(Strategy s) {
    return s == Strategy::Rft ? "rft" : "gft";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "rft") return Strategy::Rft;
    if (s == "gft") return Strategy::Gft;
    throw UsageError("invalid strategy '" + s + "' (rft | gft)");
}

CommMode parse_comm_mode(const std::string& s) {
    if (s == "never") return CommMode::Never;
    if (s == "at-start-only") return CommMode::AtStartOnly;
    if (s == "every-k") return CommMode::EveryK;
    if (s == "while-far") return CommMode::WhileFar;
    throw UsageError("invalid comm_mode '" + s +
                     "' (never | at-start-only | every-k | while-far)");
}

}  // namespace

const std::vector<std::string>& known_presets() {
    static const std::vector<std::string> presets = {
        "mean-shift",   "bivariate-mixture", "gamma-sweep", "one-shot-comm",
        "one-shot-comm-cos", "image-gray",   "image-partition", "image-rgb",
    };
    return presets;
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "preset",         "image",           "synthetic",       "channels",        "mode",
        "strategy",       "partition_rows",  "partition_cols",  "eta",
        "iterations",     "epsilon",         "comm_mode",       "comm_every_k",
        "comm_far_threshold", "comm_solver", "comm_max_steps",  "comm_tolerance",
        "comm_ridge",     "comm_row_sum_one", "seed",           "output_dir",
        "snapshots",      "grid_points",     "domain_lo",       "domain_hi",
        "sampling",       "sampling_mean",   "sampling_stddev", "init",
        "bandwidth_divisor", "gamma_range",  "gamma_step",      "image_size",
    };
    return keys;
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") {
        if (std::find(known_presets().begin(), known_presets().end(), value) ==
            known_presets().end()) {
            std::string msg = "unknown preset '" + value + "'; valid presets:";
            for (const auto& p : known_presets()) msg += " " + p;
            throw UsageError(msg);
        }
        cfg.preset = value;
    } else if (key == "image") {
        cfg.image_path = value;
    } else if (key == "synthetic") {
        try {
            parse_synthetic(value);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        cfg.synthetic = value;
    } else if (key == "channels") {
        cfg.channels = parse_size(value, key);
    } else if (key == "mode") {
        cfg.mode = parse_mode(value);
    } else if (key == "strategy") {
        cfg.strategy = parse_strategy(value);
    } else if (key == "partition_rows") {
        cfg.partition_rows = parse_size(value, key);
    } else if (key == "partition_cols") {
        cfg.partition_cols = parse_size(value, key);
    } else if (key == "eta") {
        cfg.etas = parse_doubles(value, key);
    } else if (key == "iterations") {
        cfg.iterations = parse_size(value, key);
    } else if (key == "epsilon") {
        cfg.epsilon = parse_double(value, key);
    } else if (key == "comm_mode") {
        parse_comm_mode(value);
        cfg.comm_mode = value;
    } else if (key == "comm_every_k") {
        cfg.comm_every_k = parse_size(value, key);
    } else if (key == "comm_far_threshold") {
        cfg.comm_far_threshold = parse_double(value, key);
    } else if (key == "comm_solver") {
        if (value != "closed-form" && value != "iterative") {
            throw UsageError("invalid comm_solver '" + value + "' (closed-form | iterative)");
        }
        cfg.comm_solver = value;
    } else if (key == "comm_max_steps") {
        cfg.comm_max_steps = parse_size(value, key);
    } else if (key == "comm_tolerance") {
        cfg.comm_tolerance = parse_double(value, key);
    } else if (key == "comm_ridge") {
        cfg.comm_ridge = parse_double(value, key);
    } else if (key == "comm_row_sum_one") {
        cfg.comm_row_sum_one = parse_bool(value, key);
    } else if (key == "seed") {
        try {
            cfg.seed = std::stoull(value);
        } catch (const std::exception&) {
            throw UsageError("invalid seed '" + value + "'");
        }
        cfg.seed_set = true;
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "snapshots") {
        cfg.snapshots = parse_size(value, key);
    } else if (key == "grid_points") {
        cfg.grid_points = parse_size(value, key);
    } else if (key == "domain_lo") {
        cfg.domain_lo = parse_double(value, key);
    } else if (key == "domain_hi") {
        cfg.domain_hi = parse_double(value, key);
    } else if (key == "sampling") {
        if (value != "uniform" && value != "gaussian") {
            throw UsageError("invalid sampling '" + value + "' (uniform | gaussian)");
        }
        cfg.sampling = value;
    } else if (key == "sampling_mean") {
        cfg.sampling_means = parse_doubles(value, key);
    } else if (key == "sampling_stddev") {
        cfg.sampling_stddev = parse_double(value, key);
    } else if (key == "init") {
        if (value != "zero" && value != "random") {
            throw UsageError("invalid init '" + value + "' (zero | random)");
        }
        cfg.init = value;
    } else if (key == "bandwidth_divisor") {
        cfg.bandwidth_divisor = parse_double(value, key);
    } else if (key == "gamma_range") {
        if (value != "unit" && value != "signed") {
            throw UsageError("invalid gamma_range '" + value + "' (unit | signed)");
        }
        cfg.gamma_range = value;
    } else if (key == "gamma_step") {
        cfg.gamma_step = parse_double(value, key);
    } else if (key == "image_size") {
        cfg.image_size = parse_size(value, key);
    } else {
        std::string msg = "unknown config key '" + key + "'; valid keys:";
        for (const auto& k : known_config_keys()) msg += " " + k;
        throw UsageError(msg);
    }
}

ConfigKv read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    ConfigKv pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        pairs.emplace_back(strip(stripped.substr(0, eq)), strip(stripped.substr(eq + 1)));
    }
    return pairs;
}

namespace {

ExperimentConfig preset_baseline(const std::string& preset) {
    ExperimentConfig cfg;
    cfg.preset = preset;
    if (preset == "image-gray") {
        cfg.iterations = 2000;
    } else if (preset == "image-partition") {
        cfg.partition_rows = 2;
        cfg.partition_cols = 2;
        cfg.iterations = 2000;
    } else if (preset == "image-rgb") {
        cfg.channels = 3;
        cfg.iterations = 4000;
    } else if (preset == "one-shot-comm" || preset == "one-shot-comm-cos") {
        cfg.mode = Mode::Communicated;
        cfg.comm_mode = "at-start-only";
        cfg.grid_points = 64;
        cfg.domain_lo = -2.0;
        cfg.domain_hi = 2.0;
        cfg.iterations = 5;
        cfg.epsilon = 1e-6;
        cfg.bandwidth_divisor = 2.0;
    } else if (preset == "bivariate-mixture") {
        cfg.grid_points = 256;
        cfg.domain_lo = -10.0;
        cfg.domain_hi = 10.0;
        cfg.iterations = 20000;
        cfg.bandwidth_divisor = 2.0;
    } else if (preset == "mean-shift") {
        cfg.grid_points = 256;
        cfg.domain_lo = -10.0;
        cfg.domain_hi = 10.0;
        cfg.iterations = 20000;
        cfg.bandwidth_divisor = 2.0;
        cfg.sampling = "gaussian";
        cfg.sampling_means = {0.0, -4.0, -7.0};
        cfg.sampling_stddev = 3.0;  // keeps the shifted-mean runs convergent at desk scale
    } else if (preset == "gamma-sweep") {
        cfg.grid_points = 256;
        cfg.domain_lo = -2.0;
        cfg.domain_hi = 2.0;
        cfg.bandwidth_divisor = 2.0;
        cfg.iterations = 1;
    }
    return cfg;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg, const ConfigKv& user_pairs) {
    const auto user_set = [&](const std::string& key) {
        for (const auto& [k, v] : user_pairs) {
            if (k == key) return true;
        }
        return false;
    };
    if (cfg.mode != Mode::Communicated && cfg.comm_mode != "never" && user_set("comm_mode") &&
        user_set("mode")) {
        throw UsageError("mode '" + mode_name(cfg.mode) + "' conflicts with comm_mode '" +
                         cfg.comm_mode + "'; use mode = communicated or comm_mode = never");
    }
    if (cfg.strategy == Strategy::Rft && !cfg.seed_set) {
        throw UsageError("strategy rft requires a seed");
    }
    if (cfg.preset == "mean-shift" && !cfg.seed_set) {
        throw UsageError("preset mean-shift requires a seed for its rft runs");
    }
    if (!(cfg.epsilon > 0.0)) throw UsageError("epsilon must be positive");
    if (cfg.iterations == 0) throw UsageError("iterations must be at least 1");
    for (double e : cfg.etas) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw UsageError("eta must be finite and >= 0");
    }
    if (cfg.channels != 0 && cfg.channels != 1 && cfg.channels != 3) {
        throw UsageError("channels must be 1 or 3");
    }
    if (!(cfg.sampling_stddev > 0.0)) throw UsageError("sampling_stddev must be positive");
    if (cfg.partition_rows == 0 || cfg.partition_cols == 0) {
        throw UsageError("partition_rows/partition_cols must be positive");
    }
    if (cfg.comm_far_threshold < 0.0) throw UsageError("comm_far_threshold must be >= 0");
    if (cfg.comm_ridge < 0.0) throw UsageError("comm_ridge must be >= 0");
    if (!(cfg.gamma_step > 0.0)) throw UsageError("gamma_step must be positive");
    if (cfg.image_size < 2) throw UsageError("image_size must be at least 2");
}

ExperimentConfig resolve_config(const ConfigKv& pairs) {
    std::string preset = "image-gray";
    for (const auto& [k, v] : pairs) {
        if (k == "preset") preset = v;
    }
    ExperimentConfig cfg = preset_baseline(preset);
    for (const auto& [k, v] : pairs) apply_config_value(cfg, k, v);
    if (cfg.iterations == 0) cfg.iterations = 1000;
    validate_config(cfg, pairs);
    if (cfg.mode != Mode::Communicated) cfg.comm_mode = "never";
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) {
        out += k + " = " + v + "\n";
    };
    kv("preset", cfg.preset);
    kv("image", cfg.image_path);
    if (!cfg.synthetic.empty()) kv("synthetic", cfg.synthetic);
    kv("channels", std::to_string(cfg.channels));
    kv("mode", mode_name(cfg.mode));
    kv("strategy", strategy_name(cfg.strategy));
    kv("partition_rows", std::to_string(cfg.partition_rows));
    kv("partition_cols", std::to_string(cfg.partition_cols));
    kv("eta", join_doubles(cfg.etas));
    kv("iterations", std::to_string(cfg.iterations));
    kv("epsilon", fmt_g(cfg.epsilon));
    kv("comm_mode", cfg.comm_mode);
    kv("comm_every_k", std::to_string(cfg.comm_every_k));
    kv("comm_far_threshold", fmt_g(cfg.comm_far_threshold));
    kv("comm_solver", cfg.comm_solver);
    kv("comm_max_steps", std::to_string(cfg.comm_max_steps));
    kv("comm_tolerance", fmt_g(cfg.comm_tolerance));
    kv("comm_ridge", fmt_g(cfg.comm_ridge));
    kv("comm_row_sum_one", cfg.comm_row_sum_one ? "1" : "0");
    kv("seed", std::to_string(cfg.seed));
    kv("output_dir", cfg.output_dir);
    kv("snapshots", std::to_string(cfg.snapshots));
    kv("grid_points", std::to_string(cfg.grid_points));
    kv("domain_lo", fmt_g(cfg.domain_lo));
    kv("domain_hi", fmt_g(cfg.domain_hi));
    kv("sampling", cfg.sampling);
    kv("sampling_mean", join_doubles(cfg.sampling_means));
    kv("sampling_stddev", fmt_g(cfg.sampling_stddev));
    kv("init", cfg.init);
    kv("bandwidth_divisor", fmt_g(cfg.bandwidth_divisor));
    kv("gamma_range", cfg.gamma_range);
    kv("gamma_step", fmt_g(cfg.gamma_step));
    kv("image_size", std::to_string(cfg.image_size));
    return out;
}

namespace {

struct Setup {
    VectorValuedFunction target;
    VectorValuedFunction init;
    KernelSpec kernel;
    std::vector<SamplingDistribution> sampling;
    bool is_2d = false;
    bool rgb = false;
};

VectorValuedFunction zero_like(const VectorValuedFunction& ref) {
    std::vector<SampledFunction> comps;
    comps.reserve(ref.d());
    for (std::size_t i = 0; i < ref.d(); ++i) {
        comps.push_back(SampledFunction::zeros(ref.component(i).grid()));
    }
    return VectorValuedFunction(std::move(comps));
}

VectorValuedFunction random_like(const VectorValuedFunction& ref, std::uint64_t seed) {
    std::vector<SampledFunction> comps;
    comps.reserve(ref.d());
    for (std::size_t i = 0; i < ref.d(); ++i) {
        Rng rng = Rng::stream(seed, 1000 + i);
        std::vector<double> v(ref.component(i).size());
        for (double& x : v) x = rng.next_double();
        comps.emplace_back(ref.component(i).grid(), std::move(v));
    }
    return VectorValuedFunction(std::move(comps));
}

VectorValuedFunction make_init(const ExperimentConfig& cfg, const VectorValuedFunction& target) {
    if (cfg.init == "random") return random_like(target, cfg.seed);
    return zero_like(target);
}

double image_divisor(std::size_t block_w, std::size_t block_h) {
    // Keeps the kernel footprint at a two-pixel scale no matter the
    // resolution of the normalized [0,1]^2 lattice.
    return 2.0 / static_cast<double>(std::max(block_w, block_h));
}

ImageFunction load_or_demo(const ExperimentConfig& cfg, std::size_t channels) {
    if (!cfg.image_path.empty()) return load_image(cfg.image_path, channels);
    if (channels == 3) return demo_rgb_image(cfg.image_size, cfg.image_size);
    return demo_gray_image(cfg.image_size, cfg.image_size);
}

GridPtr preset_grid(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.grid_points ? cfg.grid_points : 256;
    double lo = cfg.domain_lo, hi = cfg.domain_hi;
    if (lo == hi) {
        lo = -10.0;
        hi = 10.0;
    }
    return Grid::linspace_1d(lo, hi, n);
}

KernelSpec make_kernel(const ExperimentConfig& cfg, double fallback_divisor) {
    return KernelSpec(cfg.bandwidth_divisor > 0.0 ? cfg.bandwidth_divisor : fallback_divisor);
}

Setup build_setup(const ExperimentConfig& cfg) {
    if (cfg.preset == "image-gray" || cfg.preset == "image-partition") {
        const ImageFunction img = load_or_demo(cfg, 1);
        const SampledFunction whole = img.to_function().component(0);
        VectorValuedFunction target =
            (cfg.preset == "image-partition")
                ? partition(whole, cfg.partition_rows, cfg.partition_cols)
                : VectorValuedFunction({whole});
        const Grid& g = *target.component(0).grid();
        const double div = image_divisor(g.width(), g.height());
        Setup s{target, make_init(cfg, target), make_kernel(cfg, div), {}, true, false};
        return s;
    }
    if (cfg.preset == "image-rgb") {
        const ImageFunction img = load_or_demo(cfg, 3);
        VectorValuedFunction target = img.to_function();
        const Grid& g = *target.component(0).grid();
        const double div = image_divisor(g.width(), g.height());
        Setup s{target, make_init(cfg, target), make_kernel(cfg, div), {}, true, true};
        return s;
    }
    if (cfg.preset == "one-shot-comm" || cfg.preset == "one-shot-comm-cos") {
        GridPtr grid = preset_grid(cfg);
        std::vector<SampledFunction> comps;
        CommMatrix a(0);
        if (cfg.preset == "one-shot-comm") {
            comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Exp), grid));
            comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Sin), grid));
            comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Identity), grid));
            a = CommMatrix(3, {2, -1, -1, 0, 1, 2, -1, 1, 1});
        } else {
            comps.push_back(synth_target(SyntheticSpec::cos(2.0), grid));
            comps.push_back(synth_target(SyntheticSpec::cos(4.0), grid));
            a = CommMatrix(2, {1, -1, -1.0 / std::sqrt(2.0), 1});
        }
        VectorValuedFunction init(std::move(comps));
        VectorValuedFunction target = apply_comm(init, a);
        Setup s{target, init, make_kernel(cfg, 2.0), {}, false, false};
        return s;
    }
    if (cfg.preset == "bivariate-mixture") {
        GridPtr grid = preset_grid(cfg);
        std::vector<SampledFunction> init_comps;
        init_comps.push_back(synth_target(SyntheticSpec::gaussian(-2.0, 1.5), grid));
        init_comps.push_back(synth_target(SyntheticSpec::gaussian(2.0, 1.0), grid));
        std::vector<SampledFunction> target_comps;
        target_comps.push_back(synth_target(
            SyntheticSpec::gaussian_mixture(
                GaussianMixture{{1.0 / 3.0, 2.0 / 3.0}, {-2.0, 2.0}, {1.5, 1.0}}),
            grid));
        target_comps.push_back(synth_target(
            SyntheticSpec::gaussian_mixture(
                GaussianMixture{{3.0 / 4.0, 1.0 / 4.0}, {-2.0, 2.0}, {1.5, 1.0}}),
            grid));
        VectorValuedFunction init(std::move(init_comps));
        VectorValuedFunction target(std::move(target_comps));
        // This preset's starting point is the factor pair, not zero.
        Setup s{target, init, make_kernel(cfg, 2.0), {}, false, false};
        return s;
    }
    if (cfg.preset == "mean-shift") {
        GridPtr grid = preset_grid(cfg);
        VectorValuedFunction target(
            {synth_target(SyntheticSpec::gaussian(0.0, 5.0), grid)});
        Setup s{target, zero_like(target), make_kernel(cfg, 2.0), {}, false, false};
        return s;
    }
    throw UsageError("preset '" + cfg.preset + "' is not a teaching preset");
}

CommPolicy make_policy(const ExperimentConfig& cfg) {
    CommPolicy p;
    p.mode = parse_comm_mode(cfg.comm_mode);
    p.every_k = cfg.comm_every_k;
    p.far_threshold =
        cfg.comm_far_threshold > 0.0 ? cfg.comm_far_threshold : 10.0 * cfg.epsilon;
    p.solver = (cfg.comm_solver == "iterative") ? CommSolver::Iterative : CommSolver::ClosedForm;
    p.max_solver_steps = cfg.comm_max_steps;
    p.solver_tolerance = cfg.comm_tolerance;
    p.ridge = cfg.comm_ridge;
    p.row_sum_one = cfg.comm_row_sum_one;
    return p;
}

TeachingConfig make_teaching_config(const ExperimentConfig& cfg, const Setup& setup) {
    TeachingConfig tc;
    tc.kernel = setup.kernel;
    tc.etas = (cfg.etas.size() == 1) ? StepSizes::uniform(setup.target.d(), cfg.etas[0])
                                     : StepSizes{cfg.etas};
    tc.max_iterations = cfg.iterations;
    tc.epsilon = cfg.epsilon;
    tc.seed = cfg.seed;
    if (cfg.sampling == "gaussian") {
        std::vector<SamplingDistribution> dists;
        for (std::size_t i = 0; i < setup.target.d(); ++i) {
            const double mu = cfg.sampling_means[std::min(i, cfg.sampling_means.size() - 1)];
            dists.push_back(SamplingDistribution::gaussian(mu, cfg.sampling_stddev));
        }
        tc.sampling = dists;
    }
    return tc;
}

std::set<std::size_t> checkpoint_set(std::size_t total, std::size_t count) {
    std::set<std::size_t> points;
    if (count == 0) return points;
    if (count == 1) {
        points.insert(0);
        return points;
    }
    for (std::size_t k = 0; k < count; ++k) {
        points.insert((total * k) / (count - 1));
    }
    return points;
}

std::string snapshot_name(const std::string& dir, std::size_t t, bool rgb) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%06zu.", t);
    return dir + "/" + buf + (rgb ? "ppm" : "pgm");
}

void write_summary(const std::string& path, const ExperimentResult& r) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("run_experiment: cannot write " + path);
    out << "iterations = " << r.iterations << "\n";
    out << "final_loss = " << fmt_g(r.final_loss) << "\n";
    out << "final_disagreement = " << fmt_g(r.final_disagreement) << "\n";
    out << "final_psnr = " << r.final_psnr << "\n";
    out << "reached_epsilon = " << (r.reached_epsilon ? 1 : 0) << "\n";
    if (r.iteration_bound_hint > 0.0) {
        out << "iteration_bound_hint = " << fmt_g(r.iteration_bound_hint) << "\n";
    }
    out << "aborted = " << (r.aborted ? 1 : 0) << "\n";
    if (r.aborted) out << "abort_reason = " << r.abort_reason << "\n";
    for (const auto& p : r.trace_paths) out << "trace = " << p << "\n";
}

double bound_hint(const ExperimentConfig& cfg, const Setup& setup) {
    // Expected initial loss under uniform example sampling is the mean
    // squared residual per learner, summed.
    const double expected_loss =
        full_grid_loss(setup.init, setup.target) /
        (static_cast<double>(setup.target.total_points()) / static_cast<double>(setup.target.d()));
    double eta_min = cfg.etas[0];
    for (double e : cfg.etas) eta_min = std::min(eta_min, e);
    if (!(eta_min > 0.0)) return 0.0;
    return iteration_bound(expected_loss, setup.target.d(), eta_min, cfg.epsilon);
}

void fill_final_metrics(ExperimentResult& r, const VectorValuedFunction& state,
                        const VectorValuedFunction& target, double epsilon) {
    r.final_loss = full_grid_loss(state, target);
    r.final_disagreement = disagreement(state, target);
    r.final_psnr = psnr(state, target, 1.0).to_string();
    r.reached_epsilon = r.final_disagreement < epsilon;
}

ExperimentResult run_single(const ExperimentConfig& cfg, const Setup& setup,
                            const std::string& trace_name) {
    ExperimentResult result;
    TeachingConfig tc = make_teaching_config(cfg, setup);
    const CommPolicy policy =
        (cfg.mode == Mode::Communicated) ? make_policy(cfg) : CommPolicy{};

    const auto checkpoints = checkpoint_set(cfg.iterations, setup.is_2d ? cfg.snapshots : 0);
    if (setup.is_2d) {
        tc.observer = [&](std::size_t t, const VectorValuedFunction& state) {
            if (!checkpoints.count(t)) return;
            if (cfg.preset == "image-partition") {
                write_snapshot(stitch(state, cfg.partition_rows, cfg.partition_cols),
                               snapshot_name(cfg.output_dir, t, false));
            } else {
                write_snapshot(state, snapshot_name(cfg.output_dir, t, setup.rgb));
            }
        };
    }

    const RunResult run = run_teaching(tc, setup.target, setup.init, cfg.strategy, policy);
    const std::string trace_path = cfg.output_dir + "/" + trace_name;
    write_trace(run.trace, trace_path);
    result.trace_paths.push_back(trace_path);
    result.iterations = run.trace.size();
    result.aborted = run.aborted;
    result.abort_reason = run.abort_reason;
    result.iteration_bound_hint = bound_hint(cfg, setup);
    fill_final_metrics(result, *run.final_function, setup.target, cfg.epsilon);
    return result;
}

ExperimentResult run_sequential(const ExperimentConfig& cfg, const Setup& setup) {
    const std::size_t d = setup.target.d();
    const double eps_component = cfg.epsilon * std::sqrt(static_cast<double>(d));
    const std::size_t budget = (cfg.iterations + d - 1) / d;

    // Squared residual per component, used to report whole-vector metrics
    // while only one component is being taught.
    std::vector<double> sq(d);
    for (std::size_t i = 0; i < d; ++i) {
        sq[i] = component_sq_residual(setup.init.component(i), setup.target.component(i));
    }
    const double n_total = static_cast<double>(setup.target.total_points());

    std::vector<SampledFunction> current;
    for (std::size_t i = 0; i < d; ++i) current.push_back(setup.init.component(i));

    const auto checkpoints = checkpoint_set(cfg.iterations, setup.is_2d ? cfg.snapshots : 0);
    const auto maybe_snapshot = [&](std::size_t t) {
        if (!setup.is_2d || !checkpoints.count(t)) return;
        const VectorValuedFunction state{std::vector<SampledFunction>(current)};
        if (cfg.preset == "image-partition") {
            write_snapshot(stitch(state, cfg.partition_rows, cfg.partition_cols),
                           snapshot_name(cfg.output_dir, t, false));
        } else {
            write_snapshot(state, snapshot_name(cfg.output_dir, t, setup.rgb));
        }
    };

    ExperimentResult result;
    std::vector<TraceRecord> unified;
    std::size_t wall = 0;
    for (std::size_t c = 0; c < d && !result.aborted; ++c) {
        const VectorValuedFunction slice_target({setup.target.component(c)});
        const VectorValuedFunction slice_init({current[c]});

        TeachingConfig tc = make_teaching_config(cfg, setup);
        tc.etas = StepSizes{{(cfg.etas.size() == 1) ? cfg.etas[0]
                                                    : cfg.etas[std::min(c, cfg.etas.size() - 1)]}};
        tc.epsilon = eps_component;
        tc.max_iterations = budget;
        tc.stream_offset = c;
        if (cfg.sampling == "gaussian") {
            const double mu = cfg.sampling_means[std::min(c, cfg.sampling_means.size() - 1)];
            tc.sampling = {SamplingDistribution::gaussian(mu, cfg.sampling_stddev)};
        }
        const std::size_t wall_offset = wall;
        tc.observer = [&, wall_offset](std::size_t t_local, const VectorValuedFunction& state) {
            current[c] = state.component(0);
            maybe_snapshot(wall_offset + t_local);
        };

        const RunResult run =
            run_teaching(tc, slice_target, slice_init, cfg.strategy, CommPolicy{});

        const double n_c = static_cast<double>(slice_target.component(0).size());
        for (const auto& rec : run.trace) {
            TraceRecord full = rec;
            full.iteration = wall;
            const double slice_l2 = rec.disagreement * n_c;
            sq[c] = slice_l2 * slice_l2;
            double total_sq = 0.0;
            for (double s : sq) total_sq += s;
            full.disagreement = std::sqrt(total_sq) / n_total;
            const double mse = total_sq / n_total;
            full.psnr_saturated = (mse == 0.0);
            full.psnr_db = full.psnr_saturated ? 0.0 : 10.0 * std::log10(1.0 / mse);
            unified.push_back(std::move(full));
            ++wall;
        }
        sq[c] = component_sq_residual(current[c], setup.target.component(c));
        result.aborted = run.aborted;
        result.abort_reason = run.abort_reason;
    }

    const std::string trace_path = cfg.output_dir + "/trace.csv";
    write_trace(unified, trace_path);
    result.trace_paths.push_back(trace_path);
    result.iterations = wall;
    result.iteration_bound_hint = bound_hint(cfg, setup);
    const VectorValuedFunction final_state{std::move(current)};
    fill_final_metrics(result, final_state, setup.target, cfg.epsilon);
    return result;
}

ExperimentResult run_mean_shift(const ExperimentConfig& cfg, const Setup& setup) {
    ExperimentResult result;
    std::size_t total = 0;

    ExperimentConfig gft_cfg = cfg;
    gft_cfg.strategy = Strategy::Gft;
    gft_cfg.sampling = "uniform";
    const ExperimentResult gft = run_single(gft_cfg, setup, "trace_gft.csv");
    result.trace_paths.push_back(gft.trace_paths[0]);
    total += gft.iterations;
    result.aborted = gft.aborted;

    for (double mu : cfg.sampling_means) {
        ExperimentConfig rft_cfg = cfg;
        rft_cfg.strategy = Strategy::Rft;
        rft_cfg.sampling = "gaussian";
        rft_cfg.sampling_means = {mu};
        char name[64];
        std::snprintf(name, sizeof(name), "trace_rft_mu%g.csv", mu);
        const ExperimentResult rft = run_single(rft_cfg, setup, name);
        result.trace_paths.push_back(rft.trace_paths[0]);
        total += rft.iterations;
        result.aborted = result.aborted || rft.aborted;
    }
    result.iterations = total;
    result.final_psnr = "n/a";
    return result;
}

}  // namespace

std::vector<std::pair<double, double>> gamma_sweep(const ExperimentConfig& cfg,
                                                   const std::string& out_csv) {
    GridPtr grid = Grid::linspace_1d(cfg.domain_lo == cfg.domain_hi ? -2.0 : cfg.domain_lo,
                                     cfg.domain_lo == cfg.domain_hi ? 2.0 : cfg.domain_hi,
                                     cfg.grid_points ? cfg.grid_points : 256);
    std::vector<SampledFunction> comps;
    comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Identity), grid));
    comps.push_back(synth_target(SyntheticSpec::polynomial({0.0, 0.0, 1.0}), grid));
    const VectorValuedFunction f0(std::move(comps));

    std::vector<double> gammas;
    if (cfg.gamma_range == "signed") {
        for (std::size_t k = 0; k < 200; ++k) gammas.push_back(-1.0 + 0.01 * static_cast<double>(k));
    } else {
        const auto count = static_cast<std::size_t>(std::floor(1.0 / cfg.gamma_step + 1e-9));
        for (std::size_t k = 0; k <= count; ++k) {
            gammas.push_back(std::min(cfg.gamma_step * static_cast<double>(k), 1.0));
        }
    }

    CommPolicy policy;
    policy.ridge = cfg.comm_ridge;
    policy.row_sum_one = cfg.comm_row_sum_one;

    std::vector<std::pair<double, double>> out;
    for (double g : gammas) {
        const VectorValuedFunction target = gamma_target(g, grid);
        const CommMatrix a = solve_comm_matrix(f0, target, policy);
        out.emplace_back(g, disagreement(apply_comm(f0, a), target));
    }

    if (!out_csv.empty()) {
        std::ofstream csv(out_csv, std::ios::binary | std::ios::trunc);
        if (!csv) throw std::runtime_error("gamma_sweep: cannot write " + out_csv);
        csv << "gamma,distance\n";
        for (const auto& [g, dist] : out) csv << fmt_g(g) << "," << fmt_g(dist) << "\n";
    }
    return out;
}

CommMatrix solve_preset_comm(const ExperimentConfig& cfg, double gamma) {
    CommPolicy policy = make_policy(cfg);
    if (cfg.preset == "gamma-sweep") {
        GridPtr grid = preset_grid(cfg);
        std::vector<SampledFunction> comps;
        comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Identity), grid));
        comps.push_back(synth_target(SyntheticSpec::polynomial({0.0, 0.0, 1.0}), grid));
        return solve_comm_matrix(VectorValuedFunction(std::move(comps)),
                                 gamma_target(gamma, grid), policy);
    }
    const Setup setup = build_setup(cfg);
    if (!setup.init.shares_grid()) {
        throw UsageError("preset '" + cfg.preset + "' has no shared grid to solve over");
    }
    return solve_comm_matrix(setup.init, setup.target, policy);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    fs::create_directories(cfg.output_dir);

    ExperimentResult result;
    if (cfg.preset == "gamma-sweep") {
        const std::string csv = cfg.output_dir + "/gamma_sweep.csv";
        const auto rows = gamma_sweep(cfg, csv);
        result.trace_paths.push_back(csv);
        result.iterations = rows.size();
        result.final_disagreement = rows.empty() ? 0.0 : rows.back().second;
        result.final_psnr = "n/a";
    } else {
        const Setup setup = build_setup(cfg);
        if (setup.is_2d) {
            const std::string target_path =
                cfg.output_dir + (setup.rgb ? "/target.ppm" : "/target.pgm");
            if (cfg.preset == "image-partition") {
                write_snapshot(stitch(setup.target, cfg.partition_rows, cfg.partition_cols),
                               target_path);
            } else {
                write_snapshot(setup.target, target_path);
            }
        }
        if (cfg.preset == "mean-shift") {
            result = run_mean_shift(cfg, setup);
        } else if (cfg.mode == Mode::SingleSequential) {
            result = run_sequential(cfg, setup);
        } else {
            result = run_single(cfg, setup, "trace.csv");
        }
    }

    result.config_echo_path = cfg.output_dir + "/config.echo";
    std::ofstream echo(result.config_echo_path, std::ios::binary | std::ios::trunc);
    if (!echo) throw std::runtime_error("run_experiment: cannot write config echo");
    echo << serialize_config(cfg);
    echo.close();

    result.summary_path = cfg.output_dir + "/summary.txt";
    write_summary(result.summary_path, result);
    return result;
}

}  // namespace kteach
