#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "kteach/experiment.hpp"

namespace {

using kteach::ConfigKv;

/// Every config key doubles as a --flag (underscores become dashes); flags
/// override config-file values because they are appended after them.
struct FlagBinding {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
        for (const auto& key : kteach::known_config_keys()) {
            std::string flag = "--" + key;
            for (auto& c : flag) {
                if (c == '_') c = '-';
            }
            options[key] = cmd->add_option(flag, values[key]);
        }
    }

    ConfigKv collect() const {
        ConfigKv pairs;
        if (!config_path.empty()) pairs = kteach::read_config_file(config_path);
        for (const auto& key : kteach::known_config_keys()) {
            const auto it = options.find(key);
            if (it != options.end() && it->second->count() > 0) {
                pairs.emplace_back(key, values.at(key));
            }
        }
        return pairs;
    }
};

void print_result(const kteach::ExperimentResult& r) {
    std::printf("iterations: %zu\n", r.iterations);
    std::printf("final_disagreement: %.9g\n", r.final_disagreement);
    std::printf("final_psnr: %s\n", r.final_psnr.c_str());
    for (const auto& p : r.trace_paths) std::printf("trace: %s\n", p.c_str());
    std::printf("summary: %s\n", r.summary_path.c_str());
    if (r.aborted) std::printf("aborted: %s\n", r.abort_reason.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-learner teaching of grid-sampled functions in an RBF model space"};
    app.require_subcommand(1);

    auto* teach = app.add_subcommand("teach", "run one experiment preset");
    FlagBinding teach_flags;
    teach_flags.attach(teach);

    auto* sweep = app.add_subcommand("sweep", "gamma or sampling-mean sweeps");
    FlagBinding sweep_flags;
    sweep_flags.attach(sweep);

    auto* solve = app.add_subcommand("solve-comm", "solve one mixing matrix and print it");
    FlagBinding solve_flags;
    solve_flags.attach(solve);
    double gamma = 1.0;
    solve->add_option("--gamma", gamma, "interpolation point for the gamma-sweep preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (teach->parsed()) {
            const auto cfg = kteach::resolve_config(teach_flags.collect());
            print_result(kteach::run_experiment(cfg));
            return 0;
        }
        if (sweep->parsed()) {
            ConfigKv pairs = sweep_flags.collect();
            bool has_preset = false;
            for (const auto& [k, v] : pairs) has_preset |= (k == "preset");
            if (!has_preset) pairs.emplace_back("preset", "gamma-sweep");
            const auto cfg = kteach::resolve_config(pairs);
            if (cfg.preset != "gamma-sweep" && cfg.preset != "mean-shift") {
                throw kteach::UsageError("sweep takes preset gamma-sweep or mean-shift");
            }
            print_result(kteach::run_experiment(cfg));
            return 0;
        }
        const auto cfg = kteach::resolve_config(solve_flags.collect());
        const kteach::CommMatrix a = kteach::solve_preset_comm(cfg, gamma);
        for (std::size_t i = 0; i < a.d(); ++i) {
            for (std::size_t j = 0; j < a.d(); ++j) {
                std::printf("%s%.9g", j ? " " : "", a(i, j));
            }
            std::printf("\n");
        }
        return 0;
    } catch (const kteach::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
