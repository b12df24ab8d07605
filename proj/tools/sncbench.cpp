// sncbench - run the single-node studies and validation checks.
//
// Exit status: 0 when every check passes, 1 when a dominance or sample-path
// check fails, 2 on a configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "snc/experiment.hpp"

namespace {

void print(const snc::RunOutcome& outcome) {
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& n : outcome.notes) std::cout << "# " << n << '\n';
    for (const auto& r : outcome.reports) std::cout << r.to_string() << '\n';
    for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-node stochastic network calculus workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option("--seed", seed, "RNG seed (overrides run.seed)");
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    };

    using Runner = snc::RunOutcome (*)(const snc::ExperimentConfig&);
    struct Command {
        const char* name;
        const char* help;
        Runner run;
        CLI::App* app = nullptr;
    };
    Command commands[] = {
        {"single-flow", "single flow vs M/M/1 and the single-flow bounds", snc::run_single_flow},
        {"cross-traffic", "traversing flow under high-priority cross traffic", snc::run_cross_traffic},
        {"sweep", "mean-delay bound vs exact priority mean over load and cross share", snc::run_sweep},
        {"pitfall", "inf-convolution output vs actual output on the one-packet trace", snc::run_pitfall},
        {"validate-all", "every study plus the sample-path lemma suite", snc::run_validate_all},
    };
    for (auto& c : commands) {
        c.app = app.add_subcommand(c.name, c.help);
        add_common(c.app);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (auto& c : commands) {
            if (!c.app->parsed()) continue;
            snc::ExperimentConfig cfg;
            if (!config_path.empty()) {
                cfg = snc::load_config(config_path);
            } else if (std::string(c.name) != "single-flow") {
                // Two equal flows at total load 0.5 unless a config says otherwise.
                cfg.lambda_f = 0.25;
                cfg.lambda_c = 0.25;
            }
            cfg.scenario = c.name;
            if (!c.app->get_option("--seed")->empty()) cfg.seed = seed;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            auto outcome = c.run(cfg);
            print(outcome);
            return outcome.passed() ? 0 : 1;
        }
    } catch (const snc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const snc::PreconditionError& e) {
        std::cerr << "config error: precondition violated: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
