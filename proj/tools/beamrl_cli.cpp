// beamrl: train and evaluate power/beam control agents over an experiment grid.
//
//   beamrl --algo fpa,ddpg --antennas 1,4 --seeds 0,1 --episodes 50 --out runs/
//
// Precedence: built-in defaults < --config file < BEAMRL_<KEY> env vars < flags.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "beamrl/config.hpp"
#include "beamrl/errors.hpp"
#include "beamrl/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Downlink power control and beamforming with reinforcement learning"};

    std::string config_path, algo, antennas, seeds, scenario, out, format;
    int episodes = 0, jobs = 0, horizon = 0, eval_episodes = 0;
    bool dump_config = false;
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--algo", algo, "Comma-separated algorithms: fpa,qlearning,dqn,ddpg,hddpg");
    app.add_option("--antennas", antennas, "Comma-separated antenna counts from {1,4,8,16,32,64}");
    app.add_option("--seeds", seeds, "Comma-separated seeds");
    app.add_option("--episodes", episodes, "Training episodes per cell");
    app.add_option("--eval-episodes", eval_episodes, "Evaluation episodes per cell");
    app.add_option("--horizon", horizon, "Steps per episode");
    app.add_option("--scenario", scenario, "Scenario preset: sub6 or mmwave");
    app.add_option("--out", out, "Output directory");
    app.add_option("--format", format, "Metrics format: csv or json");
    app.add_option("--jobs", jobs, "Cells run in parallel");
    app.add_flag("--dump-config", dump_config, "Print the resolved configuration and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        beamrl::Config cfg = config_path.empty() ? beamrl::Config{} : beamrl::parse_config(config_path);
        beamrl::apply_env_overrides(cfg);
        auto set = [&](const char* key, const std::string& v) {
            if (!v.empty()) beamrl::apply_setting(cfg, key, v);
        };
        auto set_int = [&](const char* key, int v) {
            if (v != 0) beamrl::apply_setting(cfg, key, std::to_string(v));
        };
        set("scenario", scenario);
        set("algo", algo);
        set("antennas", antennas);
        set("seeds", seeds);
        set("out", out);
        set("format", format);
        set_int("episodes", episodes);
        set_int("eval_episodes", eval_episodes);
        set_int("horizon", horizon);
        set_int("jobs", jobs);
        cfg.validate();

        if (dump_config) {
            std::cout << beamrl::to_config_text(cfg);
            return EXIT_SUCCESS;
        }

        const auto results = beamrl::run_plan(cfg);
        for (const auto& r : results) {
            const auto& s = r.summary;
            std::cout << s.algorithm << " M=" << s.m_antennas << " seed=" << s.seed
                      << "  sum_rate=" << s.avg_sum_rate << "  sinr_db=" << s.avg_effective_sinr_db
                      << "  abort_rate=" << s.abort_rate << '\n';
        }
        std::cout << "wrote " << cfg.plan.output_dir << '\n';
    } catch (const beamrl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return EXIT_SUCCESS;
}
