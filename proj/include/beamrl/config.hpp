#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamrl/agents.hpp"
#include "beamrl/channel.hpp"
#include "beamrl/environment.hpp"

namespace beamrl {

struct ExperimentPlan {
    std::vector<std::string> algorithms{"fpa", "qlearning", "dqn", "ddpg", "hddpg"};
    std::vector<int> antenna_counts{1, 4, 8};
    std::vector<std::uint64_t> seeds{0, 1, 2};
    int episodes = 300;
    int eval_episodes = 20;
    std::string scenario = "sub6";
    std::string output_dir = "beamrl_out";
    std::string format = "csv";
    int jobs = 1;
    bool checkpoints = true;

    void validate() const;
};

/// Everything one experiment needs; defaults reproduce the reference parameter tables.
struct Config {
    ExperimentPlan plan;
    Scenario scenario;
    EnvConfig env;
    AgentHyperparams hyper;

    void validate() const;
};

/// Antenna counts accepted by a plan.
const std::vector<int>& allowed_antenna_counts();

/// key=value lines; '#' starts a comment; blank lines ignored. Missing keys keep defaults.
Config parse_config_text(const std::string& text);
Config parse_config(const std::string& path);

/// Applies one key=value assignment (shared by files, env vars and CLI flags).
void apply_setting(Config& config, const std::string& key, const std::string& value);

/// Overrides any known key from environment variables BEAMRL_<KEY> (upper case).
void apply_env_overrides(Config& config);

/// Every configurable key, in serialization order.
std::vector<std::string> config_keys();

/// Round-trippable key=value text.
std::string to_config_text(const Config& config);

std::vector<std::string> split_list(const std::string& text);

}  // namespace beamrl
