#include "beamrl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "beamrl/errors.hpp"

namespace beamrl {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        detail::throw_config(fmt::format("{}: expected a number, got '{}'", key, v));
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        detail::throw_config(fmt::format("{}: expected an integer, got '{}'", key, v));
    return out;
}

int to_int32(const std::string& key, const std::string& v) {
    const long long x = to_int(key, v);
    if (x < -2147483647LL || x > 2147483647LL) detail::throw_config(key + ": integer out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    detail::throw_config(fmt::format("{}: expected a boolean, got '{}'", key, v));
}

std::string num(double x) { return fmt::format("{}", x); }

template <typename T>
std::string join(const std::vector<T>& xs) {
    return fmt::format("{}", fmt::join(xs, ","));
}

struct Entry {
    std::string key;
    std::function<void(Config&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

#define BEAMRL_DOUBLE(KEY, FIELD)                                                     \
    Entry {                                                                           \
        KEY, [](Config& c, const std::string& v) { c.FIELD = to_double(KEY, v); },    \
            [](const Config& c) { return num(c.FIELD); }                              \
    }
#define BEAMRL_INT(KEY, FIELD)                                                        \
    Entry {                                                                           \
        KEY, [](Config& c, const std::string& v) { c.FIELD = to_int32(KEY, v); },     \
            [](const Config& c) { return std::to_string(c.FIELD); }                   \
    }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        // Plan
        {"scenario",
         [](Config& c, const std::string& v) {
             c.scenario = scenario_preset(v);
             c.plan.scenario = v;
         },
         [](const Config& c) { return c.plan.scenario; }},
        {"algo",
         [](Config& c, const std::string& v) { c.plan.algorithms = split_list(v); },
         [](const Config& c) { return join(c.plan.algorithms); }},
        {"antennas",
         [](Config& c, const std::string& v) {
             c.plan.antenna_counts.clear();
             for (const auto& s : split_list(v)) c.plan.antenna_counts.push_back(to_int32("antennas", s));
         },
         [](const Config& c) { return join(c.plan.antenna_counts); }},
        {"seeds",
         [](Config& c, const std::string& v) {
             c.plan.seeds.clear();
             for (const auto& s : split_list(v)) {
                 const long long x = to_int("seeds", s);
                 if (x < 0) detail::throw_config("seeds: seeds must be non-negative");
                 c.plan.seeds.push_back(static_cast<std::uint64_t>(x));
             }
         },
         [](const Config& c) { return join(c.plan.seeds); }},
        BEAMRL_INT("episodes", plan.episodes),
        BEAMRL_INT("eval_episodes", plan.eval_episodes),
        {"out", [](Config& c, const std::string& v) { c.plan.output_dir = v; },
         [](const Config& c) { return c.plan.output_dir; }},
        {"format", [](Config& c, const std::string& v) { c.plan.format = v; },
         [](const Config& c) { return c.plan.format; }},
        BEAMRL_INT("jobs", plan.jobs),
        {"checkpoints", [](Config& c, const std::string& v) { c.plan.checkpoints = to_bool("checkpoints", v); },
         [](const Config& c) { return std::string(c.plan.checkpoints ? "true" : "false"); }},
        // Scenario
        BEAMRL_DOUBLE("carrier_freq_hz", scenario.carrier_freq_hz),
        BEAMRL_DOUBLE("cell_radius_m", scenario.cell_radius_m),
        BEAMRL_DOUBLE("inter_site_distance_m", scenario.inter_site_distance_m),
        BEAMRL_INT("n_paths", scenario.n_paths),
        BEAMRL_DOUBLE("p_los", scenario.p_los),
        BEAMRL_DOUBLE("ue_speed_kmh", scenario.ue_speed_kmh),
        BEAMRL_DOUBLE("frame_duration_s", scenario.frame_duration_s),
        BEAMRL_DOUBLE("noise_power_dbm", scenario.noise_power_dbm),
        {"bandwidth_hz",
         [](Config& c, const std::string& v) {
             c.scenario.noise_power_dbm = thermal_noise_dbm(to_double("bandwidth_hz", v));
         },
         nullptr},
        BEAMRL_DOUBLE("tx_antenna_gain_dbi", scenario.tx_antenna_gain_dbi),
        BEAMRL_DOUBLE("ue_antenna_gain_dbi", scenario.ue_antenna_gain_dbi),
        BEAMRL_DOUBLE("max_bs_power_w", scenario.max_bs_power_w),
        BEAMRL_DOUBLE("antenna_spacing_wavelengths", scenario.antenna_spacing_wavelengths),
        BEAMRL_DOUBLE("los_exponent", scenario.los_exponent),
        BEAMRL_DOUBLE("nlos_exponent", scenario.nlos_exponent),
        BEAMRL_DOUBLE("max_turn_rad", scenario.max_turn_rad),
        // Environment
        BEAMRL_INT("num_bs", env.num_bs),
        BEAMRL_INT("ues_per_bs", env.ues_per_bs),
        BEAMRL_INT("horizon", env.horizon),
        BEAMRL_DOUBLE("gamma_cutoff_db", env.gamma_cutoff_db),
        BEAMRL_DOUBLE("gamma0_db", env.gamma0_db),
        BEAMRL_DOUBLE("power_floor_dbm", env.power_floor_dbm),
        BEAMRL_DOUBLE("pc_limit", env.pc_limit_db),
        BEAMRL_DOUBLE("ic_limit", env.ic_limit_db),
        BEAMRL_INT("beam_limit_multiplier", env.beam_limit_multiplier),
        // Agents
        BEAMRL_DOUBLE("discount", hyper.discount),
        BEAMRL_DOUBLE("tau", hyper.tau),
        BEAMRL_DOUBLE("lr", hyper.lr),
        BEAMRL_INT("width", hyper.width),
        BEAMRL_INT("depth", hyper.depth),
        BEAMRL_INT("batch_ddpg", hyper.batch_ddpg),
        BEAMRL_INT("batch_meta", hyper.batch_meta),
        BEAMRL_INT("batch_controller", hyper.batch_controller),
        BEAMRL_INT("batch_dqn", hyper.batch_dqn),
        BEAMRL_INT("c", hyper.hierarchy_period),
        BEAMRL_DOUBLE("goal_penalty_weight", hyper.goal_penalty_weight),
        BEAMRL_DOUBLE("noise_scale", hyper.noise_scale),
        {"noise",
         [](Config& c, const std::string& v) {
             if (v == "gaussian")
                 c.hyper.noise = NoiseKind::Gaussian;
             else if (v == "ou")
                 c.hyper.noise = NoiseKind::OrnsteinUhlenbeck;
             else
                 detail::throw_config("noise: expected 'gaussian' or 'ou', got '" + v + "'");
         },
         [](const Config& c) { return std::string(c.hyper.noise == NoiseKind::Gaussian ? "gaussian" : "ou"); }},
        BEAMRL_DOUBLE("ou_theta", hyper.ou_theta),
        BEAMRL_DOUBLE("epsilon_start", hyper.epsilon_start),
        BEAMRL_DOUBLE("epsilon_end", hyper.epsilon_end),
        BEAMRL_DOUBLE("qlearning_lr", hyper.qlearning_lr),
        {"replay_capacity",
         [](Config& c, const std::string& v) {
             const long long x = to_int("replay_capacity", v);
             if (x < 1) detail::throw_config("replay_capacity: must be >= 1");
             c.hyper.replay_capacity = static_cast<std::size_t>(x);
         },
         [](const Config& c) { return std::to_string(c.hyper.replay_capacity); }},
        {"optimizer",
         [](Config& c, const std::string& v) {
             if (v == "adam")
                 c.hyper.optimizer = OptimizerKind::Adam;
             else if (v == "sgd")
                 c.hyper.optimizer = OptimizerKind::Sgd;
             else
                 detail::throw_config("optimizer: expected 'adam' or 'sgd', got '" + v + "'");
         },
         [](const Config& c) { return std::string(c.hyper.optimizer == OptimizerKind::Adam ? "adam" : "sgd"); }},
        BEAMRL_INT("n_prb_total", hyper.n_prb_total),
        BEAMRL_INT("n_prb_allocated", hyper.n_prb_allocated),
    };
    return table;
}

#undef BEAMRL_DOUBLE
#undef BEAMRL_INT

const Entry* find_entry(const std::string& key) {
    // Aliases for the symbols used in the parameter tables.
    std::string k = key;
    if (k == "alpha") k = "discount";
    if (k == "hierarchy_period" || k == "c_data") k = "c";
    if (k == "algorithms") k = "algo";
    for (const auto& e : entries())
        if (e.key == k) return &e;
    return nullptr;
}

}  // namespace

const std::vector<int>& allowed_antenna_counts() {
    static const std::vector<int> counts{1, 4, 8, 16, 32, 64};
    return counts;
}

void ExperimentPlan::validate() const {
    auto fail = [](const std::string& what) { detail::throw_config("plan: " + what); };
    if (algorithms.empty()) fail("at least one algorithm required");
    for (const auto& a : algorithms)
        if (!is_algorithm(a)) fail("unknown algorithm '" + a + "'");
    if (antenna_counts.empty()) fail("at least one antenna count required");
    for (int m : antenna_counts) {
        const auto& ok = allowed_antenna_counts();
        if (std::find(ok.begin(), ok.end(), m) == ok.end())
            fail(fmt::format("antenna count {} not in {{1,4,8,16,32,64}}", m));
    }
    if (seeds.empty()) fail("at least one seed required");
    if (episodes < 1) fail("episodes must be >= 1");
    if (eval_episodes < 1) fail("eval_episodes must be >= 1");
    if (format != "csv" && format != "json") fail("format must be 'csv' or 'json'");
    if (jobs < 1) fail("jobs must be >= 1");
    bool known = false;
    for (const auto& s : scenario_preset_names()) known = known || s == scenario;
    if (!known) fail("unknown scenario preset '" + scenario + "'");
}

void Config::validate() const {
    plan.validate();
    scenario.validate();
    env.validate();
    hyper.validate();
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void apply_setting(Config& config, const std::string& key, const std::string& value) {
    const Entry* e = find_entry(trim(key));
    if (!e) detail::throw_config("unknown configuration key '" + key + "'");
    e->set(config, trim(value));
}

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::vector<std::pair<int, std::pair<std::string, std::string>>> settings;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            detail::throw_config(fmt::format("line {}: expected key=value, got '{}'", lineno, line));
        settings.push_back({lineno, {trim(line.substr(0, eq)), trim(line.substr(eq + 1))}});
    }
    // The scenario preset resets every scenario field, so it goes first.
    std::stable_partition(settings.begin(), settings.end(),
                          [](const auto& s) { return s.second.first == "scenario"; });
    for (const auto& [no, kv] : settings) {
        try {
            apply_setting(cfg, kv.first, kv.second);
        } catch (const ConfigError& e) {
            detail::throw_config(fmt::format("line {}: {}", no, e.what()));
        }
    }
    cfg.validate();
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::throw_config("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& e : entries()) keys.push_back(e.key);
    return keys;
}

void apply_env_overrides(Config& config) {
    auto upper = [](std::string s) {
        for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return s;
    };
    // scenario first: it resets the scenario fields
    std::vector<std::string> keys = config_keys();
    std::stable_partition(keys.begin(), keys.end(), [](const std::string& k) { return k == "scenario"; });
    for (const auto& key : keys) {
        const std::string var = "BEAMRL_" + upper(key);
        if (const char* v = std::getenv(var.c_str())) {
            try {
                apply_setting(config, key, v);
            } catch (const ConfigError& e) {
                detail::throw_config(var + ": " + e.what());
            }
        }
    }
}

std::string to_config_text(const Config& config) {
    std::string out;
    for (const auto& e : entries()) {
        if (!e.get) continue;
        out += e.key + "=" + e.get(config) + "\n";
    }
    return out;
}

}  // namespace beamrl
