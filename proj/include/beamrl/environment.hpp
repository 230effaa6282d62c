#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "beamrl/beamcode.hpp"
#include "beamrl/channel.hpp"

namespace beamrl {

inline constexpr int kStateSize = 8;
inline constexpr int kActionSize = 4;

/// Observation: UE positions of the serving BS l and interfering BS b (m),
/// their transmit powers (dBm) and their beam indices.
using StateVector = std::array<double, kStateSize>;

/// a0/a1: requested powers of BS l and BS b (dBm); a2/a3: raw beam controls.
using Action = std::array<double, kActionSize>;

/// SINR thresholds. The target uses log10(M), the cap log2(M).
struct SinrPolicy {
    double gamma_cutoff_db = 4.0;
    double gamma0_db = 5.0;
    int m_antennas = 1;

    double gamma_target_db() const;
    double gamma_max_db() const;
    /// Capped at gamma_max and floored at 0 dB.
    double effective_db(double sinr_db) const;
};

struct EnvConfig {
    int num_bs = 2;
    int ues_per_bs = 1;
    int m_antennas = 1;
    int horizon = 50;
    double gamma_cutoff_db = 4.0;
    double gamma0_db = 5.0;
    double power_floor_dbm = 0.0;
    double pc_limit_db = 40.0;  // span of the power-control action
    double ic_limit_db = 40.0;  // span of the interference-coordination action
    int beam_limit_multiplier = 1;

    void validate() const;
};

struct SinrReport {
    std::vector<double> sinr_linear;   // per UE
    std::vector<double> sinr_db;       // per UE
    std::vector<double> effective_db;  // per UE, capped and floored
    std::vector<double> bs_effective_db;  // per BS, sum over its UEs
    std::vector<double> powers_dbm;    // applied, per BS
    std::vector<int> beams;            // applied, per BS
};

struct StepOutcome {
    StateVector next_state{};
    double reward = 0.0;
    bool done = false;
    bool aborted = false;  // SINR cutoff violated (terminal), as opposed to horizon reached
    SinrReport info;
};

/// Powers and beams after clamping an action.
struct AppliedControls {
    double power_l_dbm = 0.0;
    double power_b_dbm = 0.0;
    int beam_l = 0;
    int beam_b = 0;
};

/// Episodic downlink environment: BS 0 is the serving BS l, BS 1 the
/// interfering BS b. Additional BSs (if any) stay at their reset controls.
class Environment {
public:
    Environment(Scenario scenario, EnvConfig config);

    StateVector reset(std::uint64_t seed);
    StepOutcome step(const Action& action);

    /// Clamps powers to [floor, P_max] and floors the raw beam controls.
    AppliedControls apply_action(const Action& action) const;

    /// Absolute action reproducing the current controls shifted by the given
    /// power deltas (dB) and circular beam steps.
    Action relative_action(double dpower_l_db, double dpower_b_db, int dbeam_l, int dbeam_b) const;

    const Scenario& scenario() const { return scenario_; }
    const EnvConfig& config() const { return config_; }
    const Codebook& codebook() const { return codebook_; }
    const SinrPolicy& sinr_policy() const { return policy_; }
    const Topology& topology() const { return topology_; }
    const ChannelState& channel() const { return channel_; }
    const StateVector& state() const { return state_; }
    int time_step() const { return t_; }
    bool needs_reset() const { return !active_; }

    double max_power_dbm() const { return scenario_.max_bs_power_dbm(); }
    double power_floor_dbm() const { return config_.power_floor_dbm; }
    /// Upper bound of the raw beam control, k*M.
    double beam_control_limit() const;
    /// Per-component bounds of agent-emitted actions.
    Action action_low() const;
    Action action_high() const;

    /// SINR report for the current channel with the given controls.
    SinrReport evaluate(const std::vector<double>& powers_dbm, const std::vector<int>& beams) const;

private:
    StateVector observe() const;

    Scenario scenario_;
    EnvConfig config_;
    Codebook codebook_;
    SinrPolicy policy_;
    Topology topology_;
    ChannelState channel_;
    Rng mobility_rng_;
    std::vector<double> powers_dbm_;
    std::vector<int> beams_;
    StateVector state_{};
    int t_ = 0;
    bool active_ = false;
};

/// Controller reward: step_reward - weight * sum_k |goal_k - action_k|.
double hierarchical_reward(double step_reward, const std::vector<double>& goal,
                           const std::vector<double>& action, double weight = 1.0);
double hierarchical_reward(double step_reward, const Action& goal, const Action& action,
                           double weight = 1.0);

}  // namespace beamrl
