#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "beamrl/environment.hpp"
#include "beamrl/neuralnet.hpp"
#include "beamrl/replay_buffer.hpp"

namespace beamrl {

enum class NoiseKind { Gaussian, OrnsteinUhlenbeck };

struct AgentHyperparams {
    double discount = 0.9;
    double tau = 0.1;
    double lr = 1e-4;
    int width = 28;
    int depth = 4;
    int batch_ddpg = 128;
    int batch_meta = 64;
    int batch_controller = 64;
    int batch_dqn = 128;
    int hierarchy_period = 3;
    double goal_penalty_weight = 1.0;
    /// Initial exploration noise as a fraction of each action range; decays linearly to 0.
    double noise_scale = 0.1;
    NoiseKind noise = NoiseKind::Gaussian;
    double ou_theta = 0.15;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double qlearning_lr = 0.1;
    std::size_t replay_capacity = 10000;
    OptimizerKind optimizer = OptimizerKind::Adam;
    int n_prb_total = 100;
    int n_prb_allocated = 100;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Shared episode bookkeeping

struct StepRecord {
    double reward = 0.0;
    std::vector<double> bs_effective_db;
    std::vector<double> powers_dbm;
    std::vector<double> sinr_db;
};

struct EpisodeResult {
    int steps = 0;
    double ret = 0.0;   // sum of environment rewards
    double loss = 0.0;  // mean training loss over the episode, NaN if no update ran
    bool aborted = false;
    std::vector<StepRecord> records;
};

/// Maps raw observations and actions onto roughly [-1, 1] network inputs.
class Normalizer {
public:
    explicit Normalizer(const Environment& env);

    Eigen::VectorXd state(const StateVector& s) const;
    Eigen::VectorXd action(const Action& a) const;
    /// d(normalized action)/d(raw action), per component.
    Eigen::VectorXd action_slope() const;
    const Action& low() const { return low_; }
    const Action& high() const { return high_; }
    /// Per-step reward -> critic target units, (1 - discount) / max reward.
    double reward_scale(double discount) const;

private:
    Point bs_l_, bs_b_;
    double radius_;
    double power_mid_, power_half_;
    double beam_mid_, beam_half_;
    double max_reward_;
    Action low_{}, high_{};
};

/// Common train/evaluate interface for every policy.
class Agent {
public:
    virtual ~Agent() = default;
    virtual std::string name() const = 0;
    /// Sets the schedule length used by exploration decay.
    void begin_training(int total_episodes) { total_episodes_ = std::max(1, total_episodes); }
    /// learn=false runs the greedy policy without exploration or updates.
    virtual EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) = 0;
    /// Writes checkpoint files named prefix + "_<net>.txt"; no-op for table-free agents.
    virtual void save(const std::string& prefix) const { (void)prefix; }
    int episodes_trained() const { return episodes_trained_; }

protected:
    double progress() const {
        return std::min(1.0, static_cast<double>(episodes_trained_) / total_episodes_);
    }
    int total_episodes_ = 1;
    int episodes_trained_ = 0;
};

// ---------------------------------------------------------------------------
// Fixed power allocation

/// P_max(dBm) - 10 log10(N_PRB) + 10 log10(N_PRB,a).
double fpa_power(const Scenario& scenario, int n_prb_total, int n_prb_allocated);

class FpaAgent : public Agent {
public:
    FpaAgent(const Scenario& scenario, const AgentHyperparams& hyper);
    std::string name() const override { return "fpa"; }
    EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) override;
    double power_dbm() const { return power_dbm_; }

private:
    double power_dbm_;
};

// ---------------------------------------------------------------------------
// Discrete action set shared by Q-learning and DQN

struct DiscreteAction {
    double dpower_l_db = 0.0;
    double dpower_b_db = 0.0;
    int dbeam_l = 0;
    int dbeam_b = 0;
};

/// Power steps {0,-1,+1,-3,+3} dB for each BS; beam steps {0,-1,+1} when M > 1. Index 0 holds.
std::vector<DiscreteAction> discrete_action_set(int m_antennas);

// ---------------------------------------------------------------------------
// Tabular Q-learning

class QTable {
public:
    explicit QTable(int num_actions);
    double get(std::uint64_t state, int action) const;
    void set(std::uint64_t state, int action, double value);
    double max_value(std::uint64_t state) const;
    /// Lowest index among maximizers.
    int argmax(std::uint64_t state) const;
    int num_actions() const { return num_actions_; }
    std::size_t num_states() const { return table_.size(); }

private:
    int num_actions_;
    std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

/// Q(s,a) += lr * (r + discount * max_a' Q(s',a') - Q(s,a)); the bootstrap is 0 when done.
void qlearning_update(QTable& table, std::uint64_t s, int a, double r, std::uint64_t s_next,
                      double lr, double discount, bool done);

/// Positions on an 8x8 grid per serving disc, powers in 4 levels, beams native.
std::uint64_t discretize_state(const StateVector& s, const Environment& env);

class QLearningAgent : public Agent {
public:
    QLearningAgent(const EnvConfig& env_config, const AgentHyperparams& hyper, std::uint64_t seed);
    std::string name() const override { return "qlearning"; }
    EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) override;
    const QTable& table() const { return table_; }

private:
    AgentHyperparams hyper_;
    std::vector<DiscreteAction> actions_;
    QTable table_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// DQN

/// r when done, else r + discount * max(next_q_values).
double dqn_target(double r, const std::vector<double>& next_q_values, double discount, bool done);

class DqnAgent : public Agent {
public:
    DqnAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed);
    std::string name() const override { return "dqn"; }
    EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) override;
    void save(const std::string& prefix) const override;

    /// Greedy action index; epsilon = 0 path.
    int greedy_action(const StateVector& s) const;
    const MlpParams& q_network() const { return q_; }
    MlpParams& q_network() { return q_; }
    std::optional<double> train_step();

private:
    AgentHyperparams hyper_;
    Normalizer norm_;
    std::vector<DiscreteAction> actions_;
    MlpParams q_, q_target_;
    Optimizer opt_;
    ReplayBuffer buffer_;
    Rng rng_;
    double reward_scale_;
};

// ---------------------------------------------------------------------------
// DDPG

/// Actor, critic and their targets plus replay and exploration noise.
class DdpgLearner {
public:
    DdpgLearner(const Normalizer& norm, const AgentHyperparams& hyper, int batch, std::uint64_t seed);

    /// mu(s) plus exploration noise of the given scale, clamped to action bounds.
    Action act(const StateVector& s, double noise_scale);
    void reset_noise();
    void store(const Transition& t) { buffer_.push(t); }
    /// Critic loss, or nullopt when the buffer holds fewer than batch transitions.
    std::optional<double> train_step();

    const MlpParams& actor() const { return actor_; }
    const MlpParams& critic() const { return critic_; }
    const MlpParams& actor_target() const { return actor_target_; }
    const MlpParams& critic_target() const { return critic_target_; }
    MlpParams& actor() { return actor_; }
    MlpParams& critic() { return critic_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    int batch() const { return batch_; }

private:
    const Normalizer norm_;
    AgentHyperparams hyper_;
    int batch_;
    MlpParams actor_, critic_, actor_target_, critic_target_;
    Optimizer actor_opt_, critic_opt_;
    ReplayBuffer buffer_;
    Rng noise_rng_;
    Eigen::VectorXd ou_state_;
    double reward_scale_;
};

/// Gradient of -mean_i Q(s_i, mu(s_i)) with respect to the actor parameters.
/// states holds normalized states column-wise.
GradientSet actor_gradient(const MlpParams& actor, const MlpParams& critic,
                           const Eigen::MatrixXd& states, const Normalizer& norm);

/// Normalized actions for a batch of raw actor outputs.
Eigen::MatrixXd normalize_actions(const Eigen::MatrixXd& raw, const Normalizer& norm);

class DdpgAgent : public Agent {
public:
    DdpgAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed);
    std::string name() const override { return "ddpg"; }
    EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) override;
    void save(const std::string& prefix) const override;
    DdpgLearner& learner() { return learner_; }

private:
    AgentHyperparams hyper_;
    DdpgLearner learner_;
};

// ---------------------------------------------------------------------------
// Hierarchical DDPG

struct HddpgEpisodeStats {
    int meta_transitions = 0;
    std::vector<double> meta_rewards;
};

class HddpgAgent : public Agent {
public:
    HddpgAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed);
    std::string name() const override { return "hddpg"; }
    EpisodeResult run_episode(Environment& env, std::uint64_t env_seed, bool learn) override;
    void save(const std::string& prefix) const override;

    DdpgLearner& controller() { return controller_; }
    DdpgLearner& meta() { return meta_; }
    const HddpgEpisodeStats& last_stats() const { return stats_; }

private:
    AgentHyperparams hyper_;
    DdpgLearner controller_;
    DdpgLearner meta_;
    HddpgEpisodeStats stats_;
};

/// Meta reward: sum of the per-step rewards collected over one goal period.
double meta_reward(const std::vector<double>& step_rewards);

std::vector<std::string> algorithm_names();
bool is_algorithm(std::string_view name);
std::unique_ptr<Agent> make_agent(std::string_view algorithm, const Environment& env,
                                  const AgentHyperparams& hyper, std::uint64_t seed);

}  // namespace beamrl
