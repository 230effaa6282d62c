#include "beamrl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

namespace beamrl {

void AgentHyperparams::validate() const {
    auto fail = [](const std::string& what) { detail::throw_config("agent: " + what); };
    if (!(discount > 0 && discount < 1)) fail("discount must lie in (0, 1)");
    if (!(tau >= 0 && tau <= 1)) fail("tau must lie in [0, 1]");
    if (!(lr > 0)) fail("lr must be > 0");
    if (width < 1 || depth < 1) fail("network width and depth must be >= 1");
    if (batch_ddpg < 1 || batch_meta < 1 || batch_controller < 1 || batch_dqn < 1)
        fail("batch sizes must be >= 1");
    if (hierarchy_period < 1) fail("hierarchy period c must be >= 1");
    if (!(goal_penalty_weight >= 0)) fail("goal_penalty_weight must be >= 0");
    if (!(noise_scale >= 0)) fail("noise_scale must be >= 0");
    if (!(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= 1))
        fail("epsilon schedule must lie in [0, 1]");
    if (!(qlearning_lr > 0)) fail("qlearning_lr must be > 0");
    if (replay_capacity < 1) fail("replay_capacity must be >= 1");
    if (n_prb_total < 1 || n_prb_allocated < 1 || n_prb_allocated > n_prb_total)
        fail("PRB counts must satisfy 1 <= allocated <= total");
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(const Environment& env) {
    const auto& topo = env.topology();
    if (topo.bs_positions.size() >= 2) {
        bs_l_ = topo.bs_positions[0];
        bs_b_ = topo.bs_positions[1];
    } else {
        bs_l_ = {0.0, 0.0};
        bs_b_ = {env.scenario().inter_site_distance_m, 0.0};
    }
    radius_ = env.scenario().serving_disc_radius_m();
    power_mid_ = (env.power_floor_dbm() + env.max_power_dbm()) / 2.0;
    power_half_ = (env.max_power_dbm() - env.power_floor_dbm()) / 2.0;
    const int m = env.codebook().size();
    beam_mid_ = (m - 1) / 2.0;
    beam_half_ = std::max(1.0, m / 2.0);
    const int ues = env.config().num_bs * env.config().ues_per_bs;
    max_reward_ = std::max(1.0, ues * env.sinr_policy().gamma_max_db());
    low_ = env.action_low();
    high_ = env.action_high();
}

Eigen::VectorXd Normalizer::state(const StateVector& s) const {
    Eigen::VectorXd v(kStateSize);
    v << (s[0] - bs_l_.x) / radius_, (s[1] - bs_l_.y) / radius_, (s[2] - bs_b_.x) / radius_,
        (s[3] - bs_b_.y) / radius_, (s[4] - power_mid_) / power_half_,
        (s[5] - power_mid_) / power_half_, (s[6] - beam_mid_) / beam_half_,
        (s[7] - beam_mid_) / beam_half_;
    return v;
}

Eigen::VectorXd Normalizer::action(const Action& a) const {
    Eigen::VectorXd v(kActionSize);
    for (int k = 0; k < kActionSize; ++k)
        v[k] = 2.0 * (a[static_cast<std::size_t>(k)] - low_[static_cast<std::size_t>(k)]) /
                   (high_[static_cast<std::size_t>(k)] - low_[static_cast<std::size_t>(k)]) -
               1.0;
    return v;
}

Eigen::VectorXd Normalizer::action_slope() const {
    Eigen::VectorXd v(kActionSize);
    for (int k = 0; k < kActionSize; ++k)
        v[k] = 2.0 / (high_[static_cast<std::size_t>(k)] - low_[static_cast<std::size_t>(k)]);
    return v;
}

double Normalizer::reward_scale(double discount) const { return (1.0 - discount) / max_reward_; }

namespace {

StepRecord record_of(const StepOutcome& out) {
    return {out.reward, out.info.bs_effective_db, out.info.powers_dbm, out.info.sinr_db};
}

double mean_or_nan(double sum, int count) {
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

// ---------------------------------------------------------------------------

double fpa_power(const Scenario& scenario, int n_prb_total, int n_prb_allocated) {
    require(n_prb_total >= 1 && n_prb_allocated >= 1 && n_prb_allocated <= n_prb_total,
            "fpa_power: PRB counts must satisfy 1 <= allocated <= total");
    return scenario.max_bs_power_dbm() - 10.0 * std::log10(n_prb_total) +
           10.0 * std::log10(n_prb_allocated);
}

FpaAgent::FpaAgent(const Scenario& scenario, const AgentHyperparams& hyper)
    : power_dbm_(fpa_power(scenario, hyper.n_prb_total, hyper.n_prb_allocated)) {}

EpisodeResult FpaAgent::run_episode(Environment& env, std::uint64_t env_seed, bool learn) {
    EpisodeResult res;
    env.reset(env_seed);
    const Action a{power_dbm_, power_dbm_, 0.0, 0.0};
    while (true) {
        const StepOutcome out = env.step(a);
        res.ret += out.reward;
        ++res.steps;
        res.records.push_back(record_of(out));
        if (out.done) {
            res.aborted = out.aborted;
            break;
        }
    }
    res.loss = std::numeric_limits<double>::quiet_NaN();
    if (learn) ++episodes_trained_;
    return res;
}

// ---------------------------------------------------------------------------

std::vector<DiscreteAction> discrete_action_set(int m_antennas) {
    // Hold comes first so untrained argmax ties keep the current powers and beams.
    const double steps[] = {0.0, -1.0, 1.0, -3.0, 3.0};
    std::vector<int> beam_steps{0};
    if (m_antennas > 1) beam_steps = {0, -1, 1};
    std::vector<DiscreteAction> out;
    for (double pl : steps)
        for (double pb : steps)
            for (int bl : beam_steps)
                for (int bb : beam_steps) out.push_back({pl, pb, bl, bb});
    return out;
}

QTable::QTable(int num_actions) : num_actions_(num_actions) {
    require(num_actions >= 1, "QTable: need at least one action");
}

double QTable::get(std::uint64_t state, int action) const {
    require(action >= 0 && action < num_actions_, "QTable::get: action out of range");
    const auto it = table_.find(state);
    return it == table_.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
}

void QTable::set(std::uint64_t state, int action, double value) {
    require(action >= 0 && action < num_actions_, "QTable::set: action out of range");
    require(std::isfinite(value), "QTable::set: non-finite value");
    auto [it, inserted] = table_.try_emplace(state, static_cast<std::size_t>(num_actions_), 0.0);
    it->second[static_cast<std::size_t>(action)] = value;
}

double QTable::max_value(std::uint64_t state) const {
    const auto it = table_.find(state);
    if (it == table_.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

int QTable::argmax(std::uint64_t state) const {
    const auto it = table_.find(state);
    if (it == table_.end()) return 0;
    return static_cast<int>(std::max_element(it->second.begin(), it->second.end()) - it->second.begin());
}

void qlearning_update(QTable& table, std::uint64_t s, int a, double r, std::uint64_t s_next,
                      double lr, double discount, bool done) {
    require(lr >= 0.0, "qlearning_update: learning rate must be >= 0");
    if (lr == 0.0) return;
    const double bootstrap = done ? 0.0 : table.max_value(s_next);
    const double q = table.get(s, a);
    table.set(s, a, q + lr * (r + discount * bootstrap - q));
}

std::uint64_t discretize_state(const StateVector& s, const Environment& env) {
    const auto& topo = env.topology();
    const double radius = env.scenario().serving_disc_radius_m();
    auto pos_bin = [radius](double v, double centre) {
        const int b = static_cast<int>(std::floor((v - centre + radius) / (2.0 * radius) * 8.0));
        return static_cast<std::uint64_t>(std::clamp(b, 0, 7));
    };
    const double lo = env.power_floor_dbm();
    const double hi = env.max_power_dbm();
    auto power_bin = [lo, hi](double p) {
        const int b = static_cast<int>(std::floor((p - lo) / (hi - lo) * 4.0));
        return static_cast<std::uint64_t>(std::clamp(b, 0, 3));
    };
    const Point bl = topo.bs_positions[0];
    const Point bb = topo.bs_positions[1];
    std::uint64_t key = 0;
    key = key * 8 + pos_bin(s[0], bl.x);
    key = key * 8 + pos_bin(s[1], bl.y);
    key = key * 8 + pos_bin(s[2], bb.x);
    key = key * 8 + pos_bin(s[3], bb.y);
    key = key * 4 + power_bin(s[4]);
    key = key * 4 + power_bin(s[5]);
    key = key * 256 + static_cast<std::uint64_t>(s[6]);
    key = key * 256 + static_cast<std::uint64_t>(s[7]);
    return key;
}

QLearningAgent::QLearningAgent(const EnvConfig& env_config, const AgentHyperparams& hyper,
                               std::uint64_t seed)
    : hyper_(hyper),
      actions_(discrete_action_set(env_config.m_antennas)),
      table_(static_cast<int>(actions_.size())),
      rng_(derive_seed(seed, "qlearning")) {}

EpisodeResult QLearningAgent::run_episode(Environment& env, std::uint64_t env_seed, bool learn) {
    EpisodeResult res;
    StateVector s = env.reset(env_seed);
    const double eps = learn ? hyper_.epsilon_start + (hyper_.epsilon_end - hyper_.epsilon_start) * progress()
                             : 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> any(0, static_cast<int>(actions_.size()) - 1);
    while (true) {
        const std::uint64_t key = discretize_state(s, env);
        int a = table_.argmax(key);
        if (learn && unit(rng_) < eps) a = any(rng_);
        const auto& da = actions_[static_cast<std::size_t>(a)];
        const StepOutcome out = env.step(env.relative_action(da.dpower_l_db, da.dpower_b_db, da.dbeam_l, da.dbeam_b));
        if (learn) {
            qlearning_update(table_, key, a, out.reward, discretize_state(out.next_state, env),
                             hyper_.qlearning_lr, hyper_.discount, out.aborted);
        }
        res.ret += out.reward;
        ++res.steps;
        res.records.push_back(record_of(out));
        s = out.next_state;
        if (out.done) {
            res.aborted = out.aborted;
            break;
        }
    }
    res.loss = std::numeric_limits<double>::quiet_NaN();
    if (learn) ++episodes_trained_;
    return res;
}

// ---------------------------------------------------------------------------

double dqn_target(double r, const std::vector<double>& next_q_values, double discount, bool done) {
    require(!next_q_values.empty(), "dqn_target: empty next-state value vector");
    if (done) return r;
    return r + discount * *std::max_element(next_q_values.begin(), next_q_values.end());
}

DqnAgent::DqnAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed)
    : hyper_(hyper),
      norm_(env),
      actions_(discrete_action_set(env.config().m_antennas)),
      q_([&] {
          Rng init(derive_seed(seed, "dqn-init"));
          return make_mlp({kStateSize, hyper.width, hyper.depth, static_cast<int>(actions_.size())}, init);
      }()),
      q_target_(q_),
      opt_(q_, hyper.optimizer, hyper.lr),
      buffer_(hyper.replay_capacity, derive_seed(seed, "dqn-replay")),
      rng_(derive_seed(seed, "dqn-explore")),
      reward_scale_(norm_.reward_scale(hyper.discount)) {}

int DqnAgent::greedy_action(const StateVector& s) const {
    const Eigen::VectorXd q = forward_one(q_, norm_.state(s));
    Eigen::Index best = 0;
    q.maxCoeff(&best);
    return static_cast<int>(best);
}

std::optional<double> DqnAgent::train_step() {
    const auto batch = static_cast<std::size_t>(hyper_.batch_dqn);
    if (buffer_.size() < batch) return std::nullopt;
    const auto samples = buffer_.sample(batch);
    const auto n = static_cast<Eigen::Index>(batch);
    Eigen::MatrixXd s(kStateSize, n), s_next(kStateSize, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.col(i) = norm_.state(samples[static_cast<std::size_t>(i)].state);
        s_next.col(i) = norm_.state(samples[static_cast<std::size_t>(i)].next_state);
    }
    const Eigen::MatrixXd q_next = forward(q_target_, s_next);
    ForwardCache cache;
    const Eigen::MatrixXd q = forward(q_, s, cache);
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = samples[static_cast<std::size_t>(i)];
        const double y = t.done ? reward_scale_ * t.reward
                                : reward_scale_ * t.reward + hyper_.discount * q_next.col(i).maxCoeff();
        const double err = q(t.discrete_action, i) - y;
        loss += err * err;
        upstream(t.discrete_action, i) = 2.0 * err / static_cast<double>(n);
    }
    opt_.step(q_, backward(q_, cache, upstream));
    soft_update(q_target_, q_, hyper_.tau);
    return loss / static_cast<double>(n);
}

EpisodeResult DqnAgent::run_episode(Environment& env, std::uint64_t env_seed, bool learn) {
    EpisodeResult res;
    StateVector s = env.reset(env_seed);
    const double eps = learn ? hyper_.epsilon_start + (hyper_.epsilon_end - hyper_.epsilon_start) * progress()
                             : 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> any(0, static_cast<int>(actions_.size()) - 1);
    double loss_sum = 0.0;
    int updates = 0;
    while (true) {
        int a = greedy_action(s);
        if (learn && unit(rng_) < eps) a = any(rng_);
        const auto& da = actions_[static_cast<std::size_t>(a)];
        const Action applied = env.relative_action(da.dpower_l_db, da.dpower_b_db, da.dbeam_l, da.dbeam_b);
        const StepOutcome out = env.step(applied);
        if (learn) {
            Transition t;
            t.state = s;
            t.action = applied;
            t.discrete_action = a;
            t.reward = out.reward;
            t.next_state = out.next_state;
            t.done = out.aborted;
            buffer_.push(t);
            if (auto l = train_step()) {
                loss_sum += *l;
                ++updates;
            }
        }
        res.ret += out.reward;
        ++res.steps;
        res.records.push_back(record_of(out));
        s = out.next_state;
        if (out.done) {
            res.aborted = out.aborted;
            break;
        }
    }
    res.loss = mean_or_nan(loss_sum, updates);
    if (learn) ++episodes_trained_;
    return res;
}

void DqnAgent::save(const std::string& prefix) const { save_params(q_, prefix + "_q.txt"); }

// ---------------------------------------------------------------------------

std::vector<std::string> algorithm_names() { return {"fpa", "qlearning", "dqn", "ddpg", "hddpg"}; }

bool is_algorithm(std::string_view name) {
    for (const auto& a : algorithm_names())
        if (a == name) return true;
    return false;
}

std::unique_ptr<Agent> make_agent(std::string_view algorithm, const Environment& env,
                                  const AgentHyperparams& hyper, std::uint64_t seed) {
    hyper.validate();
    if (algorithm == "fpa") return std::make_unique<FpaAgent>(env.scenario(), hyper);
    if (algorithm == "qlearning") return std::make_unique<QLearningAgent>(env.config(), hyper, seed);
    if (algorithm == "dqn") return std::make_unique<DqnAgent>(env, hyper, seed);
    if (algorithm == "ddpg") return std::make_unique<DdpgAgent>(env, hyper, seed);
    if (algorithm == "hddpg") return std::make_unique<HddpgAgent>(env, hyper, seed);
    detail::throw_config("unknown algorithm '" + std::string(algorithm) + "'");
}

}  // namespace beamrl
