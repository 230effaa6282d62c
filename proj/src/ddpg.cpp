#include <algorithm>
#include <cmath>
#include <limits>

#include "beamrl/agents.hpp"
#include "beamrl/errors.hpp"

namespace beamrl {

namespace {

Eigen::VectorXd to_vector(const Action& a) {
    return Eigen::Map<const Eigen::VectorXd>(a.data(), kActionSize);
}

MlpParams make_actor(const Normalizer& norm, const AgentHyperparams& h, Rng& rng) {
    return make_mlp({kStateSize, h.width, h.depth, kActionSize}, rng, to_vector(norm.low()),
                    to_vector(norm.high()));
}

MlpParams make_critic(const AgentHyperparams& h, Rng& rng) {
    return make_mlp({kStateSize + kActionSize, h.width, h.depth, 1}, rng);
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
    Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

}  // namespace

Eigen::MatrixXd normalize_actions(const Eigen::MatrixXd& raw, const Normalizer& norm) {
    const Eigen::VectorXd slope = norm.action_slope();
    Eigen::MatrixXd out = raw;
    out.colwise() -= to_vector(norm.low());
    out = slope.asDiagonal() * out;
    out.array() -= 1.0;
    return out;
}

GradientSet actor_gradient(const MlpParams& actor, const MlpParams& critic,
                           const Eigen::MatrixXd& states, const Normalizer& norm) {
    const Eigen::Index n = states.cols();
    ForwardCache actor_cache, critic_cache;
    const Eigen::MatrixXd actions = forward(actor, states, actor_cache);
    forward(critic, stack(states, normalize_actions(actions, norm)), critic_cache);
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
    const GradientSet critic_grads = backward(critic, critic_cache, upstream);
    // Chain dQ/d(normalized action) through the normalization onto raw actions.
    const Eigen::MatrixXd dq_da =
        norm.action_slope().asDiagonal() * critic_grads.input.bottomRows(kActionSize);
    return backward(actor, actor_cache, dq_da);
}

DdpgLearner::DdpgLearner(const Normalizer& norm, const AgentHyperparams& hyper, int batch,
                         std::uint64_t seed)
    : norm_(norm),
      hyper_(hyper),
      batch_(batch),
      actor_([&] {
          Rng init(derive_seed(seed, "actor-init"));
          return make_actor(norm, hyper, init);
      }()),
      critic_([&] {
          Rng init(derive_seed(seed, "critic-init"));
          return make_critic(hyper, init);
      }()),
      actor_target_(actor_),
      critic_target_(critic_),
      actor_opt_(actor_, hyper.optimizer, hyper.lr),
      critic_opt_(critic_, hyper.optimizer, hyper.lr),
      buffer_(hyper.replay_capacity, derive_seed(seed, "replay")),
      noise_rng_(derive_seed(seed, "noise")),
      ou_state_(Eigen::VectorXd::Zero(kActionSize)),
      reward_scale_(norm.reward_scale(hyper.discount)) {}

void DdpgLearner::reset_noise() { ou_state_.setZero(); }

Action DdpgLearner::act(const StateVector& s, double noise_scale) {
    const Eigen::VectorXd mu = forward_one(actor_, norm_.state(s));
    Action a{};
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < kActionSize; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double range = norm_.high()[ks] - norm_.low()[ks];
        double noise = 0.0;
        if (noise_scale > 0.0) {
            const double w = gauss(noise_rng_);
            if (hyper_.noise == NoiseKind::OrnsteinUhlenbeck) {
                ou_state_[k] += -hyper_.ou_theta * ou_state_[k] + w;
                noise = noise_scale * range * ou_state_[k];
            } else {
                noise = noise_scale * range * w;
            }
        }
        // Beam upper bound is exclusive.
        const double hi = k < 2 ? norm_.high()[ks] : std::nextafter(norm_.high()[ks], norm_.low()[ks]);
        a[ks] = std::clamp(mu[k] + noise, norm_.low()[ks], hi);
    }
    return a;
}

std::optional<double> DdpgLearner::train_step() {
    const auto batch = static_cast<std::size_t>(batch_);
    if (buffer_.size() < batch) return std::nullopt;
    const auto samples = buffer_.sample(batch);
    const auto n = static_cast<Eigen::Index>(batch);

    Eigen::MatrixXd s(kStateSize, n), s_next(kStateSize, n), a(kActionSize, n);
    Eigen::VectorXd r(n), not_done(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = samples[static_cast<std::size_t>(i)];
        s.col(i) = norm_.state(t.state);
        s_next.col(i) = norm_.state(t.next_state);
        a.col(i) = norm_.action(t.action);
        r[i] = reward_scale_ * t.reward;
        not_done[i] = t.done ? 0.0 : 1.0;
    }

    // y = r + discount * Q'(s', mu'(s')), no bootstrap on terminal transitions.
    const Eigen::MatrixXd a_next = normalize_actions(forward(actor_target_, s_next), norm_);
    const Eigen::VectorXd q_next = forward(critic_target_, stack(s_next, a_next)).row(0).transpose();
    const Eigen::VectorXd y = r + hyper_.discount * not_done.cwiseProduct(q_next);

    ForwardCache critic_cache;
    const Eigen::VectorXd q = forward(critic_, stack(s, a), critic_cache).row(0).transpose();
    const Eigen::VectorXd err = q - y;
    const double loss = err.squaredNorm() / static_cast<double>(n);
    const Eigen::MatrixXd upstream = (2.0 / static_cast<double>(n)) * err.transpose();
    critic_opt_.step(critic_, backward(critic_, critic_cache, upstream));

    actor_opt_.step(actor_, actor_gradient(actor_, critic_, s, norm_));

    soft_update(critic_target_, critic_, hyper_.tau);
    soft_update(actor_target_, actor_, hyper_.tau);
    return loss;
}

// ---------------------------------------------------------------------------

namespace {

double current_noise(const AgentHyperparams& h, double progress) {
    return h.noise_scale * (1.0 - progress);
}

StepRecord record_of(const StepOutcome& out) {
    return {out.reward, out.info.bs_effective_db, out.info.powers_dbm, out.info.sinr_db};
}

}  // namespace

DdpgAgent::DdpgAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed)
    : hyper_(hyper), learner_(Normalizer(env), hyper, hyper.batch_ddpg, derive_seed(seed, "controller")) {}

EpisodeResult DdpgAgent::run_episode(Environment& env, std::uint64_t env_seed, bool learn) {
    EpisodeResult res;
    StateVector s = env.reset(env_seed);
    const double noise = learn ? current_noise(hyper_, progress()) : 0.0;
    learner_.reset_noise();
    double loss_sum = 0.0;
    int updates = 0;
    while (true) {
        const Action a = learner_.act(s, noise);
        const StepOutcome out = env.step(a);
        if (learn) {
            learner_.store({s, a, -1, out.reward, out.next_state, out.aborted});
            if (auto l = learner_.train_step()) {
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
    res.loss = updates > 0 ? loss_sum / updates : std::numeric_limits<double>::quiet_NaN();
    if (learn) ++episodes_trained_;
    return res;
}

void DdpgAgent::save(const std::string& prefix) const {
    save_params(learner_.actor(), prefix + "_actor.txt");
    save_params(learner_.critic(), prefix + "_critic.txt");
}

// ---------------------------------------------------------------------------

double meta_reward(const std::vector<double>& step_rewards) {
    double total = 0.0;
    for (double r : step_rewards) total += r;
    return total;
}

HddpgAgent::HddpgAgent(const Environment& env, const AgentHyperparams& hyper, std::uint64_t seed)
    : hyper_(hyper),
      controller_(Normalizer(env), hyper, hyper.batch_controller, derive_seed(seed, "controller")),
      meta_(Normalizer(env), hyper, hyper.batch_meta, derive_seed(seed, "meta")) {}

EpisodeResult HddpgAgent::run_episode(Environment& env, std::uint64_t env_seed, bool learn) {
    const int c = hyper_.hierarchy_period;
    EpisodeResult res;
    stats_ = {};
    StateVector s = env.reset(env_seed);
    const double noise = learn ? current_noise(hyper_, progress()) : 0.0;
    controller_.reset_noise();
    meta_.reset_noise();

    StateVector block_start = s;
    Action goal{};
    std::vector<double> block_rewards;
    double loss_sum = 0.0;
    int updates = 0;
    for (int t = 1;; ++t) {
        if ((t - 1) % c == 0) {
            goal = meta_.act(s, noise);
            block_start = s;
            block_rewards.clear();
        }
        const Action a = controller_.act(s, noise);
        const StepOutcome out = env.step(a);
        block_rewards.push_back(out.reward);
        if (learn) {
            const double rc = hierarchical_reward(out.reward, goal, a, hyper_.goal_penalty_weight);
            controller_.store({s, a, -1, rc, out.next_state, out.aborted});
            if (auto l = controller_.train_step()) {
                loss_sum += *l;
                ++updates;
            }
        }
        // Close the goal period every c steps, or early when the episode aborts.
        if (t % c == 0 || out.aborted) {
            const double big_r = meta_reward(block_rewards);
            stats_.meta_rewards.push_back(big_r);
            ++stats_.meta_transitions;
            if (learn) {
                meta_.store({block_start, goal, -1, big_r, out.next_state, out.aborted});
                meta_.train_step();
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
    res.loss = updates > 0 ? loss_sum / updates : std::numeric_limits<double>::quiet_NaN();
    if (learn) ++episodes_trained_;
    return res;
}

void HddpgAgent::save(const std::string& prefix) const {
    save_params(controller_.actor(), prefix + "_controller_actor.txt");
    save_params(controller_.critic(), prefix + "_controller_critic.txt");
    save_params(meta_.actor(), prefix + "_meta_actor.txt");
    save_params(meta_.critic(), prefix + "_meta_critic.txt");
}

}  // namespace beamrl
