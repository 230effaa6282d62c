#include <doctest.h>

#include <cmath>
#include <set>

#include "beamrl/agents.hpp"
#include "beamrl/errors.hpp"
#include "oracles.hpp"

using namespace beamrl;

namespace {

Environment make_env(int m = 1, double cutoff = 4.0) {
    EnvConfig cfg;
    cfg.m_antennas = m;
    cfg.gamma_cutoff_db = cutoff;
    return Environment(scenario_preset("sub6"), cfg);
}

AgentHyperparams small_hyper() {
    AgentHyperparams h;
    h.width = 6;
    h.depth = 2;
    h.batch_ddpg = 8;
    h.batch_controller = 8;
    h.batch_meta = 4;
    h.batch_dqn = 8;
    return h;
}

Transition transition(double reward, double tag) {
    Transition t;
    t.state[0] = tag;
    t.reward = reward;
    return t;
}

}  // namespace

TEST_CASE("fixed power allocation") {
    const Scenario s = scenario_preset("sub6");
    CHECK(fpa_power(s, 100, 100) == doctest::Approx(46.0206).epsilon(1e-5));
    CHECK(fpa_power(s, 100, 25) == doctest::Approx(46.0206 - 20.0 + 13.9794).epsilon(1e-5));
    CHECK(std::round(fpa_power(s, 100, 25) * 100.0) / 100.0 == 40.00);
    CHECK_THROWS_AS(fpa_power(s, 100, 0), ContractViolation);
    CHECK_THROWS_AS(fpa_power(s, 0, 0), ContractViolation);

    Environment env = make_env();
    AgentHyperparams h;
    h.n_prb_allocated = 25;
    FpaAgent fpa(s, h);
    const EpisodeResult r = fpa.run_episode(env, 3, true);
    for (const auto& rec : r.records) {
        CHECK(rec.powers_dbm[0] == doctest::Approx(fpa.power_dbm()));
        CHECK(rec.powers_dbm[1] == doctest::Approx(fpa.power_dbm()));
    }
    CHECK(std::isnan(r.loss));
}

TEST_CASE("q-learning update arithmetic") {
    QTable t(2);
    CHECK(t.get(7, 1) == 0.0);
    CHECK(t.argmax(7) == 0);
    qlearning_update(t, 0, 0, 1.0, 1, 0.0, 0.9, false);
    CHECK(t.num_states() == 0);
    qlearning_update(t, 0, 0, 1.0, 1, 1.0, 0.9, false);
    CHECK(t.get(0, 0) == 1.0);

    // Two sequential updates with lr 0.5: Q1 = 0.5*(2 + 0.9*0) = 1, then
    // Q(1,1) = 0.5*(3 + 0.9*max Q(0,.)) = 0.5*(3 + 0.9) = 1.95.
    QTable u(2);
    qlearning_update(u, 0, 1, 2.0, 1, 0.5, 0.9, false);
    CHECK(u.get(0, 1) == doctest::Approx(1.0));
    qlearning_update(u, 1, 1, 3.0, 0, 0.5, 0.9, false);
    CHECK(u.get(1, 1) == doctest::Approx(1.95));
    CHECK(u.argmax(1) == 1);
    // Terminal: no bootstrap.
    qlearning_update(u, 1, 0, 1.0, 0, 1.0, 0.9, true);
    CHECK(u.get(1, 0) == 1.0);
}

TEST_CASE("q-learning reaches the value-iteration fixed point") {
    const std::vector<std::vector<int>> next{{0, 1}, {0, 1}};
    const std::vector<std::vector<double>> reward{{1.0, 0.0}, {2.0, -1.0}};
    const auto q_star = oracle::value_iteration(next, reward, 0.9);
    QTable t(2);
    int sweeps = 0;
    double worst = 1.0;
    for (; sweeps < 10000 && worst > 1e-6; ++sweeps) {
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                qlearning_update(t, static_cast<std::uint64_t>(s), a, reward[s][a],
                                 static_cast<std::uint64_t>(next[s][a]), 0.5, 0.9, false);
        worst = 0.0;
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                worst = std::max(worst, std::abs(t.get(static_cast<std::uint64_t>(s), a) - q_star[s][a]));
    }
    CHECK(worst <= 1e-6);
    CHECK(sweeps <= 10000);
}

TEST_CASE("dqn target") {
    CHECK(dqn_target(3.0, {1.0, 9.0}, 0.9, true) == 3.0);
    CHECK(dqn_target(1.0, {2.0, 5.0, 0.0}, 0.9, false) == doctest::Approx(5.5));
    CHECK(dqn_target(1.0, {2.0, 5.0, 0.0}, 0.0, false) == 1.0);
    CHECK_THROWS_AS(dqn_target(1.0, {}, 0.9, false), ContractViolation);
}

TEST_CASE("discrete action set") {
    const auto one = discrete_action_set(1);
    CHECK(one.size() == 25);
    CHECK(one[0].dpower_l_db == 0.0);
    CHECK(one[0].dpower_b_db == 0.0);
    const auto many = discrete_action_set(8);
    CHECK(many.size() == 225);
    std::set<std::tuple<double, double, int, int>> distinct;
    for (const auto& a : many) {
        distinct.insert({a.dpower_l_db, a.dpower_b_db, a.dbeam_l, a.dbeam_b});
        CHECK(std::abs(a.dbeam_l) <= 1);
    }
    CHECK(distinct.size() == 225);
}

TEST_CASE("state discretization") {
    Environment env = make_env(4);
    const StateVector s = env.reset(2);
    const std::uint64_t k = discretize_state(s, env);
    CHECK(k == discretize_state(s, env));
    StateVector moved = s;
    moved[4] = 1.0;
    CHECK(discretize_state(moved, env) != k);
    StateVector tiny = s;
    tiny[0] += 1e-3;
    CHECK(discretize_state(tiny, env) == k);
}

TEST_CASE("replay buffer") {
    ReplayBuffer buf(5, 1);
    for (int i = 0; i < 8; ++i) buf.push(transition(i, i));
    CHECK(buf.size() == 5);
    CHECK(buf.total_pushed() == 8);
    const auto all = buf.contents();
    for (int i = 0; i < 5; ++i) CHECK(all[static_cast<std::size_t>(i)].reward == i + 3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto batch = buf.sample(4);
        std::set<double> seen;
        for (const auto& t : batch) {
            CHECK(t.reward >= 3.0);
            seen.insert(t.reward);
        }
        CHECK(seen.size() == 4);
    }
    CHECK_THROWS_AS(buf.sample(6), ContractViolation);
    CHECK_THROWS_AS(ReplayBuffer(0, 1), ConfigError);
}

TEST_CASE("dqn greedy follows a table-like network") {
    Environment env = make_env();
    env.reset(0);
    DqnAgent dqn(env, small_hyper(), 1);
    MlpParams& q = dqn.q_network();
    auto& last = q.layers.back();
    last.weight.setZero();
    last.bias.setZero();
    last.bias[17] = 2.0;
    last.bias[3] = 1.0;
    CHECK(dqn.greedy_action(env.state()) == 17);
    last.bias[3] = 5.0;
    CHECK(dqn.greedy_action(env.state()) == 3);
}

TEST_CASE("dqn agent trains and stays in bounds") {
    Environment env = make_env();
    DqnAgent dqn(env, small_hyper(), 2);
    dqn.begin_training(5);
    bool trained = false;
    for (int e = 0; e < 5; ++e) {
        const EpisodeResult r = dqn.run_episode(env, 100 + e, true);
        trained |= !std::isnan(r.loss);
        for (const auto& rec : r.records)
            for (double p : rec.powers_dbm) {
                CHECK(p >= env.power_floor_dbm());
                CHECK(p <= env.max_power_dbm());
            }
    }
    CHECK(trained);
    CHECK(dqn.q_network().all_finite());
}

TEST_CASE("ddpg act") {
    Environment env = make_env(4);
    const StateVector s = env.reset(0);
    const Normalizer norm(env);
    DdpgLearner a(norm, small_hyper(), 8, 1);
    CHECK(a.act(s, 0.0) == a.act(s, 0.0));
    DdpgLearner b(norm, small_hyper(), 8, 2);
    DdpgLearner a2(norm, small_hyper(), 8, 1);
    const Action x = a2.act(s, 0.3);
    b.actor() = a2.actor();
    CHECK(b.act(s, 0.3) != x);
    for (int k = 0; k < 500; ++k) {
        const Action n = a.act(s, 5.0);
        CHECK(n[0] >= 0.0);
        CHECK(n[0] <= 40.0);
        CHECK(n[1] >= 0.0);
        CHECK(n[1] <= 40.0);
        CHECK(n[2] >= 0.0);
        CHECK(n[2] < 4.0);
        CHECK(n[3] < 4.0);
    }
}

TEST_CASE("actor gradient matches finite differences of mean Q") {
    Environment env = make_env(4);
    env.reset(0);
    const Normalizer norm(env);
    AgentHyperparams h = small_hyper();
    DdpgLearner learner(norm, h, 8, 3);
    const MlpParams critic = learner.critic();
    const MlpParams actor = learner.actor();
    Rng rng(4);
    Eigen::MatrixXd states = Eigen::MatrixXd::Random(kStateSize, 5);

    const GradientSet g = actor_gradient(actor, critic, states, norm);
    auto mean_q = [&](const std::vector<double>& theta) {
        MlpParams p = actor;
        p.set_flat(Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
        Eigen::MatrixXd in(kStateSize + kActionSize, states.cols());
        in << states, normalize_actions(forward(p, states), norm);
        return -forward(critic, in).mean();
    };
    const Eigen::VectorXd flat = actor.flat();
    const auto num = oracle::central_difference(mean_q, {flat.data(), flat.data() + flat.size()});
    const Eigen::VectorXd ana = g.flat();
    for (std::size_t i = 0; i < num.size(); ++i)
        CHECK(oracle::relative_error(ana[static_cast<Eigen::Index>(i)], num[i]) < 1e-4);
}

TEST_CASE("critic regresses to a constant target") {
    Environment env = make_env();
    const StateVector s = env.reset(0);
    const Normalizer norm(env);
    AgentHyperparams h = small_hyper();
    h.discount = 0.0;
    h.lr = 1e-3;
    DdpgLearner learner(norm, h, 8, 5);
    CHECK_FALSE(learner.train_step().has_value());
    const Action a = learner.act(s, 0.0);
    for (int i = 0; i < 16; ++i) learner.store({s, a, -1, 7.0, s, false});
    double first = 0.0, last = 0.0;
    for (int k = 0; k < 3000; ++k) {
        const double l = *learner.train_step();
        if (k == 0) first = l;
        last = l;
    }
    CHECK(last < 1e-3 * first);
    CHECK(last < 1e-6);
}

TEST_CASE("tau one copies live networks into targets") {
    Environment env = make_env();
    const StateVector s = env.reset(0);
    const Normalizer norm(env);
    AgentHyperparams h = small_hyper();
    h.tau = 1.0;
    DdpgLearner learner(norm, h, 4, 6);
    for (int i = 0; i < 4; ++i) learner.store({s, learner.act(s, 0.2), -1, 3.0, s, i == 3});
    REQUIRE(learner.train_step().has_value());
    CHECK(learner.actor_target().flat() == learner.actor().flat());
    CHECK(learner.critic_target().flat() == learner.critic().flat());
}

TEST_CASE("h-ddpg meta bookkeeping") {
    CHECK(meta_reward({2.0, 3.0, 4.0}) == 9.0);
    Environment env = make_env(1, -1e9);  // never aborts
    AgentHyperparams h = small_hyper();
    h.hierarchy_period = 3;
    HddpgAgent agent(env, h, 7);
    agent.begin_training(2);
    const EpisodeResult r = agent.run_episode(env, 11, true);
    CHECK(r.steps == 50);
    CHECK(agent.last_stats().meta_transitions == 50 / 3);
    CHECK(agent.meta().buffer().size() == 50 / 3);
    for (int i = 0; i < agent.last_stats().meta_transitions; ++i) {
        double expect = 0.0;
        for (int k = 0; k < 3; ++k) expect += r.records[static_cast<std::size_t>(3 * i + k)].reward;
        CHECK(agent.last_stats().meta_rewards[static_cast<std::size_t>(i)] == expect);
    }
}

TEST_CASE("h-ddpg with c=1 and no goal penalty is ddpg") {
    Environment env_a = make_env();
    Environment env_b = make_env();
    AgentHyperparams h = small_hyper();
    h.hierarchy_period = 1;
    h.goal_penalty_weight = 0.0;
    h.batch_controller = h.batch_ddpg;
    DdpgAgent ddpg(env_a, h, 9);
    HddpgAgent hddpg(env_b, h, 9);
    ddpg.begin_training(20);
    hddpg.begin_training(20);
    for (int e = 0; e < 20; ++e) {
        const EpisodeResult x = ddpg.run_episode(env_a, 500 + e, true);
        const EpisodeResult y = hddpg.run_episode(env_b, 500 + e, true);
        REQUIRE(x.steps == y.steps);
        CHECK(x.ret == y.ret);
        CHECK((x.loss == y.loss || (std::isnan(x.loss) && std::isnan(y.loss))));
        for (std::size_t k = 0; k < x.records.size(); ++k)
            CHECK(x.records[k].powers_dbm == y.records[k].powers_dbm);
    }
    CHECK(ddpg.learner().actor().flat() == hddpg.controller().actor().flat());
}

TEST_CASE("agent factory") {
    Environment env = make_env();
    env.reset(0);
    for (const auto& name : algorithm_names()) {
        CHECK(is_algorithm(name));
        CHECK(make_agent(name, env, AgentHyperparams{}, 1)->name() == name);
    }
    CHECK_FALSE(is_algorithm("ppo"));
    CHECK_THROWS_AS(make_agent("ppo", env, AgentHyperparams{}, 1), ConfigError);
    AgentHyperparams bad;
    bad.tau = 1.5;
    CHECK_THROWS_AS(make_agent("ddpg", env, bad, 1), ConfigError);
}
