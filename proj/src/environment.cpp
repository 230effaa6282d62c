#include "beamrl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

namespace beamrl {

double SinrPolicy::gamma_target_db() const { return gamma0_db + 10.0 * std::log10(m_antennas); }

double SinrPolicy::gamma_max_db() const { return gamma0_db + 10.0 * std::log2(m_antennas); }

double SinrPolicy::effective_db(double sinr_db) const {
    return std::clamp(sinr_db, 0.0, gamma_max_db());
}

void EnvConfig::validate() const {
    auto fail = [](const std::string& what) { detail::throw_config("environment: " + what); };
    if (num_bs < 2) fail("num_bs must be >= 2");
    if (ues_per_bs < 1) fail("ues_per_bs must be >= 1");
    if (m_antennas < 1) fail("m_antennas must be >= 1");
    if (horizon < 1) fail("horizon must be >= 1");
    if (!std::isfinite(gamma_cutoff_db) || !std::isfinite(gamma0_db)) fail("SINR thresholds must be finite");
    if (!std::isfinite(power_floor_dbm)) fail("power_floor_dbm must be finite");
    if (!(pc_limit_db > 0) || !(ic_limit_db > 0)) fail("action limits must be > 0");
    if (beam_limit_multiplier < 1) fail("beam_limit_multiplier must be >= 1");
}

Environment::Environment(Scenario scenario, EnvConfig config)
    : scenario_(std::move(scenario)),
      config_(config),
      codebook_(config.m_antennas, scenario_.antenna_spacing_wavelengths),
      policy_{config.gamma_cutoff_db, config.gamma0_db, config.m_antennas} {
    scenario_.validate();
    config_.validate();
    if (config_.power_floor_dbm >= scenario_.max_bs_power_dbm())
        detail::throw_config("environment: power floor must be below the BS power cap");
}

double Environment::beam_control_limit() const {
    return static_cast<double>(config_.beam_limit_multiplier) * codebook_.size();
}

Action Environment::action_low() const {
    return {config_.power_floor_dbm, config_.power_floor_dbm, 0.0, 0.0};
}

Action Environment::action_high() const {
    return {config_.power_floor_dbm + config_.pc_limit_db, config_.power_floor_dbm + config_.ic_limit_db,
            beam_control_limit(), beam_control_limit()};
}

StateVector Environment::reset(std::uint64_t seed) {
    topology_ = init_topology(scenario_, config_.num_bs, config_.ues_per_bs,
                              derive_seed(seed, "topology"));
    channel_ = draw_channels(topology_, scenario_, config_.m_antennas,
                             ChannelState(derive_seed(seed, "fading")));
    mobility_rng_.seed(derive_seed(seed, "mobility"));
    // Half the maximum power, beams at index 0.
    powers_dbm_.assign(static_cast<std::size_t>(config_.num_bs),
                       watt_to_dbm(scenario_.max_bs_power_w / 2.0));
    beams_.assign(static_cast<std::size_t>(config_.num_bs), 0);
    t_ = 0;
    active_ = true;
    state_ = observe();
    return state_;
}

AppliedControls Environment::apply_action(const Action& action) const {
    for (double a : action)
        require(std::isfinite(a), "apply_action: action components must be finite");
    const double cap = max_power_dbm();
    const double floor = config_.power_floor_dbm;
    const int k_limit = config_.beam_limit_multiplier * codebook_.size();
    AppliedControls out;
    out.power_l_dbm = std::min(cap, std::max(floor, action[0]));
    out.power_b_dbm = std::min(cap, std::max(floor, action[1]));
    out.beam_l = beam_from_continuous(action[2], k_limit) % codebook_.size();
    out.beam_b = beam_from_continuous(action[3], k_limit) % codebook_.size();
    return out;
}

Action Environment::relative_action(double dpower_l_db, double dpower_b_db, int dbeam_l,
                                    int dbeam_b) const {
    const int n = codebook_.size();
    auto beam = [n](int index, int dir) { return dir == 0 ? index : step_beam(index, dir > 0 ? 1 : -1, n); };
    const double cap = max_power_dbm();
    const double floor = config_.power_floor_dbm;
    return {std::clamp(powers_dbm_[0] + dpower_l_db, floor, cap),
            std::clamp(powers_dbm_[1] + dpower_b_db, floor, cap),
            beam(beams_[0], dbeam_l) + 0.5, beam(beams_[1], dbeam_b) + 0.5};
}

SinrReport Environment::evaluate(const std::vector<double>& powers_dbm,
                                 const std::vector<int>& beams) const {
    std::vector<double> powers_w;
    powers_w.reserve(powers_dbm.size());
    for (double p : powers_dbm) powers_w.push_back(std::min(dbm_to_watt(p), scenario_.max_bs_power_w));

    SinrReport rep;
    rep.sinr_linear = compute_sinr(channel_, topology_, codebook_, beams, powers_w, scenario_);
    rep.powers_dbm = powers_dbm;
    rep.beams = beams;
    rep.bs_effective_db.assign(static_cast<std::size_t>(topology_.num_bs), 0.0);
    for (std::size_t u = 0; u < rep.sinr_linear.size(); ++u) {
        const double db = linear_to_db(rep.sinr_linear[u]);
        rep.sinr_db.push_back(db);
        rep.effective_db.push_back(policy_.effective_db(db));
        rep.bs_effective_db[static_cast<std::size_t>(topology_.serving[u])] += rep.effective_db.back();
    }
    return rep;
}

StepOutcome Environment::step(const Action& action) {
    if (!active_) throw UsageError("Environment::step called before reset or after episode end");
    const AppliedControls applied = apply_action(action);
    powers_dbm_[0] = applied.power_l_dbm;
    powers_dbm_[1] = applied.power_b_dbm;
    beams_[0] = applied.beam_l;
    beams_[1] = applied.beam_b;

    topology_ = step_mobility(std::move(topology_), scenario_, mobility_rng_);
    channel_ = draw_channels(topology_, scenario_, config_.m_antennas, std::move(channel_));
    ++t_;

    StepOutcome out;
    out.info = evaluate(powers_dbm_, beams_);
    for (double e : out.info.effective_db) out.reward += e;
    out.aborted = std::any_of(out.info.sinr_db.begin(), out.info.sinr_db.end(),
                              [&](double db) { return db < policy_.gamma_cutoff_db; });
    out.done = out.aborted || t_ >= config_.horizon;
    state_ = observe();
    out.next_state = state_;
    if (out.done) active_ = false;
    return out;
}

StateVector Environment::observe() const {
    const Point ue_l = topology_.ue_positions[static_cast<std::size_t>(topology_.ue_index(0, 0))];
    const Point ue_b = topology_.ue_positions[static_cast<std::size_t>(topology_.ue_index(1, 0))];
    return {ue_l.x, ue_l.y, ue_b.x, ue_b.y, powers_dbm_[0], powers_dbm_[1],
            static_cast<double>(beams_[0]), static_cast<double>(beams_[1])};
}

double hierarchical_reward(double step_reward, const std::vector<double>& goal,
                           const std::vector<double>& action, double weight) {
    require(goal.size() == action.size(), "hierarchical_reward: goal and action arity differ");
    double penalty = 0.0;
    for (std::size_t k = 0; k < goal.size(); ++k) penalty += std::abs(goal[k] - action[k]);
    return step_reward - weight * penalty;
}

double hierarchical_reward(double step_reward, const Action& goal, const Action& action,
                           double weight) {
    return hierarchical_reward(step_reward, std::vector<double>(goal.begin(), goal.end()),
                               std::vector<double>(action.begin(), action.end()), weight);
}

}  // namespace beamrl
