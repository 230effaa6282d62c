#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "beamrl/beamcode.hpp"
#include "beamrl/channel.hpp"
#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

using namespace beamrl;

namespace {

// Free-space intercept at 1 m written out independently of path_loss_db.
double fspl_1m_db(double f_hz) { return 20.0 * std::log10(4.0 * M_PI * f_hz / 299792458.0); }

ChannelState manual_state(std::vector<ComplexVector> h, int nb, int nu, int m) {
    ChannelState st;
    st.time_step = 0;
    st.num_bs = nb;
    st.num_ues = nu;
    st.m_antennas = m;
    st.vectors = std::move(h);
    return st;
}

Topology two_cell_topology() {
    Topology t;
    t.num_bs = 2;
    t.ues_per_bs = 1;
    t.bs_positions = {{0, 0}, {525, 0}};
    t.ue_positions = {{10, 0}, {515, 0}};
    t.ue_headings = {0, 0};
    t.serving = {0, 1};
    return t;
}

}  // namespace

TEST_CASE("presets match the parameter table") {
    const Scenario s = scenario_preset("sub6");
    CHECK(s.carrier_freq_hz == 2.1e9);
    CHECK(s.cell_radius_m == 350.0);
    CHECK(s.inter_site_distance_m == 525.0);
    CHECK(s.n_paths == 15);
    CHECK(s.ue_speed_kmh == 5.0);
    const Scenario mm = scenario_preset("mmwave");
    CHECK(mm.carrier_freq_hz == 28e9);
    CHECK(mm.cell_radius_m == 150.0);
    CHECK(mm.inter_site_distance_m == 225.0);
    CHECK(mm.n_paths == 4);
    CHECK(mm.ue_speed_kmh == 2.0);
    CHECK_THROWS_AS(scenario_preset("lte"), ConfigError);
    CHECK(thermal_noise_dbm(10e6) == doctest::Approx(-104.0));
    CHECK(s.max_bs_power_dbm() == doctest::Approx(46.0206).epsilon(1e-5));
}

TEST_CASE("topology placement") {
    const Scenario s = scenario_preset("sub6");
    const Topology t = init_topology(s, 2, 1, 0);
    REQUIRE(t.bs_positions.size() == 2);
    CHECK(distance(t.bs_positions[0], t.bs_positions[1]) == doctest::Approx(525.0));
    REQUIRE(t.num_ues() == 2);
    for (int u = 0; u < t.num_ues(); ++u) {
        const double d = distance(t.ue_positions[u], t.bs_positions[t.serving[u]]);
        CHECK(d <= s.cell_radius_m / 2.0);
        CHECK(t.serving[u] == u);
    }
    const Topology again = init_topology(s, 2, 1, 0);
    for (int u = 0; u < t.num_ues(); ++u) {
        CHECK(again.ue_positions[u].x == t.ue_positions[u].x);
        CHECK(again.ue_positions[u].y == t.ue_positions[u].y);
    }
    CHECK_THROWS_AS(init_topology(s, 1, 1, 0), ConfigError);
    CHECK_THROWS_AS(init_topology(s, 2, 0, 0), ConfigError);

    const Topology hex = init_topology(s, 7, 2, 3);
    CHECK(hex.num_ues() == 14);
    for (int a = 1; a < 7; ++a)
        CHECK(distance(hex.bs_positions[0], hex.bs_positions[a]) == doctest::Approx(525.0));
}

TEST_CASE("mobility step length and containment") {
    Scenario s = scenario_preset("sub6");
    Topology t = init_topology(s, 2, 1, 5);
    // Put UE 0 at its BS so the first step cannot reflect.
    t.ue_positions[0] = t.bs_positions[0];
    Rng rng(1);
    const Topology moved = step_mobility(t, s, rng);
    CHECK(distance(moved.ue_positions[0], t.ue_positions[0]) ==
          doctest::Approx(5000.0 / 3600.0 * 0.01).epsilon(1e-12));
    CHECK(distance(moved.ue_positions[0], t.ue_positions[0]) == doctest::Approx(0.0139).epsilon(1e-3));
    CHECK(moved.bs_positions[1].x == t.bs_positions[1].x);

    Scenario still = s;
    still.ue_speed_kmh = 0.0;
    const Topology same = step_mobility(t, still, rng);
    CHECK(same.ue_positions[1].x == t.ue_positions[1].x);
    CHECK(same.ue_positions[1].y == t.ue_positions[1].y);

    // Fast UEs starting on the rim, heading outward.
    Scenario fast = s;
    fast.ue_speed_kmh = 3600.0;  // 10 m per frame
    const double r = fast.serving_disc_radius_m();
    Topology rim = init_topology(fast, 2, 1, 9);
    rim.ue_positions[0] = {r, 0.0};
    rim.ue_headings[0] = 0.0;
    for (int k = 0; k < 5000; ++k) {
        rim = step_mobility(rim, fast, rng);
        for (int u = 0; u < rim.num_ues(); ++u)
            REQUIRE(distance(rim.ue_positions[u], rim.bs_positions[rim.serving[u]]) <= r);
    }
}

TEST_CASE("path loss and fading correlation") {
    const Scenario s = scenario_preset("sub6");
    CHECK(path_loss_db(s, 100.0, true) == doctest::Approx(fspl_1m_db(2.1e9) + 40.0));
    CHECK(path_loss_db(s, 100.0, false) == doctest::Approx(fspl_1m_db(2.1e9) + 66.0));
    CHECK(path_loss_db(s, 200.0, false) > path_loss_db(s, 100.0, false));

    // J0 by its power series.
    auto j0 = [](double x) {
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 40; ++k) {
            term *= -(x * x / 4.0) / (k * k);
            sum += term;
        }
        return sum;
    };
    const double x = 2.0 * M_PI * (5.0 / 3.6) * 2.1e9 / 299792458.0 * 0.01;
    CHECK(fading_correlation(s) == doctest::Approx(j0(x)).epsilon(1e-12));
    const Scenario mm = scenario_preset("mmwave");
    const double xm = 2.0 * M_PI * (2.0 / 3.6) * 28e9 / 299792458.0 * 0.01;
    CHECK(fading_correlation(mm) == doctest::Approx(j0(xm)).epsilon(1e-10));
    CHECK(std::abs(fading_correlation(mm)) < 1.0);
}

TEST_CASE("single LOS path gives the path loss exactly") {
    Scenario s = scenario_preset("sub6");
    s.n_paths = 1;
    s.p_los = 1.0;
    const Topology t = init_topology(s, 2, 1, 11);
    const ChannelState st = draw_channels(t, s, 1, ChannelState(4));
    for (int b = 0; b < 2; ++b) {
        for (int u = 0; u < 2; ++u) {
            const double d = distance(t.bs_positions[b], t.ue_positions[u]);
            const double expect_db = 3.0 - (fspl_1m_db(2.1e9) + 20.0 * std::log10(d));
            CHECK(std::norm(st.h(b, u)[0]) == doctest::Approx(std::pow(10.0, expect_db / 10.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("channel energy scale over many draws") {
    for (int m : {1, 4}) {
        for (double p_los : {0.0, 1.0}) {
            Scenario s = scenario_preset("sub6");
            s.p_los = p_los;
            const Topology t = init_topology(s, 2, 1, 2);
            const double d = distance(t.bs_positions[0], t.ue_positions[0]);
            const double pl = std::pow(10.0, (3.0 - path_loss_db(s, d, p_los > 0.5)) / 10.0);
            double acc = 0.0;
            const int n = 100000;
            ChannelState st(17);
            for (int k = 0; k < n; ++k) {
                st.time_step = -1;  // fresh realization each draw
                st = draw_channels(t, s, m, std::move(st));
                acc += st.h(0, 0).squaredNorm();
            }
            CHECK(acc / n / m == doctest::Approx(pl).epsilon(0.05));
        }
    }
}

TEST_CASE("fading evolves with the configured correlation") {
    Scenario s = scenario_preset("sub6");
    s.p_los = 0.0;
    s.ue_speed_kmh = 0.0;  // freeze geometry
    const Topology t = init_topology(s, 2, 1, 2);
    ChannelState st = draw_channels(t, s, 1, ChannelState(8));
    std::complex<double> cross = 0.0;
    double power = 0.0;
    for (int k = 0; k < 50000; ++k) {
        const std::complex<double> prev = st.links[0].gains[3];
        st = draw_channels(t, s, 1, std::move(st));
        cross += st.links[0].gains[3] * std::conj(prev);
        power += std::norm(prev);
    }
    CHECK(cross.real() / power == doctest::Approx(fading_correlation(s)).epsilon(0.02));
    CHECK(st.time_step == 50000);
}

TEST_CASE("channel draws are deterministic") {
    const Scenario s = scenario_preset("mmwave");
    const Topology t = init_topology(s, 2, 1, 3);
    ChannelState a = draw_channels(t, s, 8, ChannelState(99));
    ChannelState b = draw_channels(t, s, 8, ChannelState(99));
    for (int k = 0; k < 10; ++k) {
        a = draw_channels(t, s, 8, std::move(a));
        b = draw_channels(t, s, 8, std::move(b));
    }
    for (std::size_t i = 0; i < a.vectors.size(); ++i) {
        CHECK(a.vectors[i].size() == 8);
        CHECK(a.vectors[i] == b.vectors[i]);
        CHECK(a.vectors[i].allFinite());
    }
}

TEST_CASE("sinr against hand arithmetic") {
    Scenario s = scenario_preset("sub6");
    const Topology t = two_cell_topology();
    const Codebook cb(1, 0.5);
    using C = std::complex<double>;
    const C h00(1e-5, 2e-5), h01(3e-7, -1e-7), h10(-2e-7, 4e-7), h11(5e-6, 5e-6);
    ChannelState st = manual_state({ComplexVector::Constant(1, h00), ComplexVector::Constant(1, h01),
                                    ComplexVector::Constant(1, h10), ComplexVector::Constant(1, h11)},
                                   2, 2, 1);
    const double p0 = 20.0, p1 = 5.0;
    const double n = std::pow(10.0, -104.0 / 10.0) * 1e-3;
    const auto sinr = compute_sinr(st, t, cb, {0, 0}, {p0, p1}, s);
    CHECK(sinr[0] == doctest::Approx(p0 * std::norm(h00) / (p1 * std::norm(h10) + n)).epsilon(1e-12));
    CHECK(sinr[1] == doctest::Approx(p1 * std::norm(h11) / (p0 * std::norm(h01) + n)).epsilon(1e-12));

    CHECK(compute_sinr(st, t, cb, {0, 0}, {0.0, p1}, s)[0] == 0.0);
    CHECK_THROWS_AS(compute_sinr(st, t, cb, {0, 0}, {-1.0, p1}, s), ContractViolation);
    CHECK_THROWS_AS(compute_sinr(st, t, cb, {0, 0}, {41.0, p1}, s), ContractViolation);

    // No interference, noise equal to the desired power.
    ChannelState quiet = manual_state({ComplexVector::Constant(1, C(std::sqrt(n), 0)), ComplexVector::Zero(1),
                                       ComplexVector::Zero(1), ComplexVector::Constant(1, C(1, 0))},
                                      2, 2, 1);
    CHECK(compute_sinr(quiet, t, cb, {0, 0}, {1.0, 1.0}, s)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sinr monotone in powers") {
    const Scenario s = scenario_preset("sub6");
    Rng rng(21);
    std::uniform_real_distribution<double> pw(0.0, 40.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Topology t = init_topology(s, 2, 1, trial);
        const ChannelState st = draw_channels(t, s, 4, ChannelState(trial + 1000));
        const Codebook cb(4, 0.5);
        const std::vector<int> beams{trial % 4, (trial / 4) % 4};
        const double p0 = pw(rng), p1 = pw(rng);
        const double hi = std::min(40.0, p0 + 1.0);
        const auto base = compute_sinr(st, t, cb, beams, {p0, p1}, s);
        const auto more = compute_sinr(st, t, cb, beams, {hi, p1}, s);
        CHECK(more[0] >= base[0]);
        CHECK(more[1] <= base[1]);
    }
}
