#include "beamrl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

namespace beamrl {

double Scenario::max_bs_power_dbm() const { return watt_to_dbm(max_bs_power_w); }

double Scenario::noise_power_w() const { return dbm_to_watt(noise_power_dbm); }

void Scenario::validate() const {
    auto fail = [](const std::string& what) { detail::throw_config("scenario: " + what); };
    if (!(carrier_freq_hz > 0)) fail("carrier_freq_hz must be > 0");
    if (!(cell_radius_m > 0)) fail("cell_radius_m must be > 0");
    if (!(inter_site_distance_m > 0)) fail("inter_site_distance_m must be > 0");
    if (n_paths < 1) fail("n_paths must be >= 1");
    if (!(p_los >= 0 && p_los <= 1)) fail("p_los must lie in [0, 1]");
    if (!(ue_speed_kmh >= 0)) fail("ue_speed_kmh must be >= 0");
    if (!(frame_duration_s > 0)) fail("frame_duration_s must be > 0");
    if (!std::isfinite(noise_power_dbm)) fail("noise_power_dbm must be finite");
    if (!(max_bs_power_w > 0)) fail("max_bs_power_w must be > 0");
    if (!(antenna_spacing_wavelengths > 0)) fail("antenna_spacing_wavelengths must be > 0");
    if (!(los_exponent > 0 && nlos_exponent > 0)) fail("path loss exponents must be > 0");
    if (!(max_turn_rad >= 0)) fail("max_turn_rad must be >= 0");
}

double thermal_noise_dbm(double bandwidth_hz) {
    if (!(bandwidth_hz > 0)) detail::throw_config("bandwidth_hz must be > 0");
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

Scenario scenario_preset(std::string_view name) {
    Scenario s;
    if (name == "sub6") return s;
    if (name == "mmwave") {
        s.name = "mmwave";
        s.carrier_freq_hz = 28e9;
        s.cell_radius_m = 150.0;
        s.inter_site_distance_m = 225.0;
        s.n_paths = 4;
        s.ue_speed_kmh = 2.0;
        return s;
    }
    detail::throw_config("unknown scenario preset '" + std::string(name) + "'");
}

std::vector<std::string> scenario_preset_names() { return {"sub6", "mmwave"}; }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

// Hexagonal lattice sites ordered by ring, first site at the origin.
std::vector<Point> hex_sites(int count, double isd) {
    std::vector<Point> sites{{0.0, 0.0}};
    for (int ring = 1; static_cast<int>(sites.size()) < count; ++ring) {
        // Walk the six edges of the ring.
        for (int side = 0; side < 6; ++side) {
            const double a0 = kPi / 3.0 * side;
            const double a1 = kPi / 3.0 * (side + 1);
            const Point c0{ring * isd * std::cos(a0), ring * isd * std::sin(a0)};
            const Point c1{ring * isd * std::cos(a1), ring * isd * std::sin(a1)};
            for (int k = 0; k < ring; ++k) {
                const double f = static_cast<double>(k) / ring;
                sites.push_back({c0.x + f * (c1.x - c0.x), c0.y + f * (c1.y - c0.y)});
            }
        }
    }
    sites.resize(static_cast<std::size_t>(count));
    return sites;
}

}  // namespace

Topology init_topology(const Scenario& scenario, int num_bs, int ues_per_bs, std::uint64_t seed) {
    scenario.validate();
    if (num_bs < 2)
        detail::throw_config("topology needs at least 2 base stations, got " + std::to_string(num_bs));
    if (ues_per_bs < 1)
        detail::throw_config("topology needs at least 1 UE per base station, got " +
                             std::to_string(ues_per_bs));

    Topology topo;
    topo.num_bs = num_bs;
    topo.ues_per_bs = ues_per_bs;
    const double isd = scenario.inter_site_distance_m;
    if (num_bs == 2)
        topo.bs_positions = {{0.0, 0.0}, {isd, 0.0}};
    else
        topo.bs_positions = hex_sites(num_bs, isd);

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = scenario.serving_disc_radius_m();
    for (int l = 0; l < num_bs; ++l) {
        const Point bs = topo.bs_positions[static_cast<std::size_t>(l)];
        for (int i = 0; i < ues_per_bs; ++i) {
            const double r = radius * std::sqrt(unit(rng));
            const double phi = 2.0 * kPi * unit(rng);
            topo.ue_positions.push_back({bs.x + r * std::cos(phi), bs.y + r * std::sin(phi)});
            topo.ue_headings.push_back(2.0 * kPi * unit(rng));
            topo.serving.push_back(l);
        }
    }
    return topo;
}

Topology step_mobility(Topology topo, const Scenario& scenario, Rng& rng) {
    const double step = scenario.ue_speed_kmh / 3.6 * scenario.frame_duration_s;
    if (step == 0.0) return topo;
    const double radius = scenario.serving_disc_radius_m();
    std::uniform_real_distribution<double> turn(-scenario.max_turn_rad, scenario.max_turn_rad);
    for (std::size_t u = 0; u < topo.ue_positions.size(); ++u) {
        const Point bs = topo.bs_positions[static_cast<std::size_t>(topo.serving[u])];
        Point& p = topo.ue_positions[u];
        double& heading = topo.ue_headings[u];
        heading = std::remainder(heading + turn(rng), 2.0 * kPi);

        Point next{p.x + step * std::cos(heading), p.y + step * std::sin(heading)};
        if (distance(next, bs) > radius) {
            // Mirror the heading about the tangent at the boundary crossing.
            const double nx = (next.x - bs.x) / distance(next, bs);
            const double ny = (next.y - bs.y) / distance(next, bs);
            double dx = std::cos(heading), dy = std::sin(heading);
            const double dot = dx * nx + dy * ny;
            dx -= 2.0 * dot * nx;
            dy -= 2.0 * dot * ny;
            heading = std::atan2(dy, dx);
            next = {p.x + step * dx, p.y + step * dy};
            const double d = distance(next, bs);
            if (d > radius) {
                const double shrink = radius * (1.0 - 1e-12) / d;
                next = {bs.x + (next.x - bs.x) * shrink, bs.y + (next.y - bs.y) * shrink};
            }
        }
        p = next;
    }
    return topo;
}

double path_loss_db(const Scenario& scenario, double distance_m, bool los) {
    const double d = std::max(distance_m, 1.0);
    const double intercept = 20.0 * std::log10(4.0 * kPi * scenario.carrier_freq_hz / kSpeedOfLight);
    const double n = los ? scenario.los_exponent : scenario.nlos_exponent;
    return intercept + 10.0 * n * std::log10(d);
}

double fading_correlation(const Scenario& scenario) {
    const double doppler_hz =
        scenario.ue_speed_kmh / 3.6 * scenario.carrier_freq_hz / kSpeedOfLight;
    return std::cyl_bessel_j(0.0, 2.0 * kPi * doppler_hz * scenario.frame_duration_s);
}

namespace {

std::complex<double> circular_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

LinkPaths draw_link(const Scenario& scenario, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LinkPaths link;
    link.los = unit(rng) < scenario.p_los;
    for (int p = 0; p < scenario.n_paths; ++p) {
        link.angles.push_back(kPi * unit(rng));
        if (p == 0 && link.los)
            link.gains.push_back(std::polar(1.0, 2.0 * kPi * unit(rng)));
        else
            link.gains.push_back(circular_normal(rng));
    }
    return link;
}

// Channel seen by the UE: conjugate array response so that h^T f peaks when a
// codebook beam points along a path.
ComplexVector link_vector(const LinkPaths& link, double amplitude, int m, double phase_step) {
    ComplexVector h = ComplexVector::Zero(m);
    const double norm = amplitude / std::sqrt(static_cast<double>(link.gains.size()));
    for (std::size_t p = 0; p < link.gains.size(); ++p) {
        const double c = std::cos(link.angles[p]);
        for (int k = 0; k < m; ++k)
            h[k] += link.gains[p] * std::polar(norm, -phase_step * k * c);
    }
    return h;
}

}  // namespace

ChannelState draw_channels(const Topology& topology, const Scenario& scenario, int m_antennas,
                           ChannelState state) {
    require(m_antennas >= 1, "draw_channels: m_antennas must be >= 1");
    const int nb = topology.num_bs;
    const int nu = topology.num_ues();
    const double phase_step = 2.0 * kPi * scenario.antenna_spacing_wavelengths;

    if (state.time_step < 0) {
        state.num_bs = nb;
        state.num_ues = nu;
        state.m_antennas = m_antennas;
        state.links.clear();
        for (int i = 0; i < nb * nu; ++i) state.links.push_back(draw_link(scenario, state.rng));
        state.time_step = 0;
    } else {
        require(state.num_bs == nb && state.num_ues == nu && state.m_antennas == m_antennas,
                "draw_channels: channel state does not match topology");
        const double rho = fading_correlation(scenario);
        const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        for (auto& link : state.links) {
            for (std::size_t p = 0; p < link.gains.size(); ++p) {
                if (p == 0 && link.los) continue;  // deterministic LOS component
                link.gains[p] = rho * link.gains[p] + innov * circular_normal(state.rng);
            }
        }
        ++state.time_step;
    }

    const double gains_db = scenario.tx_antenna_gain_dbi + scenario.ue_antenna_gain_dbi;
    state.vectors.resize(static_cast<std::size_t>(nb * nu));
    for (int b = 0; b < nb; ++b) {
        for (int u = 0; u < nu; ++u) {
            const auto idx = static_cast<std::size_t>(b * nu + u);
            const auto& link = state.links[idx];
            const double d = distance(topology.bs_positions[static_cast<std::size_t>(b)],
                                      topology.ue_positions[static_cast<std::size_t>(u)]);
            const double amp =
                std::sqrt(db_to_linear(gains_db - path_loss_db(scenario, d, link.los)));
            state.vectors[idx] = link_vector(link, amp, m_antennas, phase_step);
        }
    }
    return state;
}

std::vector<double> compute_sinr(const ChannelState& state, const Topology& topology,
                                 const Codebook& codebook, const std::vector<int>& beams,
                                 const std::vector<double>& powers_w, const Scenario& scenario) {
    const int nb = topology.num_bs;
    require(static_cast<int>(beams.size()) == nb && static_cast<int>(powers_w.size()) == nb,
            "compute_sinr: one beam and one power per base station required");
    require(state.num_bs == nb && state.num_ues == topology.num_ues(),
            "compute_sinr: channel state does not match topology");
    require(codebook.m_antennas() == state.m_antennas,
            "compute_sinr: codebook size does not match antenna count");
    const double cap = scenario.max_bs_power_w * (1.0 + 1e-12);
    for (double p : powers_w) {
        if (!(p >= 0.0) || p > cap)
            detail::throw_contract("compute_sinr: transmit power " + std::to_string(p) +
                                   " W outside [0, P_max]");
    }

    // Received power from every BS at every UE.
    std::vector<double> rx(static_cast<std::size_t>(nb * state.num_ues));
    for (int b = 0; b < nb; ++b) {
        const ComplexVector& f = codebook[beams[static_cast<std::size_t>(b)]];
        for (int u = 0; u < state.num_ues; ++u) {
            const std::complex<double> g = state.h(b, u).transpose() * f;
            rx[static_cast<std::size_t>(b * state.num_ues + u)] =
                powers_w[static_cast<std::size_t>(b)] * std::norm(g);
        }
    }
    const double noise = scenario.noise_power_w();
    std::vector<double> sinr(static_cast<std::size_t>(state.num_ues));
    for (int u = 0; u < state.num_ues; ++u) {
        const int l = topology.serving[static_cast<std::size_t>(u)];
        double interference = 0.0;
        for (int b = 0; b < nb; ++b)
            if (b != l) interference += rx[static_cast<std::size_t>(b * state.num_ues + u)];
        sinr[static_cast<std::size_t>(u)] =
            rx[static_cast<std::size_t>(l * state.num_ues + u)] / (interference + noise);
    }
    return sinr;
}

}  // namespace beamrl
