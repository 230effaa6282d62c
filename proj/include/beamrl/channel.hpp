#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "beamrl/beamcode.hpp"
#include "beamrl/rng.hpp"

namespace beamrl {

/// Radio and deployment parameters of one simulated network.
struct Scenario {
    std::string name = "sub6";
    double carrier_freq_hz = 2.1e9;
    double cell_radius_m = 350.0;
    double inter_site_distance_m = 525.0;
    int n_paths = 15;
    double p_los = 0.8;
    double ue_speed_kmh = 5.0;
    double frame_duration_s = 0.010;
    double noise_power_dbm = -104.0;
    double tx_antenna_gain_dbi = 3.0;
    double ue_antenna_gain_dbi = 0.0;
    double max_bs_power_w = 40.0;
    double antenna_spacing_wavelengths = 0.5;
    double los_exponent = 2.0;
    double nlos_exponent = 3.3;
    /// Max heading change per frame for the random-walk mobility model (rad).
    double max_turn_rad = kMaxTurnDefault;

    static constexpr double kMaxTurnDefault = 0.3926990816987241;  // pi/8

    double max_bs_power_dbm() const;
    double noise_power_w() const;
    /// UE placement and mobility disc around the serving BS.
    double serving_disc_radius_m() const { return cell_radius_m / 2.0; }

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

/// Named presets: "sub6" (2.1 GHz) and "mmwave" (28 GHz).
Scenario scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

/// Thermal noise floor (-174 dBm/Hz) integrated over the bandwidth.
double thermal_noise_dbm(double bandwidth_hz);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct Topology {
    std::vector<Point> bs_positions;
    std::vector<Point> ue_positions;
    std::vector<double> ue_headings;  // radians
    std::vector<int> serving;         // UE index -> serving BS
    int num_bs = 0;
    int ues_per_bs = 0;

    int num_ues() const { return static_cast<int>(ue_positions.size()); }
    /// Global UE index of the i-th UE served by BS l.
    int ue_index(int bs, int i) const { return bs * ues_per_bs + i; }
};

/// Two BSs on a line or a hexagonal lattice for three or more; UEs uniform in
/// the serving disc of radius cell_radius/2 around their BS.
Topology init_topology(const Scenario& scenario, int num_bs, int ues_per_bs, std::uint64_t seed);

/// Random-walk mobility: each UE moves v*T along a heading perturbed by a
/// bounded random turn, reflecting at the edge of its serving disc.
Topology step_mobility(Topology topology, const Scenario& scenario, Rng& rng);

/// Log-distance path loss in dB with a free-space intercept at d0 = 1 m.
double path_loss_db(const Scenario& scenario, double distance_m, bool los);

/// One-step correlation of the fading process, J0(2*pi*f_D*T).
double fading_correlation(const Scenario& scenario);

/// Multipath state of one BS-UE link; fixed angles and LOS flag within an episode.
struct LinkPaths {
    bool los = false;
    std::vector<double> angles;                 // departure angles in [0, pi)
    std::vector<std::complex<double>> gains;    // per-path complex gains
};

struct ChannelState {
    std::int64_t time_step = -1;  // -1 until the first draw
    int num_bs = 0;
    int num_ues = 0;
    int m_antennas = 0;
    std::vector<LinkPaths> links;       // row-major (bs, ue)
    std::vector<ComplexVector> vectors; // row-major (bs, ue)
    Rng rng;

    explicit ChannelState(std::uint64_t seed = 0) : rng(seed) {}

    const ComplexVector& h(int bs, int ue) const {
        return vectors[static_cast<std::size_t>(bs * num_ues + ue)];
    }
};

/// Draws the first channel realization (when state.time_step < 0) or advances
/// every link one frame with the autoregressive fading model. Path loss follows
/// the current UE positions.
ChannelState draw_channels(const Topology& topology, const Scenario& scenario, int m_antennas,
                           ChannelState state);

/// Per-UE linear SINR. beams[b] indexes the codebook, powers_w[b] is BS b's power.
std::vector<double> compute_sinr(const ChannelState& state, const Topology& topology,
                                 const Codebook& codebook, const std::vector<int>& beams,
                                 const std::vector<double>& powers_w, const Scenario& scenario);

}  // namespace beamrl
