#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace beamrl {

/// Effective-SINR samples (dB) for one (algorithm, M, seed) cell.
struct SinrSampleSet {
    std::string algorithm;
    int m_antennas = 1;
    std::string seed;  // a seed number or "pooled"
    std::vector<double> samples;
};

struct CcdfPoint {
    double threshold_db = 0.0;
    double probability = 0.0;
};

/// Empirical P(sample > x) for each threshold, strict comparison.
std::vector<CcdfPoint> ccdf(const std::vector<double>& samples, const std::vector<double>& thresholds);
std::vector<CcdfPoint> ccdf(const SinrSampleSet& set, const std::vector<double>& thresholds);

/// Evenly spaced thresholds lo, lo+step, ..., up to hi inclusive.
std::vector<double> threshold_grid(double lo, double hi, double step);

/// Average sum-rate (1/T) * sum_t sum_j log2(1 + gamma[t][j]), gamma linear.
double sum_rate(const std::vector<std::vector<double>>& effective_sinr_linear, int horizon);

/// First index i whose trailing window mean is matched, within rel_tol, by every later
/// window mean; at least one full window must follow i unless the series is shorter
/// than two windows. nullopt if no such index.
std::optional<int> convergence_point(const std::vector<double>& series, int window = 20,
                                     double rel_tol = 0.05);

struct RunSummary {
    std::string algorithm;
    int m_antennas = 1;
    std::uint64_t seed = 0;
    double avg_sum_rate = 0.0;
    double avg_effective_sinr_db = 0.0;
    double avg_normalized_tx_power = 0.0;
    std::vector<double> loss_series;
    double abort_rate = 0.0;
    std::optional<int> convergence_episode;
};

}  // namespace beamrl
