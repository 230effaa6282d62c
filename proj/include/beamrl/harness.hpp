#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamrl/config.hpp"
#include "beamrl/metrics.hpp"

namespace beamrl {

struct TrainLogRow {
    int episode = 0;
    int steps = 0;
    double ret = 0.0;
    double loss = 0.0;
    bool aborted = false;
};

struct CellResult {
    RunSummary summary;
    std::vector<TrainLogRow> train_log;
    SinrSampleSet eval_samples;              // per-step effective SINR (dB) of every BS
    std::vector<double> eval_sum_rates;      // one per evaluation episode
};

/// Identity of one plan cell and the seeds derived from it.
struct CellId {
    std::string algorithm;
    int m_antennas = 1;
    std::uint64_t seed = 0;

    std::uint64_t agent_seed() const;
    /// Shared by every algorithm at the same (M, seed) so comparisons are paired.
    std::uint64_t train_env_seed(int episode) const;
    std::uint64_t eval_env_seed(int episode) const;
    std::string tag() const;  // e.g. "ddpg_M4_seed0"
};

/// Trains and evaluates one cell. Writes only checkpoints, when enabled.
CellResult run_cell(const Config& config, const CellId& cell);

/// Runs every (algorithm, M, seed) cell and writes logs and metrics to plan.output_dir.
std::vector<CellResult> run_plan(const Config& config);

// Serialization of harness outputs; byte-stable for identical inputs.
std::string train_log_csv(const std::vector<TrainLogRow>& rows);
std::string metrics_csv(const std::vector<CellResult>& cells);
std::string ccdf_csv(const std::vector<CellResult>& cells, const std::vector<double>& thresholds);
std::string summary_json(const std::vector<CellResult>& cells);

/// Default CCDF thresholds: -5 dB to 40 dB in 0.5 dB steps.
std::vector<double> default_ccdf_grid();

}  // namespace beamrl
