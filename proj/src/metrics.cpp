#include "beamrl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "beamrl/errors.hpp"

namespace beamrl {

std::vector<CcdfPoint> ccdf(const std::vector<double>& samples, const std::vector<double>& thresholds) {
    require(!samples.empty(), "ccdf: empty sample set");
    for (double s : samples) require(std::isfinite(s), "ccdf: non-finite sample");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<CcdfPoint> out;
    out.reserve(thresholds.size());
    for (double x : thresholds) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        out.push_back({x, static_cast<double>(above) / n});
    }
    return out;
}

std::vector<CcdfPoint> ccdf(const SinrSampleSet& set, const std::vector<double>& thresholds) {
    return ccdf(set.samples, thresholds);
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
    require(step > 0 && hi >= lo, "threshold_grid: need step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

double sum_rate(const std::vector<std::vector<double>>& effective_sinr_linear, int horizon) {
    require(horizon >= 1, "sum_rate: horizon must be >= 1");
    double total = 0.0;
    for (const auto& step : effective_sinr_linear) {
        for (double g : step) {
            require(!std::isnan(g), "sum_rate: NaN SINR");
            require(g >= 0.0, "sum_rate: negative SINR");
            total += std::log2(1.0 + g);
        }
    }
    return total / horizon;
}

std::optional<int> convergence_point(const std::vector<double>& series, int window, double rel_tol) {
    require(window >= 1, "convergence_point: window must be >= 1");
    const int n = static_cast<int>(series.size());
    if (n < window) return std::nullopt;
    // means[i] covers series[i, i + window)
    std::vector<double> means(static_cast<std::size_t>(n - window + 1));
    double acc = 0.0;
    for (int i = 0; i < window; ++i) acc += series[static_cast<std::size_t>(i)];
    means[0] = acc / window;
    for (int i = 1; i + window <= n; ++i) {
        acc += series[static_cast<std::size_t>(i + window - 1)] - series[static_cast<std::size_t>(i - 1)];
        means[static_cast<std::size_t>(i)] = acc / window;
    }
    const int last_candidate = std::max(0, n - 2 * window);
    for (int i = 0; i <= last_candidate; ++i) {
        const double ref = means[static_cast<std::size_t>(i)];
        const double tol = rel_tol * std::abs(ref);
        bool stable = true;
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < means.size() && stable; ++j)
            stable = std::abs(means[j] - ref) <= tol;
        if (stable) return i;
    }
    return std::nullopt;
}

}  // namespace beamrl
