#include "beamrl/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

namespace beamrl {

namespace fs = std::filesystem;

std::uint64_t CellId::agent_seed() const {
    return derive_seed(seed, fmt::format("agent|{}|M{}", algorithm, m_antennas));
}

std::uint64_t CellId::train_env_seed(int episode) const {
    return derive_seed(derive_seed(seed, fmt::format("train|M{}", m_antennas)),
                       static_cast<std::uint64_t>(episode));
}

std::uint64_t CellId::eval_env_seed(int episode) const {
    return derive_seed(derive_seed(seed, fmt::format("eval|M{}", m_antennas)),
                       static_cast<std::uint64_t>(episode));
}

std::string CellId::tag() const { return fmt::format("{}_M{}_seed{}", algorithm, m_antennas, seed); }

std::vector<double> default_ccdf_grid() { return threshold_grid(-5.0, 40.0, 0.5); }

CellResult run_cell(const Config& config, const CellId& cell) {
    EnvConfig env_cfg = config.env;
    env_cfg.m_antennas = cell.m_antennas;
    Environment env(config.scenario, env_cfg);
    auto agent = make_agent(cell.algorithm, env, config.hyper, cell.agent_seed());

    CellResult out;
    out.summary.algorithm = cell.algorithm;
    out.summary.m_antennas = cell.m_antennas;
    out.summary.seed = cell.seed;
    out.eval_samples = {cell.algorithm, cell.m_antennas, std::to_string(cell.seed), {}};

    agent->begin_training(config.plan.episodes);
    for (int e = 0; e < config.plan.episodes; ++e) {
        const EpisodeResult r = agent->run_episode(env, cell.train_env_seed(e), true);
        out.train_log.push_back({e, r.steps, r.ret, r.loss, r.aborted});
        out.summary.loss_series.push_back(r.loss);
    }

    // Convergence is measured on the part of the loss series where updates ran.
    std::vector<double> finite;
    int offset = 0;
    for (const double l : out.summary.loss_series) {
        if (std::isfinite(l))
            finite.push_back(l);
        else if (finite.empty())
            ++offset;
    }
    if (auto c = convergence_point(finite)) out.summary.convergence_episode = *c + offset;

    const int horizon = env_cfg.horizon;
    const double max_w = config.scenario.max_bs_power_w;
    double sinr_acc = 0.0, power_acc = 0.0, rate_acc = 0.0;
    long steps = 0;
    int aborts = 0;
    for (int e = 0; e < config.plan.eval_episodes; ++e) {
        const EpisodeResult r = agent->run_episode(env, cell.eval_env_seed(e), false);
        std::vector<std::vector<double>> linear;
        for (const auto& rec : r.records) {
            std::vector<double> per_bs;
            double step_sinr = 0.0, step_power = 0.0;
            for (double db : rec.bs_effective_db) {
                per_bs.push_back(db_to_linear(db));
                step_sinr += db;
                out.eval_samples.samples.push_back(db);
            }
            for (double p : rec.powers_dbm) step_power += dbm_to_watt(p) / max_w;
            sinr_acc += step_sinr / static_cast<double>(rec.bs_effective_db.size());
            power_acc += step_power / static_cast<double>(rec.powers_dbm.size());
            linear.push_back(std::move(per_bs));
            ++steps;
        }
        const double c = sum_rate(linear, horizon);
        out.eval_sum_rates.push_back(c);
        rate_acc += c;
        aborts += r.aborted ? 1 : 0;
    }
    out.summary.avg_sum_rate = rate_acc / config.plan.eval_episodes;
    out.summary.avg_effective_sinr_db = steps > 0 ? sinr_acc / static_cast<double>(steps) : 0.0;
    out.summary.avg_normalized_tx_power = steps > 0 ? std::min(1.0, power_acc / static_cast<double>(steps)) : 0.0;
    out.summary.abort_rate = static_cast<double>(aborts) / config.plan.eval_episodes;

    if (config.plan.checkpoints && !config.plan.output_dir.empty()) {
        fs::create_directories(config.plan.output_dir);
        agent->save((fs::path(config.plan.output_dir) / ("ckpt_" + cell.tag())).string());
    }
    return out;
}

namespace {

std::string fmt_num(double x) {
    if (std::isnan(x)) return "nan";
    return fmt::format("{:.10g}", x);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) detail::throw_config("cannot write '" + path.string() + "'");
    out << content;
}

}  // namespace

std::string train_log_csv(const std::vector<TrainLogRow>& rows) {
    std::string s = "episode,steps,return,loss,aborted\n";
    for (const auto& r : rows)
        s += fmt::format("{},{},{},{},{}\n", r.episode, r.steps, fmt_num(r.ret), fmt_num(r.loss),
                         r.aborted ? 1 : 0);
    return s;
}

std::string metrics_csv(const std::vector<CellResult>& cells) {
    std::string s = "algorithm,M,seed,metric,value\n";
    for (const auto& c : cells) {
        const auto& r = c.summary;
        auto row = [&](const char* metric, double v) {
            s += fmt::format("{},{},{},{},{}\n", r.algorithm, r.m_antennas, r.seed, metric, fmt_num(v));
        };
        row("avg_sum_rate", r.avg_sum_rate);
        row("avg_effective_sinr_db", r.avg_effective_sinr_db);
        row("avg_normalized_tx_power", r.avg_normalized_tx_power);
        row("abort_rate", r.abort_rate);
        row("convergence_episode", r.convergence_episode ? *r.convergence_episode : -1.0);
        int train_aborts = 0;
        for (const auto& t : c.train_log) train_aborts += t.aborted ? 1 : 0;
        row("train_abort_rate",
            c.train_log.empty() ? 0.0 : static_cast<double>(train_aborts) / c.train_log.size());
    }
    return s;
}

std::string ccdf_csv(const std::vector<CellResult>& cells, const std::vector<double>& thresholds) {
    std::string s = "algorithm,M,seed,threshold_db,probability\n";
    auto emit = [&](const SinrSampleSet& set) {
        if (set.samples.empty()) return;
        for (const auto& p : ccdf(set, thresholds))
            s += fmt::format("{},{},{},{},{}\n", set.algorithm, set.m_antennas, set.seed,
                             fmt_num(p.threshold_db), fmt_num(p.probability));
    };
    // Pooled across seeds for every (algorithm, M), in first-appearance order.
    std::vector<SinrSampleSet> pooled;
    for (const auto& c : cells) {
        emit(c.eval_samples);
        auto it = std::find_if(pooled.begin(), pooled.end(), [&](const SinrSampleSet& p) {
            return p.algorithm == c.eval_samples.algorithm && p.m_antennas == c.eval_samples.m_antennas;
        });
        if (it == pooled.end()) {
            pooled.push_back({c.eval_samples.algorithm, c.eval_samples.m_antennas, "pooled", {}});
            it = pooled.end() - 1;
        }
        it->samples.insert(it->samples.end(), c.eval_samples.samples.begin(), c.eval_samples.samples.end());
    }
    for (const auto& p : pooled) emit(p);
    return s;
}

std::string summary_json(const std::vector<CellResult>& cells) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& c : cells) {
        const auto& r = c.summary;
        nlohmann::json losses = nlohmann::json::array();
        for (double l : r.loss_series) losses.push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json());
        runs.push_back({{"algorithm", r.algorithm},
                        {"M", r.m_antennas},
                        {"seed", r.seed},
                        {"avg_sum_rate", r.avg_sum_rate},
                        {"avg_effective_sinr_db", r.avg_effective_sinr_db},
                        {"avg_normalized_tx_power", r.avg_normalized_tx_power},
                        {"abort_rate", r.abort_rate},
                        {"convergence_episode",
                         r.convergence_episode ? nlohmann::json(*r.convergence_episode) : nlohmann::json()},
                        {"loss_series", losses}});
    }
    return nlohmann::json{{"runs", runs}}.dump(2) + "\n";
}

std::vector<CellResult> run_plan(const Config& config) {
    config.validate();
    std::vector<CellId> cells;
    for (const auto& algo : config.plan.algorithms)
        for (int m : config.plan.antenna_counts)
            for (auto seed : config.plan.seeds) cells.push_back({algo, m, seed});

    const fs::path out_dir = config.plan.output_dir;
    fs::create_directories(out_dir);

    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                results[i] = run_cell(config, cells[i]);
                write_file(out_dir / ("train_" + cells[i].tag() + ".csv"), train_log_csv(results[i].train_log));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int jobs = std::min<int>(config.plan.jobs, static_cast<int>(cells.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    if (config.plan.format == "json")
        write_file(out_dir / "summary.json", summary_json(results));
    else
        write_file(out_dir / "metrics.csv", metrics_csv(results));
    write_file(out_dir / "ccdf.csv", ccdf_csv(results, default_ccdf_grid()));
    return results;
}

}  // namespace beamrl
