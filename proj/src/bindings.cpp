#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/complex.h>

#include "beamrl/agents.hpp"
#include "beamrl/beamcode.hpp"
#include "beamrl/channel.hpp"
#include "beamrl/config.hpp"
#include "beamrl/environment.hpp"
#include "beamrl/errors.hpp"
#include "beamrl/harness.hpp"
#include "beamrl/metrics.hpp"

namespace py = pybind11;
using namespace beamrl;

PYBIND11_MODULE(_beamrl, m) {
    m.doc() = "Multi-cell power and beam control with reinforcement learning";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("carrier_freq_hz", &Scenario::carrier_freq_hz)
        .def_readwrite("cell_radius_m", &Scenario::cell_radius_m)
        .def_readwrite("inter_site_distance_m", &Scenario::inter_site_distance_m)
        .def_readwrite("n_paths", &Scenario::n_paths)
        .def_readwrite("p_los", &Scenario::p_los)
        .def_readwrite("ue_speed_kmh", &Scenario::ue_speed_kmh)
        .def_readwrite("frame_duration_s", &Scenario::frame_duration_s)
        .def_readwrite("noise_power_dbm", &Scenario::noise_power_dbm)
        .def_readwrite("max_bs_power_w", &Scenario::max_bs_power_w)
        .def_property_readonly("max_bs_power_dbm", &Scenario::max_bs_power_dbm);
    m.def("scenario_preset", [](const std::string& name) { return scenario_preset(name); }, py::arg("name"));
    m.def("path_loss_db", &path_loss_db, py::arg("scenario"), py::arg("distance_m"), py::arg("los"));
    m.def("fading_correlation", &fading_correlation, py::arg("scenario"));

    py::class_<Codebook>(m, "Codebook")
        .def(py::init<int, double>(), py::arg("m_antennas"), py::arg("spacing_in_wavelengths") = 0.5)
        .def_property_readonly("m_antennas", &Codebook::m_antennas)
        .def("__len__", &Codebook::size)
        .def("angle", &Codebook::angle)
        .def("__getitem__", [](const Codebook& cb, int n) {
            if (n < 0 || n >= cb.size()) throw py::index_error();
            const auto& v = cb[n];
            return std::vector<std::complex<double>>(v.data(), v.data() + v.size());
        });
    m.def("step_beam", &step_beam, py::arg("index"), py::arg("direction"), py::arg("codebook_size"));

    py::class_<EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("m_antennas", &EnvConfig::m_antennas)
        .def_readwrite("horizon", &EnvConfig::horizon)
        .def_readwrite("gamma_cutoff_db", &EnvConfig::gamma_cutoff_db)
        .def_readwrite("gamma0_db", &EnvConfig::gamma0_db)
        .def_readwrite("beam_limit_multiplier", &EnvConfig::beam_limit_multiplier);

    py::class_<SinrReport>(m, "SinrReport")
        .def_readonly("sinr_db", &SinrReport::sinr_db)
        .def_readonly("effective_db", &SinrReport::effective_db)
        .def_readonly("bs_effective_db", &SinrReport::bs_effective_db)
        .def_readonly("powers_dbm", &SinrReport::powers_dbm)
        .def_readonly("beams", &SinrReport::beams);

    py::class_<StepOutcome>(m, "StepOutcome")
        .def_readonly("next_state", &StepOutcome::next_state)
        .def_readonly("reward", &StepOutcome::reward)
        .def_readonly("done", &StepOutcome::done)
        .def_readonly("aborted", &StepOutcome::aborted)
        .def_readonly("info", &StepOutcome::info);

    py::class_<Environment>(m, "Environment")
        .def(py::init<Scenario, EnvConfig>(), py::arg("scenario") = Scenario{}, py::arg("config") = EnvConfig{})
        .def("reset", &Environment::reset, py::arg("seed"))
        .def("step", &Environment::step, py::arg("action"))
        .def("evaluate", &Environment::evaluate, py::arg("powers_dbm"), py::arg("beams"))
        .def("action_low", &Environment::action_low)
        .def("action_high", &Environment::action_high)
        .def_property_readonly("max_power_dbm", &Environment::max_power_dbm);
    m.def("hierarchical_reward",
          py::overload_cast<double, const std::vector<double>&, const std::vector<double>&, double>(
              &hierarchical_reward),
          py::arg("step_reward"), py::arg("goal"), py::arg("action"), py::arg("weight") = 1.0);

    py::class_<EpisodeResult>(m, "EpisodeResult")
        .def_readonly("steps", &EpisodeResult::steps)
        .def_readonly("ret", &EpisodeResult::ret)
        .def_readonly("loss", &EpisodeResult::loss)
        .def_readonly("aborted", &EpisodeResult::aborted);

    py::class_<Agent>(m, "Agent")
        .def_property_readonly("name", &Agent::name)
        .def("begin_training", &Agent::begin_training, py::arg("total_episodes"))
        .def("run_episode", &Agent::run_episode, py::arg("env"), py::arg("env_seed"), py::arg("learn"),
             py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("episodes_trained", &Agent::episodes_trained);
    m.def(
        "make_agent",
        [](const std::string& algorithm, const Environment& env, const Config& config, std::uint64_t seed) {
            return make_agent(algorithm, env, config.hyper, seed);
        },
        py::arg("algorithm"), py::arg("env"), py::arg("config"), py::arg("seed"));
    m.def("fpa_power", &fpa_power, py::arg("scenario"), py::arg("n_prb_total"), py::arg("n_prb_allocated"));
    m.def("algorithm_names", &algorithm_names);

    py::class_<Config>(m, "Config")
        .def(py::init([] { return parse_config_text(""); }))
        .def_readwrite("scenario", &Config::scenario)
        .def_readwrite("env", &Config::env)
        .def("set", [](Config& c, const std::string& key, const std::string& value) {
                apply_setting(c, key, value);
                c.validate();
            },
             py::arg("key"), py::arg("value"))
        .def("to_text", [](const Config& c) { return to_config_text(c); })
        .def_property(
            "output_dir", [](const Config& c) { return c.plan.output_dir; },
            [](Config& c, const std::string& d) { c.plan.output_dir = d; });
    m.def("parse_config_text", &parse_config_text, py::arg("text"));
    m.def("parse_config", &parse_config, py::arg("path"));

    py::class_<RunSummary>(m, "RunSummary")
        .def_readonly("algorithm", &RunSummary::algorithm)
        .def_readonly("m_antennas", &RunSummary::m_antennas)
        .def_readonly("seed", &RunSummary::seed)
        .def_readonly("avg_sum_rate", &RunSummary::avg_sum_rate)
        .def_readonly("avg_effective_sinr_db", &RunSummary::avg_effective_sinr_db)
        .def_readonly("avg_normalized_tx_power", &RunSummary::avg_normalized_tx_power)
        .def_readonly("loss_series", &RunSummary::loss_series)
        .def_readonly("abort_rate", &RunSummary::abort_rate)
        .def_readonly("convergence_episode", &RunSummary::convergence_episode);

    py::class_<CellResult>(m, "CellResult")
        .def_readonly("summary", &CellResult::summary)
        .def_property_readonly("eval_samples", [](const CellResult& r) { return r.eval_samples.samples; })
        .def_readonly("eval_sum_rates", &CellResult::eval_sum_rates);

    m.def(
        "run_cell",
        [](const Config& config, const std::string& algorithm, int m_antennas, std::uint64_t seed) {
            return run_cell(config, {algorithm, m_antennas, seed});
        },
        py::arg("config"), py::arg("algorithm"), py::arg("m_antennas"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
    m.def("run_plan", &run_plan, py::arg("config"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "ccdf",
        [](const std::vector<double>& samples, const std::vector<double>& thresholds) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : ccdf(samples, thresholds)) out.emplace_back(p.threshold_db, p.probability);
            return out;
        },
        py::arg("samples"), py::arg("thresholds"));
    m.def("threshold_grid", &threshold_grid, py::arg("lo"), py::arg("hi"), py::arg("step"));
    m.def("sum_rate", &sum_rate, py::arg("effective_sinr_linear"), py::arg("horizon"));
    m.def("convergence_point", &convergence_point, py::arg("series"), py::arg("window") = 20,
          py::arg("rel_tol") = 0.05);
}
