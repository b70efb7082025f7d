// SPDX-License-Identifier: Apache-2.0
//
// uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
// Copyright (C) 2026 The uavsec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "uavsec/error.hpp"
#include "uavsec/harness.hpp"
#include "uavsec/hnet.hpp"
#include "uavsec/marl.hpp"
#include "uavsec/rates.hpp"
#include "uavsec/scenario.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace uavsec;

namespace {

py::dict step_dict(const StepOutput& s) {
    py::dict d;
    d["reward"] = s.reward;
    d["done"] = s.done;
    d["slot"] = s.info.slot;
    d["total_secrecy"] = s.info.rates.total_secrecy;
    d["secrecy"] = s.info.rates.secrecy;
    const Violations& v = s.info.violations;
    d["violations"] = py::dict(py::arg("rho_r") = v.rho_r, py::arg("rho_w") = v.rho_w,
                               py::arg("rho_neg_r") = v.rho_neg_r, py::arg("rho_q1") = v.rho_q1,
                               py::arg("rho_q0") = v.rho_q0, py::arg("rho_qF") = v.rho_qf);
    return d;
}

// Environment driven by exact HNet beams; moves are (distance m, heading rad) per UAV.
class HNetEnv {
public:
    explicit HNetEnv(const ExperimentConfig& cfg)
        : env_(cfg.train.env), params_(HNetParams::defaults(cfg.train.hnet_blocks)) {}

    void reset(std::uint64_t seed) { env_.reset(seed); }

    py::dict step(const std::vector<std::pair<double, double>>& moves) {
        const SystemConstants& c = env_.config().constants;
        if (moves.size() != c.num_uavs) throw Error(ErrorCode::ShapeMismatch, "step: one move per UAV");
        std::vector<Move> m;
        for (const auto& [dist, heading] : moves) m.push_back({dist, heading});
        return step_dict(env_.step(hnet_forward(env_.channels(), params_, c), m));
    }

    [[nodiscard]] std::vector<double> beam_state() const { return env_.beam_state(); }
    [[nodiscard]] std::vector<double> trajectory_observation() const { return env_.trajectory_observation(); }
    [[nodiscard]] std::size_t episode_length() const { return env_.episode_length(); }
    [[nodiscard]] std::size_t slot() const { return env_.slot(); }
    [[nodiscard]] bool done() const { return env_.done(); }
    [[nodiscard]] std::size_t num_uavs() const { return env_.config().constants.num_uavs; }

private:
    Env env_;
    HNetParams params_;
};

int run_command(const std::string& command, const std::string& config, std::optional<std::uint64_t> seed,
                std::optional<std::string> out, std::vector<std::string> overrides) {
    RunRequest req;
    req.command = command_from_string(command);
    req.config_path = config;
    req.seed = seed;
    req.out_dir = std::move(out);
    req.overrides = std::move(overrides);
    py::scoped_ostream_redirect stream(std::cerr, py::module_::import("sys").attr("stderr"));
    return run(req, std::cerr);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Secrecy-rate simulation and solvers for multi-UAV RSMA downlinks";
    m.attr("__version__") = kVersion;

    // Messages start with the error code name, e.g. "ConfigError: ...".
    py::register_exception<Error>(m, "UavsecError", PyExc_RuntimeError);

    m.def("dbm_to_watts", &dbm_to_watts, py::arg("dbm"));
    m.def("fnv1a64", &fnv1a64, py::arg("text"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("config_hash", [](const ExperimentConfig& c) { return c.config_hash; })
        .def_property_readonly("canonical", [](const ExperimentConfig& c) { return c.canonical; })
        .def_property_readonly("seed", [](const ExperimentConfig& c) { return c.train.seed; })
        .def_property_readonly("method", [](const ExperimentConfig& c) { return to_string(c.train.method); })
        .def_property_readonly("episodes", [](const ExperimentConfig& c) { return c.train.episodes; })
        .def_property_readonly("horizon", [](const ExperimentConfig& c) { return c.train.env.constants.horizon; })
        .def_property_readonly("power_w", [](const ExperimentConfig& c) { return c.train.env.constants.power_w; })
        .def_property_readonly("provenance", [](const ExperimentConfig& c) { return provenance_line(c); });

    m.def("parse_config", &parse_config, py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
    m.def("load_config", &load_config, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "emit_cdf",
        [](std::vector<double> samples, std::size_t bins) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : emit_cdf(std::move(samples), bins)) out.emplace_back(p.rate, p.fraction);
            return out;
        },
        py::arg("samples"), py::arg("bins") = 0);

    m.def(
        "oracle_instances",
        [](const ExperimentConfig& cfg, std::size_t instances, std::size_t samples) {
            py::list rows;
            for (const auto& r : oracle_instances(cfg, instances, samples)) {
                py::dict d;
                d["instance"] = r.instance;
                d["instance_seed"] = r.instance_seed;
                d["best_value"] = r.best_value;
                d["best_alpha"] = r.best_alpha;
                d["samples"] = r.samples;
                d["hnet_value"] = r.hnet_value;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config"), py::arg("instances"), py::arg("samples"));

    py::class_<HNetEnv>(m, "HNetEnv")
        .def(py::init<const ExperimentConfig&>(), py::arg("config"))
        .def("reset", &HNetEnv::reset, py::arg("seed"))
        .def("step", &HNetEnv::step, py::arg("moves"))
        .def("beam_state", &HNetEnv::beam_state)
        .def("trajectory_observation", &HNetEnv::trajectory_observation)
        .def_property_readonly("episode_length", &HNetEnv::episode_length)
        .def_property_readonly("slot", &HNetEnv::slot)
        .def_property_readonly("done", &HNetEnv::done)
        .def_property_readonly("num_uavs", &HNetEnv::num_uavs);

    m.def("run", &run_command, py::arg("command"), py::arg("config"), py::arg("seed") = py::none(),
          py::arg("out") = py::none(), py::arg("overrides") = std::vector<std::string>{},
          "Runs a CLI command; returns the exit status (0, 1, 2 for config errors, 3 for I/O errors).");
}
