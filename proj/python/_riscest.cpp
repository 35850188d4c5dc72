// SPDX-License-Identifier: Apache-2.0
//
// riscest - RIS-assisted XL-MIMO channel simulation and estimation toolkit
// Copyright (C) 2026 The riscest authors
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
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "riscest/complexity.hpp"
#include "riscest/pipeline.hpp"

namespace py = pybind11;
using namespace riscest;

namespace {

ExperimentConfig make_config(const std::string& profile, const std::map<std::string, py::object>& overrides) {
    ExperimentConfig cfg = profile_defaults(profile);
    for (const auto& [k, v] : overrides) set_config_value(cfg, k, py::str(v));
    cfg.validate();
    return cfg;
}

py::dict config_dict(const ExperimentConfig& cfg) {
    py::dict d;
    for (const auto& k : config_keys()) d[py::str(k)] = get_config_value(cfg, k);
    return d;
}

py::list rows_list(const std::vector<ResultRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["axis"] = r.axis;
        d["method"] = r.method;
        d["nmse_linear"] = r.nmse_linear;
        d["nmse_db"] = to_db(r.nmse_linear);
        d["n_samples"] = r.n_samples;
        d["seed"] = r.seed;
        out.append(d);
    }
    return out;
}

using Command = CommandOutput (*)(const ExperimentConfig&, std::ostream&);

py::dict run(Command cmd, const ExperimentConfig& cfg, bool echo) {
    std::ostringstream log;
    CommandOutput out;
    {
        py::gil_scoped_release release;
        if (echo) write_config_echo(cfg, "python");
        out = cmd(cfg, log);
    }
    py::dict d;
    d["rows"] = rows_list(out.rows);
    py::list files;
    for (const auto& f : out.files) files.append(f.string());
    d["files"] = files;
    d["log"] = log.str();
    return d;
}

py::array_t<float> planes(const std::vector<float>& v, const PatchDataset& ds) {
    return py::array_t<float>({static_cast<py::ssize_t>(ds.count), py::ssize_t{2}, static_cast<py::ssize_t>(ds.p_y),
                               static_cast<py::ssize_t>(ds.p_x)},
                              v.data());
}

} // namespace

PYBIND11_MODULE(_riscest, m) {
    m.doc() = "RIS cascaded-channel simulation, estimation and denoising";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

    m.def("bessel_j0", py::vectorize(bessel_j0), py::arg("x"));
    m.def("dft_schedule", [](int n, int l) { return dft_schedule(n, l).S; }, py::arg("n"), py::arg("l"));
    m.def("psd_sqrt", py::overload_cast<const RMatrix&>(&psd_sqrt), py::arg("r"));
    m.def("nmse", &nmse, py::arg("estimate"), py::arg("truth"));
    m.def("to_db", &to_db, py::arg("linear"));
    m.def("ls_estimate",
          [](const CMatrix& y, const CMatrix& s) {
              PhaseSchedule sched;
              sched.S = s;
              ReceivedPilots rx;
              rx.Y = y;
              return ls_estimate(rx, sched);
          },
          py::arg("received"), py::arg("schedule"), "G_ls = Y S^H (S S^H)^-1");

    m.def("config", [](const std::string& profile, const std::map<std::string, py::object>& kw) {
        return config_dict(make_config(profile, kw));
    }, py::arg("profile") = "desk", py::arg("overrides") = std::map<std::string, py::object>{},
          "Resolved configuration as a dict of strings.");

    m.def("correlation_matrices", [](const std::string& profile, const std::map<std::string, py::object>& kw) {
        const auto cfg = make_config(profile, kw);
        const ChannelModel model(cfg.channel_config(cfg.seed));
        return py::make_tuple(model.ris_correlation_matrix(), model.bs_correlation_matrix());
    }, py::arg("profile") = "desk", py::arg("overrides") = std::map<std::string, py::object>{});

    m.def("sample", [](const std::string& profile, const std::map<std::string, py::object>& kw, double snr_db,
                       std::uint64_t index, bool test_split) {
        const auto cfg = make_config(profile, kw);
        const Simulator sim(cfg);
        const auto s = sim.sample(test_split ? Split::test : Split::train, snr_db, index);
        py::dict d;
        d["G"] = s.realization.G;
        d["H"] = s.realization.H;
        d["f"] = s.realization.f;
        d["b"] = s.realization.b;
        d["b_hat"] = s.b_hat;
        d["Y"] = s.rx.Y;
        d["sigma_v2"] = s.rx.sigma_v2;
        d["S"] = sim.schedule().S;
        if (s.g_ls) d["G_ls"] = *s.g_ls;
        return d;
    }, py::arg("profile") = "desk", py::arg("overrides") = std::map<std::string, py::object>{},
          py::arg("snr_db") = 10.0, py::arg("index") = 0, py::arg("test_split") = true,
          "One simulated observation: channel, received pilots and the LS estimate.");

    m.def("closed_form_cost", [](std::uint64_t h, std::uint64_t w, std::uint64_t c0, std::uint64_t k,
                                 std::uint64_t l) {
        const auto c = closed_form_cost(h, w, c0, k, l);
        return py::dict(py::arg("encoder") = c.encoder_cost, py::arg("bottleneck") = c.bottleneck_cost,
                        py::arg("decoder") = c.decoder_cost, py::arg("total") = c.total);
    });

    m.def("load_dataset", [](const std::string& path) {
        const PatchDataset ds = deserialize_dataset(path);
        py::dict d;
        d["inputs"] = planes(ds.data, ds);
        d["labels"] = planes(ds.labels, ds);
        d["meta"] = ds.meta;
        return d;
    }, py::arg("path"), "Patch container as float32 arrays of shape (count, 2, rows, cols).");

    m.def("denoise", [](const std::string& checkpoint, const CMatrix& g_ls, int tile_h, int tile_w) {
        nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
        nn::InferOptions opt;
        if (tile_h > 0) opt = {nn::InferMode::tiled, tile_h, tile_w};
        return nn::infer(ck.net, g_ls, opt);
    }, py::arg("checkpoint"), py::arg("g_ls"), py::arg("tile_h") = 0, py::arg("tile_w") = 0);

    auto command = [&](const char* name, Command cmd, const char* doc) {
        m.def(name, [cmd](const std::string& profile, const std::map<std::string, py::object>& kw, bool echo) {
            return run(cmd, make_config(profile, kw), echo);
        }, py::arg("profile") = "desk", py::arg("overrides") = std::map<std::string, py::object>{},
              py::arg("echo_config") = true, doc);
    };
    command("generate", cmd_generate, "Simulate and write the train/validation/test containers.");
    command("train", cmd_train, "Train the denoiser on the generated patches.");
    command("evaluate", cmd_eval, "Per-SNR NMSE of every estimator.");
    command("sweep", cmd_sweep, "NMSE along one configuration axis.");
    command("direct", cmd_direct, "Direct-link training and evaluation.");
    command("complexity", cmd_complexity, "Closed-form and per-layer MAC counts.");
}
