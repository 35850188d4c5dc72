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
// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any fails. The learning criteria (8-10, 12) share one desk-scale
// generate/train/eval run; a second run checks determinism.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "riscest/complexity.hpp"
#include "riscest/pipeline.hpp"

using namespace riscest;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

long double j0_series(long double x) {
    long double term = 1, sum = 1;
    const long double q = -x * x / 4;
    for (int k = 1; k < 60; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return sum;
}

double db(const std::vector<ResultRow>& rows, const std::string& axis, const std::string& method) {
    for (const auto& r : rows)
        if (r.axis == axis && r.method == method) return to_db(r.nmse_linear);
    return std::nan("");
}

double seconds(const std::vector<TimingRow>& rows, const std::string& axis, const std::string& method) {
    for (const auto& r : rows)
        if (r.axis == axis && r.method == method) return r.seconds;
    return std::nan("");
}

// ---- analytic criteria ----

Outcome dft_orthogonality() {
    double worst = 0;
    for (auto [n, l] : {std::pair{4, 4}, {16, 16}, {16, 32}}) {
        const CMatrix& s = dft_schedule(n, l).S;
        const CMatrix e = s * s.adjoint() - static_cast<double>(l) * CMatrix::Identity(n, n);
        worst = std::max(worst, e.norm() / (l * std::sqrt(static_cast<double>(n))));
    }
    return {worst < 1e-12, format("max normalised error %.2e", worst)};
}

Outcome noiseless_ls(const ExperimentConfig& cfg) {
    const ChannelModel model(cfg.channel_config(cfg.seed));
    const auto sched = dft_schedule(cfg.elements(), cfg.pilot_l);
    PilotConfig p = cfg.pilot_config(std::numeric_limits<double>::infinity());
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const auto r = model.realize(i);
        Rng rng(derive_seed(cfg.seed, i, Stream::pilot_noise));
        worst = std::max(worst, nmse(ls_estimate(simulate_pilots(r, sched, p, rng, false), sched), r.G));
    }
    return {worst < 1e-20, format("max NMSE %.2e over 100 realisations", worst)};
}

Outcome ls_noise_law(const ExperimentConfig& cfg) {
    const ChannelModel model(cfg.channel_config(derive_seed(cfg.seed, 7, Stream::channel)));
    const auto sched = dft_schedule(cfg.elements(), cfg.pilot_l);
    const double mn = static_cast<double>(cfg.antennas()) * cfg.elements();
    bool ok = true;
    std::string detail;
    for (double sigma2 : {0.1, 1.0}) {
        PilotConfig p = cfg.pilot_config(-10.0 * std::log10(sigma2));
        double err = 0, energy = 0;
        for (int i = 0; i < 2000; ++i) {
            const auto r = model.realize(i);
            Rng rng(derive_seed(cfg.seed, i, Stream::pilot_noise));
            err += (ls_estimate(simulate_pilots(r, sched, p, rng, false), sched) - r.G).squaredNorm();
            energy += r.G.squaredNorm();
        }
        const double mc = err / energy;
        const double analytic = sigma2 * mn / (cfg.pilot_l * energy / 2000.0);
        const double rel = std::abs(mc / analytic - 1.0);
        ok = ok && rel < 0.05;
        detail += format("%ssigma2=%g: MC %.4e vs %.4e (%.2f%%)", detail.empty() ? "" : ", ", sigma2, mc, analytic,
                         100 * rel);
    }
    return {ok, detail};
}

Outcome bessel_accuracy() {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = 20.0 * i / 999.0;
        worst = std::max(worst, std::abs(bessel_j0(x) - static_cast<double>(j0_series(x))));
    }
    return {worst < 1e-10, format("max abs error %.2e on [0, 20]", worst)};
}

Outcome correlation_sanity(const ExperimentConfig& cfg) {
    const ChannelConfig cc = cfg.channel_config(cfg.seed);
    CorrelationConfig bc;
    bc.rho = cfg.rho;
    bc.bs = cc.bs;
    bool ok = true;
    double min_eig = 1e300, recon = 0;
    for (const RMatrix& r : {ris_correlation(cc.ris).entries, bs_correlation(bc).entries}) {
        ok = ok && (r.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12;
        ok = ok && (r - r.transpose()).norm() == 0.0;
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<RMatrix>(r).eigenvalues().minCoeff());
        const RMatrix s = psd_sqrt(r);
        recon = std::max(recon, (s * s - r).norm() / r.norm());
    }
    ok = ok && min_eig >= -1e-10 && recon < 1e-8;
    return {ok, format("min eigenvalue %.3e, sqrt reconstruction %.2e", min_eig, recon)};
}

Outcome gradient_check(const ExperimentConfig& cfg) {
    nn::NetConfig nc = cfg.net_config();
    nc.levels = 2;
    nn::DenoiserNet<double> net(nc);
    nn::randomize_parameters(net, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 11, Stream::probe));
    nn::Tensor4<double> x(2, 2, cfg.patch_h, cfg.patch_w);
    for (auto& v : x.data) v = rng.uniform(-1, 1);
    const auto r = nn::gradient_check(net, x, 120, cfg.seed);
    return {r.max_rel_error < 1e-4 && r.probes >= 100,
            format("max rel error %.2e over %d probes (C0=%d, %d skipped)", r.max_rel_error, r.probes,
                   nc.base_filters, r.skipped)};
}

Outcome complexity_closed_form() {
    const auto c = closed_form_cost(32, 32, 32, 3, 3);
    nn::Conv2d<float> conv("c", 2, 3, 3);
    const auto e = exact_layer_cost(conv, 4, 4);
    return {c.total == 122683392u && e.total == 864u,
            format("closed form %llu, single conv %llu", static_cast<unsigned long long>(c.total),
                   static_cast<unsigned long long>(e.total))};
}

// ---- learning criteria ----

struct Run {
    CommandOutput eval, sweep;
    double train_cpu = 0, eval_wall = 0, total_wall = 0;
};

Run pipeline(ExperimentConfig cfg, bool with_sweep) {
    Run r;
    std::ostringstream log;
    const auto t0 = Clock::now();
    fs::remove_all(cfg.out_dir);
    cmd_generate(cfg, log);
    const double c0 = cpu_seconds();
    cmd_train(cfg, log);
    r.train_cpu = cpu_seconds() - c0;
    const auto t1 = Clock::now();
    r.eval = cmd_eval(cfg, log);
    r.eval_wall = since(t1);
    if (with_sweep) {
        cfg.sweep_axis = "antennas_M";
        cfg.sweep_values = "8x8,16x16";
        r.sweep = cmd_sweep(cfg, log);
    }
    r.total_wall = since(t0);
    return r;
}

Outcome estimator_ordering(const Run& run) {
    const auto& rows = run.eval.rows;
    const double l5 = db(rows, "-5", "ls"), m5 = db(rows, "-5", "lmmse");
    const double l0 = db(rows, "0", "ls"), m0 = db(rows, "0", "lmmse");
    const double l10 = db(rows, "10", "ls"), b10 = db(rows, "10", "blmmse");
    const double l15 = db(rows, "15", "ls"), b15 = db(rows, "15", "blmmse");
    const bool ok = m5 <= l5 && m0 <= l0 && b10 > l10 && b15 > l15;
    return {ok, format("LMMSE %.2f/%.2f vs LS %.2f/%.2f dB at -5/0; B-LMMSE %.2f/%.2f vs LS %.2f/%.2f dB at "
                       "10/15; eval %.0f s",
                       m5, m0, l5, l0, b10, b15, l10, l15, run.eval_wall)};
}

Outcome learning_beats_ls(const Run& run) {
    const auto& rows = run.eval.rows;
    bool ok = run.train_cpu < 15 * 60;
    std::string d;
    for (const char* s : {"-5", "0", "5"}) {
        const double ls = db(rows, s, "ls"), net = db(rows, s, "net_full");
        ok = ok && net < ls;
        d += format("%s dB: net %.2f vs LS %.2f; ", s, net, ls);
    }
    const double margin = db(rows, "-5", "ls") - db(rows, "-5", "net_full");
    ok = ok && margin >= 2.0;
    return {ok, d + format("margin at -5 dB %.2f dB; training %.0f CPU-s", margin, run.train_cpu)};
}

Outcome full_vs_tiled(const Run& run) {
    const double f = db(run.eval.rows, "10", "net_full"), t = db(run.eval.rows, "10", "net_tiled");
    const double tf = seconds(run.eval.timing, "10", "net_full"), tt = seconds(run.eval.timing, "10", "net_tiled");
    return {std::abs(f - t) < 1.0 && tt >= tf,
            format("full %.2f dB, tiled %.2f dB (|diff| %.2f); wall full %.3f s, tiled %.3f s (ratio %.3f)", f, t,
                   std::abs(f - t), tf, tt, tt / tf)};
}

Outcome size_generalisation(const Run& run) {
    const double a = db(run.sweep.rows, "8x8", "net_full"), b = db(run.sweep.rows, "16x16", "net_full");
    return {std::abs(a - b) < 1.5, format("net at 10 dB: M=64 %.2f dB, M=256 %.2f dB (|diff| %.2f)", a, b,
                                          std::abs(a - b))};
}

Outcome determinism(const ExperimentConfig& cfg, const fs::path& first) {
    ExperimentConfig c = cfg;
    c.out_dir = (first.parent_path() / (first.filename().string() + "_repeat")).string();
    pipeline(c, false);
    std::vector<std::string> names{"train.rcds", "val.rcds", "model.rcnn", "loss.csv", "results.csv"};
    for (double s : cfg.snr_grid) names.push_back(test_container(cfg, s).filename().string());
    std::string differ;
    for (const auto& n : names)
        if (!fs::exists(first / n) || slurp(first / n) != slurp(fs::path(c.out_dir) / n)) differ += " " + n;
    return {differ.empty(), differ.empty() ? format("%zu files byte-identical (timing.csv holds wall-clock times "
                                                    "and is not compared)",
                                                    names.size())
                                           : "differ:" + differ};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string out_dir = "acceptance_out";
    std::vector<int> only, allow_fail;
    std::vector<std::string> sets;
    app.add_option("--out-dir", out_dir, "working directory for the pipeline runs");
    app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
    app.add_option("--set", sets, "key=value config override");
    app.add_option("--allow-fail", allow_fail, "criteria whose FAIL does not change the exit status")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg = profile_defaults("desk");
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "--set expects key=value\n");
            return 2;
        }
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.out_dir = out_dir;
    cfg.deterministic = true;
    cfg.validate();

    const std::set<int> wanted(only.begin(), only.end());
    auto want = [&](int i) { return wanted.empty() || wanted.count(i) > 0; };
    const std::set<int> tolerated(allow_fail.begin(), allow_fail.end());
    bool all = true, gating = true;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        if (!want(id)) return;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        if (!o.pass && !tolerated.count(id)) gating = false;
        std::printf("criterion %2d %s  %-26s %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                    since(t0));
        std::fflush(stdout);
    };

    report(1, "dft_orthogonality", dft_orthogonality);
    report(2, "noiseless_ls_recovery", [&] { return noiseless_ls(cfg); });
    report(3, "ls_noise_law", [&] { return ls_noise_law(cfg); });
    report(4, "bessel_accuracy", bessel_accuracy);
    report(5, "correlation_sanity", [&] { return correlation_sanity(cfg); });
    report(6, "gradient_check", [&] { return gradient_check(cfg); });

    const bool learning = want(7) || want(8) || want(9) || want(10) || want(12);
    Run run;
    if (learning) {
        const auto t0 = Clock::now();
        run = pipeline(cfg, want(10));
        std::printf("desk pipeline finished in %.0f s\n", since(t0));
    }
    report(7, "estimator_ordering", [&] { return estimator_ordering(run); });
    report(8, "learning_beats_ls", [&] { return learning_beats_ls(run); });
    report(9, "full_vs_tiled", [&] { return full_vs_tiled(run); });
    report(10, "size_generalisation", [&] { return size_generalisation(run); });
    report(11, "complexity_closed_form", complexity_closed_form);
    report(12, "determinism", [&] { return determinism(cfg, cfg.out_dir); });
    std::printf("%s\n", all ? "all selected criteria passed" : "some criteria FAILED");
    if (!all && gating) std::printf("only criteria listed in --allow-fail failed\n");
    return gating ? 0 : 1;
}
