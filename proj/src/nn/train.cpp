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
#include "riscest/nn/train.hpp"

#include <cstdio>
#include <sstream>

#include "riscest/detail/binio.hpp"

namespace riscest::nn {

namespace {

constexpr std::string_view kMagic = "RCNN";
constexpr const char* kMetaPrefix = "meta.";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) throw IntegrityError("bad number in checkpoint: " + s);
    return d;
}

std::string encode_history(const std::vector<EpochLoss>& h) {
    std::string out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(h[i].epoch) + ':' + fmt_double(h[i].lr) + ':' + fmt_double(h[i].train_loss) + ':' +
               (std::isnan(h[i].val_loss) ? std::string("nan") : fmt_double(h[i].val_loss));
    }
    return out;
}

std::vector<EpochLoss> decode_history(const std::string& text) {
    std::vector<EpochLoss> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ';')) {
        std::vector<std::string> f;
        std::istringstream it(item);
        std::string part;
        while (std::getline(it, part, ':')) f.push_back(part);
        if (f.size() != 4) throw IntegrityError("malformed loss history entry: " + item);
        try {
            EpochLoss e;
            e.epoch = std::stoi(f[0]);
            e.lr = parse_double(f[1]);
            e.train_loss = parse_double(f[2]);
            e.val_loss = parse_double(f[3]);
            out.push_back(e);
        } catch (const std::logic_error&) {
            throw IntegrityError("malformed loss history entry: " + item);
        }
    }
    return out;
}

} // namespace

GradCheckResult finite_difference_check(const std::vector<std::pair<double*, std::size_t>>& values,
                                        const std::vector<std::pair<const double*, std::size_t>>& grads,
                                        const std::function<double()>& loss,
                                        const std::function<std::uint64_t()>& signature, int probes,
                                        std::uint64_t seed, double step) {
    if (values.size() != grads.size() || values.empty()) throw ArgumentError("probe slots mismatch");
    Rng rng(derive_seed(seed, 0, Stream::probe));
    const std::uint64_t sig0 = signature();
    // Absolute floor for gradients that vanish exactly (a bias feeding a
    // train-mode batch norm), where both sides are pure round-off.
    const double floor = 1e-5 * (1.0 + std::abs(loss()));
    GradCheckResult res;
    const int max_attempts = 20 * probes + 100;
    for (int attempt = 0; attempt < max_attempts && res.probes < probes; ++attempt) {
        const auto slot = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(values.size()) - 1));
        if (values[slot].second == 0) continue;
        const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(values[slot].second) - 1));
        double* v = values[slot].first + k;
        const double analytic = grads[slot].first[k];
        const double orig = *v;
        *v = orig + step;
        const double lp = loss();
        const bool sp = signature() == sig0;
        *v = orig - step;
        const double lm = loss();
        const bool sm = signature() == sig0;
        *v = orig;
        if (!sp || !sm) {
            ++res.skipped;
            continue;
        }
        const double numeric = (lp - lm) / (2.0 * step);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        res.max_rel_error = std::max(res.max_rel_error, std::abs(analytic - numeric) / denom);
        ++res.probes;
    }
    loss();  // leave layer caches at the unperturbed point
    return res;
}

namespace {

Tensor4<double> random_weights(const Tensor4<double>& like, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 1, Stream::probe));
    Tensor4<double> w(like.n, like.c, like.h, like.w);
    for (auto& v : w.data) v = rng.uniform(-1.0, 1.0);
    return w;
}

double weighted_sum(const Tensor4<double>& y, const Tensor4<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * w.data[i];
    return s;
}

} // namespace

GradCheckResult gradient_check(DenoiserNet<double>& net, const Tensor4<double>& x, int probes, std::uint64_t seed,
                               bool train_mode) {
    Tensor4<double> input = x;
    net.zero_grad();
    const Tensor4<double> y = net.forward(input, train_mode);
    const Tensor4<double> w = random_weights(y, seed);
    const Tensor4<double> dx = net.backward(w);

    std::vector<std::pair<double*, std::size_t>> values;
    std::vector<std::pair<const double*, std::size_t>> grads;
    for (auto* p : net.params()) {
        values.emplace_back(p->value.data(), p->size());
        grads.emplace_back(p->grad.data(), p->size());
    }
    values.emplace_back(input.data.data(), input.size());
    grads.emplace_back(dx.data.data(), dx.size());
    auto loss = [&] { return weighted_sum(net.forward(input, train_mode), w); };
    auto sig = [&] { return net.activation_signature(); };
    return finite_difference_check(values, grads, loss, sig, probes, seed);
}

GradCheckResult gradient_check(Conv2d<double>& conv, const Tensor4<double>& x, int probes, std::uint64_t seed) {
    Tensor4<double> input = x;
    conv.weight.zero_grad();
    conv.bias.zero_grad();
    const Tensor4<double> y = conv.forward(input);
    const Tensor4<double> w = random_weights(y, seed);
    const Tensor4<double> dx = conv.backward(w);
    std::vector<std::pair<double*, std::size_t>> values{{conv.weight.value.data(), conv.weight.size()},
                                                        {conv.bias.value.data(), conv.bias.size()},
                                                        {input.data.data(), input.size()}};
    std::vector<std::pair<const double*, std::size_t>> grads{{conv.weight.grad.data(), conv.weight.size()},
                                                             {conv.bias.grad.data(), conv.bias.size()},
                                                             {dx.data.data(), dx.size()}};
    auto loss = [&] { return weighted_sum(conv.forward(input), w); };
    return finite_difference_check(values, grads, loss, [] { return std::uint64_t{0}; }, probes, seed);
}

void randomize_parameters(DenoiserNet<double>& net, std::uint64_t seed, double scale) {
    net.init(seed);
    Rng rng(derive_seed(seed, 2, Stream::probe));
    for (auto* p : net.params())
        for (auto& v : p->value) v += rng.uniform(-scale, scale);
}

std::string encode_checkpoint(const Checkpoint& ck) {
    const NetConfig& nc = ck.net_config;
    if (!(ck.net.config() == nc)) throw ArgumentError("checkpoint net does not match its config");
    const TrainConfig& tc = ck.train_config;
    detail::Header h;
    for (const auto& [k, v] : ck.meta) h[kMetaPrefix + k] = v;
    h["levels"] = std::to_string(nc.levels);
    h["base_filters"] = std::to_string(nc.base_filters);
    h["convs_per_block"] = std::to_string(nc.convs_per_block);
    h["kernel"] = std::to_string(nc.kernel);
    h["batchnorm"] = nc.batchnorm ? "1" : "0";
    h["in_channels"] = std::to_string(nc.in_channels);
    h["out_channels"] = std::to_string(nc.out_channels);
    h["patch_h"] = std::to_string(nc.patch_h);
    h["patch_w"] = std::to_string(nc.patch_w);
    h["lr"] = fmt_double(tc.lr);
    h["decay"] = fmt_double(tc.decay);
    h["batch_size"] = std::to_string(tc.batch_size);
    h["epochs"] = std::to_string(tc.epochs);
    h["beta1"] = fmt_double(tc.beta1);
    h["beta2"] = fmt_double(tc.beta2);
    h["eps"] = fmt_double(tc.eps);
    h["seed"] = std::to_string(tc.seed);
    h["val_fraction"] = fmt_double(tc.val_fraction);
    h["epochs_done"] = std::to_string(ck.state.epochs_done);
    h["history"] = encode_history(ck.state.history);
    h["has_optimizer"] = ck.has_optimizer ? "1" : "0";
    h["adam_step"] = std::to_string(ck.state.adam.step);
    h["dtype"] = "f32le";

    std::size_t n_params = ck.net.parameter_count();
    std::size_t n_buffers = 0;
    for (const auto* b : ck.net.buffers()) n_buffers += b->size();
    h["param_count"] = std::to_string(n_params);
    h["buffer_count"] = std::to_string(n_buffers);
    const std::size_t floats = n_params + n_buffers + (ck.has_optimizer ? 2 * n_params : 0);
    h["payload_bytes"] = std::to_string(4 * floats);

    std::string out;
    detail::put_preamble(out, kMagic, kCheckpointVersion, h);
    for (const auto* p : ck.net.params()) detail::put_f32s(out, p->value);
    for (const auto* b : ck.net.buffers()) detail::put_f32s(out, *b);
    if (ck.has_optimizer) {
        const auto& params = ck.net.params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (ck.state.adam.m.size() == params.size())
                detail::put_f32s(out, ck.state.adam.m[i]);
            else
                detail::put_f32s(out, std::vector<float>(params[i]->size(), 0.0f));
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (ck.state.adam.v.size() == params.size())
                detail::put_f32s(out, ck.state.adam.v[i]);
            else
                detail::put_f32s(out, std::vector<float>(params[i]->size(), 0.0f));
        }
    }
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    const detail::Preamble pre = detail::read_preamble(bytes, kMagic, kCheckpointVersion);
    const auto& h = pre.header;
    Checkpoint ck;
    NetConfig& nc = ck.net_config;
    nc.levels = static_cast<int>(detail::require_int(h, "levels"));
    nc.base_filters = static_cast<int>(detail::require_int(h, "base_filters"));
    nc.convs_per_block = static_cast<int>(detail::require_int(h, "convs_per_block"));
    nc.kernel = static_cast<int>(detail::require_int(h, "kernel"));
    nc.batchnorm = detail::require_int(h, "batchnorm") != 0;
    nc.in_channels = static_cast<int>(detail::require_int(h, "in_channels"));
    nc.out_channels = static_cast<int>(detail::require_int(h, "out_channels"));
    nc.patch_h = static_cast<int>(detail::require_int(h, "patch_h"));
    nc.patch_w = static_cast<int>(detail::require_int(h, "patch_w"));
    try {
        nc.validate();
    } catch (const ConfigError& e) {
        throw IntegrityError(std::string("checkpoint holds an invalid net config: ") + e.what());
    }
    TrainConfig& tc = ck.train_config;
    tc.lr = detail::require_double(h, "lr");
    tc.decay = detail::require_double(h, "decay");
    tc.batch_size = static_cast<int>(detail::require_int(h, "batch_size"));
    tc.epochs = static_cast<int>(detail::require_int(h, "epochs"));
    tc.beta1 = detail::require_double(h, "beta1");
    tc.beta2 = detail::require_double(h, "beta2");
    tc.eps = detail::require_double(h, "eps");
    tc.seed = static_cast<std::uint64_t>(std::stoull(detail::require_key(h, "seed")));
    tc.val_fraction = detail::require_double(h, "val_fraction");
    if (detail::require_key(h, "dtype") != "f32le") throw IntegrityError("unsupported dtype");
    ck.state.epochs_done = static_cast<int>(detail::require_int(h, "epochs_done"));
    ck.state.history = decode_history(detail::require_key(h, "history"));
    ck.has_optimizer = detail::require_int(h, "has_optimizer") != 0;
    ck.state.adam.step = detail::require_int(h, "adam_step");

    ck.net = DenoiserNet<float>(nc);
    std::size_t n_params = ck.net.parameter_count();
    std::size_t n_buffers = 0;
    for (const auto* b : ck.net.buffers()) n_buffers += b->size();
    if (static_cast<std::size_t>(detail::require_int(h, "param_count")) != n_params ||
        static_cast<std::size_t>(detail::require_int(h, "buffer_count")) != n_buffers)
        throw IntegrityError("checkpoint parameter counts do not match its net config");
    const std::size_t floats = n_params + n_buffers + (ck.has_optimizer ? 2 * n_params : 0);
    if (static_cast<std::size_t>(detail::require_int(h, "payload_bytes")) != 4 * floats)
        throw IntegrityError("checkpoint header payload size disagrees with its parameter counts");
    const std::size_t payload = bytes.size() - pre.payload_offset;
    if (payload < 4 * floats)
        throw TruncatedError("checkpoint payload has " + std::to_string(payload) + " of " +
                             std::to_string(4 * floats) + " bytes");
    if (payload > 4 * floats) throw IntegrityError("trailing bytes after checkpoint payload");

    std::size_t at = pre.payload_offset;
    auto read_into = [&](std::vector<float>& dst) {
        for (auto& v : dst) {
            v = detail::get_f32(bytes, at);
            at += 4;
        }
    };
    for (auto* p : ck.net.params()) read_into(p->value);
    for (auto* b : ck.net.buffers()) read_into(*b);
    if (ck.has_optimizer) {
        ck.state.adam.ensure(ck.net.params());
        for (auto& m : ck.state.adam.m) read_into(m);
        for (auto& v : ck.state.adam.v) read_into(v);
    }
    const std::string prefix = kMetaPrefix;
    for (const auto& [k, v] : h)
        if (k.starts_with(prefix)) ck.meta[k.substr(prefix.size())] = v;
    return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    detail::write_file(path.string(), encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(detail::read_file(path.string()));
}

std::string loss_csv(const std::vector<EpochLoss>& history) {
    std::string out = "epoch,lr,train_loss,val_loss\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + ',' + fmt_double(e.lr) + ',' + fmt_double(e.train_loss) + ',' +
               (std::isnan(e.val_loss) ? std::string("nan") : fmt_double(e.val_loss)) + '\n';
    }
    return out;
}

} // namespace riscest::nn
