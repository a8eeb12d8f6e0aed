// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
//
// The dual-branch convolutional regressor: two 128x128x3 pattern images pass
// independently through three conv/ReLU/maxpool blocks, are flattened and
// concatenated, then reduced by four FC+ReLU+dropout layers to one scalar.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpg/pattern.hpp"
#include "dpg/rng.hpp"
#include "dpg/tensor.hpp"
#include "dpg/types.hpp"

namespace dpg {

struct DpgConfig {
    std::array<int, 3> conv_channels{32, 64, 128};
    std::array<int, 4> fc_widths{512, 256, 128, 64};
    int input_side = 128;
    int input_channels = 3;
    double dropout_p = 0.5;
    // The two branches keep separate conv parameters by default; sharing is
    // an ablation flag recorded in checkpoints.
    bool shared_branches = false;
    TargetKind target = TargetKind::GDI;
    Side side = Side::L;
    std::uint64_t seed = 0;

    int pooled_side() const { return input_side / 8; }  // three 2x2 pools
    int branch_flat_size() const { return pooled_side() * pooled_side() * conv_channels[2]; }
    int concat_size() const { return 2 * branch_flat_size(); }

    void validate() const;
    nlohmann::json to_json() const;
    static DpgConfig from_json(const nlohmann::json& j);
};

template <typename T>
struct DpgModelT {
    struct Branch {
        std::array<TensorPtr<T>, 3> conv_w;
        std::array<TensorPtr<T>, 3> conv_b;
    };

    DpgConfig config;
    std::array<Branch, 2> branches;  // branches[1] aliases branches[0] when shared
    std::array<TensorPtr<T>, 4> fc_w;
    std::array<TensorPtr<T>, 4> fc_b;
    TensorPtr<T> out_w;
    TensorPtr<T> out_b;

    // Unique parameters in declared order: branch1 conv1..3 {w,b}, branch2
    // conv1..3 {w,b} (separate branches only), fc1..4 {w,b}, out {w,b}.
    // This order fixes checkpoint block layout and optimizer state.
    std::vector<std::pair<std::string, TensorPtr<T>>> named_parameters() const {
        std::vector<std::pair<std::string, TensorPtr<T>>> out;
        const int nb = config.shared_branches ? 1 : 2;
        for (int b = 0; b < nb; ++b) {
            const std::string prefix = "branch" + std::to_string(b + 1) + ".conv";
            for (int l = 0; l < 3; ++l) {
                out.emplace_back(prefix + std::to_string(l + 1) + ".weight", branches[b].conv_w[l]);
                out.emplace_back(prefix + std::to_string(l + 1) + ".bias", branches[b].conv_b[l]);
            }
        }
        for (int l = 0; l < 4; ++l) {
            out.emplace_back("fc" + std::to_string(l + 1) + ".weight", fc_w[l]);
            out.emplace_back("fc" + std::to_string(l + 1) + ".bias", fc_b[l]);
        }
        out.emplace_back("out.weight", out_w);
        out.emplace_back("out.bias", out_b);
        return out;
    }

    std::vector<TensorPtr<T>> parameters() const {
        std::vector<TensorPtr<T>> out;
        for (auto& [name, p] : named_parameters()) out.push_back(p);
        return out;
    }
};

using DpgModel = DpgModelT<float>;

// Total unique parameter count implied by a config.
std::size_t parameter_count(const DpgConfig& config);

// Per-stage shape record of one forward pass.
struct ShapeStage {
    std::string name;
    std::vector<int> shape;
};
using ShapeTrace = std::vector<ShapeStage>;

namespace detail {
template <typename T>
TensorPtr<T> glorot_tensor(Rng& rng, std::vector<int> shape, int fan_in, int fan_out) {
    auto t = make_tensor<T>(std::move(shape));
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t->values) v = static_cast<T>(rng.uniform(-a, a));
    return t;
}
}  // namespace detail

// Glorot-uniform initialization, Uniform(-a, a) with a = sqrt(6/(fan_in +
// fan_out)); conv layers count fans over the 3x3 receptive field. Biases are
// zero. Weight draws come from the seeded PRNG in declared parameter order,
// so one seed pins every parameter bitwise.
template <typename T>
DpgModelT<T> init_model(const DpgConfig& config) {
    config.validate();
    DpgModelT<T> model;
    model.config = config;
    Rng rng(config.seed);

    const int nb = config.shared_branches ? 1 : 2;
    for (int b = 0; b < nb; ++b) {
        int cin = config.input_channels;
        for (int l = 0; l < 3; ++l) {
            const int cout = config.conv_channels[l];
            model.branches[b].conv_w[l] =
                detail::glorot_tensor<T>(rng, {cout, cin, 3, 3}, cin * 9, cout * 9);
            model.branches[b].conv_b[l] = make_tensor<T>({cout});
            cin = cout;
        }
    }
    if (config.shared_branches) model.branches[1] = model.branches[0];

    int in = config.concat_size();
    for (int l = 0; l < 4; ++l) {
        const int width = config.fc_widths[l];
        model.fc_w[l] = detail::glorot_tensor<T>(rng, {width, in}, in, width);
        model.fc_b[l] = make_tensor<T>({width});
        in = width;
    }
    model.out_w = detail::glorot_tensor<T>(rng, {1, in}, in, 1);
    model.out_b = make_tensor<T>({1});
    return model;
}

// One branch: F <- MaxPool(ReLU(Conv(F))) three times, then flatten.
template <typename T>
TensorPtr<T> run_branch(const DpgModelT<T>& model, int branch, Tape<T>* tape,
                        const TensorPtr<T>& input, ShapeTrace* trace) {
    const auto& br = model.branches[branch];
    const std::string prefix = "branch" + std::to_string(branch + 1) + ".";
    if (trace) trace->push_back({prefix + "input", input->shape});
    TensorPtr<T> f = input;
    for (int l = 0; l < 3; ++l) {
        f = conv2d(tape, f, br.conv_w[l], br.conv_b[l]);
        if (trace) trace->push_back({prefix + "conv" + std::to_string(l + 1), f->shape});
        f = relu(tape, f);
        f = maxpool2d(tape, f);
        if (trace) trace->push_back({prefix + "pool" + std::to_string(l + 1), f->shape});
    }
    f = flatten(tape, f);
    if (trace) trace->push_back({prefix + "flatten", f->shape});
    return f;
}

// Forward pass of one sample. Inputs are [side x side x 3] tensors already
// scaled to [0,1]. rng_state drives the dropout masks; pass a per-sample
// state during training. Returns a [1] tensor.
template <typename T>
TensorPtr<T> forward_sample(const DpgModelT<T>& model, Tape<T>* tape,
                            const TensorPtr<T>& coord_input, const TensorPtr<T>& traj_input,
                            RunMode mode, std::uint64_t rng_state,
                            ShapeTrace* trace = nullptr) {
    const auto check = [&](const TensorPtr<T>& t, const char* which) {
        if (t->shape.size() != 3 || t->shape[0] != model.config.input_side ||
            t->shape[1] != model.config.input_side ||
            t->shape[2] != model.config.input_channels)
            throw ShapeError(std::string("forward: ") + which + " input has shape " +
                             shape_string(*t) + ", expected [" +
                             std::to_string(model.config.input_side) + "x" +
                             std::to_string(model.config.input_side) + "x" +
                             std::to_string(model.config.input_channels) + "]");
    };
    check(coord_input, "coord-pattern");
    check(traj_input, "trajectory");

    auto flat1 = run_branch(model, 0, tape, coord_input, trace);
    auto flat2 = run_branch(model, 1, tape, traj_input, trace);
    TensorPtr<T> h = concat(tape, flat1, flat2);
    if (trace) trace->push_back({"concat", h->shape});
    for (int l = 0; l < 4; ++l) {
        h = linear(tape, h, model.fc_w[l], model.fc_b[l]);
        h = relu(tape, h);
        h = dropout(tape, h, model.config.dropout_p, mode, mix_seed(rng_state, l));
        if (trace) trace->push_back({"fc" + std::to_string(l + 1), h->shape});
    }
    auto y = linear(tape, h, model.out_w, model.out_b);
    if (trace) trace->push_back({"output", y->shape});
    return y;
}

// Batch forward: per-sample scalars folded into one [batch] tensor. Dropout
// states are derived per sample from rng_state.
template <typename T>
TensorPtr<T> forward_batch(const DpgModelT<T>& model, Tape<T>* tape,
                           const std::vector<std::pair<TensorPtr<T>, TensorPtr<T>>>& inputs,
                           RunMode mode, std::uint64_t rng_state) {
    if (inputs.empty()) throw UsageError("forward: empty batch");
    TensorPtr<T> preds;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto p = forward_sample(model, tape, inputs[i].first, inputs[i].second, mode,
                                mix_seed(rng_state, 0x10000 + i));
        preds = i == 0 ? p : concat(tape, preds, p);
    }
    return preds;
}

// Expands a pattern image to a [side x side x 3] input tensor; intensities
// are scaled into [0,1] before the first conv.
template <typename T>
TensorPtr<T> input_from_image(const PatternImage& image) {
    auto t = make_tensor<T>({PatternImage::kSide, PatternImage::kSide, 3});
    for (int i = 0; i < PatternImage::kSide * PatternImage::kSide; ++i) {
        const T v = static_cast<T>(image.pixels[i]) / T(255);
        t->values[3 * i + 0] = v;
        t->values[3 * i + 1] = v;
        t->values[3 * i + 2] = v;
    }
    return t;
}

template <typename T>
std::pair<TensorPtr<T>, TensorPtr<T>> inputs_from_pair(const PatternPair& pair) {
    return {input_from_image<T>(pair.coord_pattern), input_from_image<T>(pair.trajectory)};
}

// Runs reverse-mode accumulation for the batch and asserts every parameter
// gradient is finite. Throws DivergenceError naming the first offending
// parameter tensor.
template <typename T>
void model_backward(const DpgModelT<T>& model, Tape<T>& tape, const TensorPtr<T>& loss) {
    tape.backward(loss);
    for (auto& [name, p] : model.named_parameters()) {
        if (p->grad.empty()) continue;
        for (const T g : p->grad)
            if (!std::isfinite(static_cast<double>(g)))
                throw DivergenceError("non-finite gradient in " + name);
    }
}

// Checkpoint format (.dpgc): magic "DPGC", u32 LE format version, u64 LE
// header length, JSON header (config, target, side, seed, training metadata,
// parameter block directory), then each block's values as little-endian f32
// in directory order. Loading reproduces parameters bitwise.
//
// Error classes: bad magic or unknown version -> FormatError; unreadable
// header (length past EOF, invalid JSON) -> CorruptionError; payload that
// disagrees with the directory (missing/extra bytes, block mismatch with the
// config) -> IntegrityError.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr const char kCheckpointMagic[4] = {'D', 'P', 'G', 'C'};

void save_checkpoint(const DpgModel& model, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedCheckpoint {
    DpgModel model;
    nlohmann::json metadata;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dpg
