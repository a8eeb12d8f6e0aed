// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal dense-tensor engine with reverse-mode autodiff for the fixed
// feed-forward stack used by the DPG model. Tensors are immutable once
// produced by an operation; a Tape records executed operations and replays
// them in exact reverse order on backward(). Reductions accumulate in fixed
// row-major order so results are bitwise reproducible run to run.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dpg/error.hpp"
#include "dpg/rng.hpp"

namespace dpg {

enum class RunMode { Train, Eval };

template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> values;
    std::vector<T> grad;  // allocated lazily; same length as values when present

    std::size_t numel() const { return values.size(); }

    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), T(0));
    }

    void zero_grad() {
        grad.assign(values.size(), T(0));
    }
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape) {
    auto t = std::make_shared<Tensor<T>>();
    std::size_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw ShapeError("tensor extents must be positive");
        n *= static_cast<std::size_t>(e);
    }
    t->shape = std::move(shape);
    t->values.assign(n, T(0));
    return t;
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> values) {
    auto t = make_tensor<T>(std::move(shape));
    if (values.size() != t->numel()) throw ShapeError("value count does not match shape");
    t->values = std::move(values);
    return t;
}

template <typename T>
std::string shape_string(const Tensor<T>& t) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < t.shape.size(); ++i) os << (i ? "x" : "") << t.shape[i];
    os << ']';
    return os.str();
}

// Ordered record of executed operations. backward() seeds d(loss)=1 and runs
// the recorded steps in reverse execution order; a tensor consumed by k
// operations receives the sum of k gradient contributions.
template <typename T>
class Tape {
public:
    void record(std::function<void()> step) { steps_.push_back(std::move(step)); }

    void backward(const TensorPtr<T>& loss) {
        if (loss->numel() != 1) throw ShapeError("backward requires a scalar loss");
        loss->ensure_grad();
        loss->grad[0] = T(1);
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
    }

    void clear() { steps_.clear(); }
    std::size_t size() const { return steps_.size(); }

private:
    std::vector<std::function<void()>> steps_;
};

namespace detail {

template <typename T>
void require_rank(const TensorPtr<T>& t, std::size_t rank, const char* op) {
    if (t->shape.size() != rank)
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " tensor, got " + shape_string(*t));
}

// Gathers the 3x3 zero-padded patch row for output cell (y, x):
// row[c*9 + dy*3 + dx] = in(y+dy-1, x+dx-1, c). Matches the row-major layout
// of a [Cout x Cin x 3 x 3] weight, so convolution is a plain dot product.
template <typename T>
void gather_patch_row(const std::vector<T>& in, int h, int w, int cin, int y, int x,
                      T* row) {
    for (int c = 0; c < cin; ++c) {
        for (int dy = 0; dy < 3; ++dy) {
            int yy = y + dy - 1;
            for (int dx = 0; dx < 3; ++dx) {
                int xx = x + dx - 1;
                T v = T(0);
                if (yy >= 0 && yy < h && xx >= 0 && xx < w)
                    v = in[(static_cast<std::size_t>(yy) * w + xx) * cin + c];
                row[c * 9 + dy * 3 + dx] = v;
            }
        }
    }
}

}  // namespace detail

// 3x3 convolution, stride 1, zero padding 1; spatial size preserved.
// input [H x W x Cin], weight [Cout x Cin x 3 x 3], bias [Cout] -> [H x W x Cout].
// Forward materializes the im2col patch matrix and reduces each output cell
// as one dot product; backward re-gathers patch rows instead of keeping the
// matrix alive.
template <typename T>
TensorPtr<T> conv2d(Tape<T>* tape, const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias) {
    detail::require_rank(input, 3, "conv2d");
    detail::require_rank(weight, 4, "conv2d");
    detail::require_rank(bias, 1, "conv2d");
    const int h = input->shape[0], w = input->shape[1], cin = input->shape[2];
    const int cout = weight->shape[0];
    if (weight->shape[1] != cin)
        throw ShapeError("conv2d: weight expects " + std::to_string(weight->shape[1]) +
                         " input channels, input has " + std::to_string(cin));
    if (weight->shape[2] != 3 || weight->shape[3] != 3)
        throw ShapeError("conv2d: only 3x3 kernels are supported");
    if (bias->shape[0] != cout) throw ShapeError("conv2d: bias length must equal Cout");

    const int k = cin * 9;
    auto out = make_tensor<T>({h, w, cout});

    // im2col: patches is (H*W) x K, row i holds the receptive field of output
    // cell i in weight-row order.
    std::vector<T> patches(static_cast<std::size_t>(h) * w * k);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            detail::gather_patch_row(input->values, h, w, cin, y, x,
                                     patches.data() + (static_cast<std::size_t>(y) * w + x) * k);

    const T* wm = weight->values.data();
    for (std::size_t i = 0, cells = static_cast<std::size_t>(h) * w; i < cells; ++i) {
        const T* pr = patches.data() + i * k;
        T* or_ = out->values.data() + i * cout;
        for (int o = 0; o < cout; ++o) {
            const T* wr = wm + static_cast<std::size_t>(o) * k;
            T acc = bias->values[o];
            for (int j = 0; j < k; ++j) acc += pr[j] * wr[j];
            or_[o] = acc;
        }
    }

    if (tape) {
        tape->record([input, weight, bias, out, h, w, cin, cout, k]() {
            input->ensure_grad();
            weight->ensure_grad();
            bias->ensure_grad();
            std::vector<T> pr(k), dpr(k);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const std::size_t cell = static_cast<std::size_t>(y) * w + x;
                    const T* g = out->grad.data() + cell * cout;
                    detail::gather_patch_row(input->values, h, w, cin, y, x, pr.data());
                    std::fill(dpr.begin(), dpr.end(), T(0));
                    for (int o = 0; o < cout; ++o) {
                        const T go = g[o];
                        bias->grad[o] += go;
                        const T* wr = weight->values.data() + static_cast<std::size_t>(o) * k;
                        T* dwr = weight->grad.data() + static_cast<std::size_t>(o) * k;
                        for (int j = 0; j < k; ++j) {
                            dwr[j] += go * pr[j];
                            dpr[j] += go * wr[j];
                        }
                    }
                    // scatter the patch-row gradient back into the input
                    for (int c = 0; c < cin; ++c)
                        for (int dy = 0; dy < 3; ++dy) {
                            int yy = y + dy - 1;
                            if (yy < 0 || yy >= h) continue;
                            for (int dx = 0; dx < 3; ++dx) {
                                int xx = x + dx - 1;
                                if (xx < 0 || xx >= w) continue;
                                input->grad[(static_cast<std::size_t>(yy) * w + xx) * cin + c] +=
                                    dpr[c * 9 + dy * 3 + dx];
                            }
                        }
                }
            }
        });
    }
    return out;
}

// Direct-loop convolution kept as an independent cross-check for the im2col
// path. Forward only.
template <typename T>
TensorPtr<T> conv2d_reference(const TensorPtr<T>& input, const TensorPtr<T>& weight,
                              const TensorPtr<T>& bias) {
    const int h = input->shape[0], w = input->shape[1], cin = input->shape[2];
    const int cout = weight->shape[0];
    auto out = make_tensor<T>({h, w, cout});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int o = 0; o < cout; ++o) {
                T acc = bias->values[o];
                for (int c = 0; c < cin; ++c)
                    for (int dy = 0; dy < 3; ++dy)
                        for (int dx = 0; dx < 3; ++dx) {
                            int yy = y + dy - 1, xx = x + dx - 1;
                            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                            acc += input->values[(static_cast<std::size_t>(yy) * w + xx) * cin + c] *
                                   weight->values[((static_cast<std::size_t>(o) * cin + c) * 3 + dy) * 3 + dx];
                        }
                out->values[(static_cast<std::size_t>(y) * w + x) * cout + o] = acc;
            }
    return out;
}

// 2x2 max pooling, stride 2. Requires even spatial extents. The gradient is
// routed to the argmax cell only; ties go to the first cell in row-major
// window order.
template <typename T>
TensorPtr<T> maxpool2d(Tape<T>* tape, const TensorPtr<T>& input) {
    detail::require_rank(input, 3, "maxpool2d");
    const int h = input->shape[0], w = input->shape[1], c = input->shape[2];
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("maxpool2d: spatial extents must be even, got " + shape_string(*input));
    const int oh = h / 2, ow = w / 2;
    auto out = make_tensor<T>({oh, ow, c});
    auto argmax = std::make_shared<std::vector<std::uint32_t>>(out->numel());

    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch) {
                T best = -std::numeric_limits<T>::infinity();
                std::uint32_t best_idx = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        std::size_t idx =
                            (static_cast<std::size_t>(2 * y + dy) * w + (2 * x + dx)) * c + ch;
                        if (input->values[idx] > best) {
                            best = input->values[idx];
                            best_idx = static_cast<std::uint32_t>(idx);
                        }
                    }
                std::size_t oidx = (static_cast<std::size_t>(y) * ow + x) * c + ch;
                out->values[oidx] = best;
                (*argmax)[oidx] = best_idx;
            }

    if (tape) {
        tape->record([input, out, argmax]() {
            input->ensure_grad();
            for (std::size_t i = 0; i < out->numel(); ++i)
                input->grad[(*argmax)[i]] += out->grad[i];
        });
    }
    return out;
}

// Elementwise max(0, v); subgradient 0 at v = 0.
template <typename T>
TensorPtr<T> relu(Tape<T>* tape, const TensorPtr<T>& input) {
    auto out = make_tensor<T>(input->shape);
    for (std::size_t i = 0; i < input->numel(); ++i)
        out->values[i] = input->values[i] > T(0) ? input->values[i] : T(0);
    if (tape) {
        tape->record([input, out]() {
            input->ensure_grad();
            for (std::size_t i = 0; i < input->numel(); ++i)
                if (input->values[i] > T(0)) input->grad[i] += out->grad[i];
        });
    }
    return out;
}

// Affine map W.x + b with x [n], W [m x n], b [m] -> [m].
template <typename T>
TensorPtr<T> linear(Tape<T>* tape, const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias) {
    detail::require_rank(input, 1, "linear");
    detail::require_rank(weight, 2, "linear");
    detail::require_rank(bias, 1, "linear");
    const int m = weight->shape[0], n = weight->shape[1];
    if (input->shape[0] != n)
        throw ShapeError("linear: weight expects input of length " + std::to_string(n) +
                         ", got " + std::to_string(input->shape[0]));
    if (bias->shape[0] != m) throw ShapeError("linear: bias length must equal output size");

    auto out = make_tensor<T>({m});
    for (int i = 0; i < m; ++i) {
        const T* wr = weight->values.data() + static_cast<std::size_t>(i) * n;
        T acc = bias->values[i];
        for (int j = 0; j < n; ++j) acc += wr[j] * input->values[j];
        out->values[i] = acc;
    }

    if (tape) {
        tape->record([input, weight, bias, out, m, n]() {
            input->ensure_grad();
            weight->ensure_grad();
            bias->ensure_grad();
            for (int i = 0; i < m; ++i) {
                const T g = out->grad[i];
                bias->grad[i] += g;
                const T* wr = weight->values.data() + static_cast<std::size_t>(i) * n;
                T* dwr = weight->grad.data() + static_cast<std::size_t>(i) * n;
                for (int j = 0; j < n; ++j) {
                    dwr[j] += g * input->values[j];
                    input->grad[j] += g * wr[j];
                }
            }
        });
    }
    return out;
}

// Inverted dropout: in train mode each element is zeroed with probability p
// and survivors are scaled by 1/(1-p); eval mode is the identity. The mask is
// a pure function of rng_state and the element count, so replaying the same
// state reproduces the same output.
template <typename T>
TensorPtr<T> dropout(Tape<T>* tape, const TensorPtr<T>& input, double p, RunMode mode,
                     std::uint64_t rng_state) {
    if (p < 0.0 || p >= 1.0)
        throw UsageError("dropout: probability must be in [0, 1), got " + std::to_string(p));
    if (mode == RunMode::Eval || p == 0.0) return input;

    auto mask = std::make_shared<std::vector<std::uint8_t>>(input->numel());
    Rng rng(rng_state);
    for (auto& keep : *mask) keep = rng.uniform() >= p ? 1 : 0;

    const T scale = T(1.0 / (1.0 - p));
    auto out = make_tensor<T>(input->shape);
    for (std::size_t i = 0; i < input->numel(); ++i)
        out->values[i] = (*mask)[i] ? input->values[i] * scale : T(0);

    if (tape) {
        tape->record([input, out, mask, scale]() {
            input->ensure_grad();
            for (std::size_t i = 0; i < input->numel(); ++i)
                if ((*mask)[i]) input->grad[i] += out->grad[i] * scale;
        });
    }
    return out;
}

// Row-major linearization (H outermost, then W, then C).
template <typename T>
TensorPtr<T> flatten(Tape<T>* tape, const TensorPtr<T>& input) {
    auto out = make_tensor<T>({static_cast<int>(input->numel())}, input->values);
    if (tape) {
        tape->record([input, out]() {
            input->ensure_grad();
            for (std::size_t i = 0; i < input->numel(); ++i) input->grad[i] += out->grad[i];
        });
    }
    return out;
}

// Concatenation of two rank-1 tensors; backward splits the gradient at the
// boundary.
template <typename T>
TensorPtr<T> concat(Tape<T>* tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
    detail::require_rank(a, 1, "concat");
    detail::require_rank(b, 1, "concat");
    const int n = a->shape[0], m = b->shape[0];
    auto out = make_tensor<T>({n + m});
    std::copy(a->values.begin(), a->values.end(), out->values.begin());
    std::copy(b->values.begin(), b->values.end(), out->values.begin() + n);
    if (tape) {
        tape->record([a, b, out, n, m]() {
            a->ensure_grad();
            b->ensure_grad();
            for (int i = 0; i < n; ++i) a->grad[i] += out->grad[i];
            for (int i = 0; i < m; ++i) b->grad[i] += out->grad[n + i];
        });
    }
    return out;
}

// Mean squared error over a batch of predictions. The target is treated as a
// constant: only the prediction receives gradient, dL/dpred_i = 2(p_i-t_i)/n.
template <typename T>
TensorPtr<T> mse_loss(Tape<T>* tape, const TensorPtr<T>& pred, const TensorPtr<T>& target) {
    detail::require_rank(pred, 1, "mse_loss");
    detail::require_rank(target, 1, "mse_loss");
    if (pred->shape[0] != target->shape[0] || pred->shape[0] < 1)
        throw ShapeError("mse_loss: prediction/target lengths differ (" +
                         std::to_string(pred->shape[0]) + " vs " +
                         std::to_string(target->shape[0]) + ")");
    const int n = pred->shape[0];
    auto out = make_tensor<T>({1});
    T acc = T(0);
    for (int i = 0; i < n; ++i) {
        const T d = pred->values[i] - target->values[i];
        acc += d * d;
    }
    out->values[0] = acc / T(n);
    if (tape) {
        tape->record([pred, target, out, n]() {
            pred->ensure_grad();
            const T g = out->grad[0];
            for (int i = 0; i < n; ++i)
                pred->grad[i] += g * T(2) * (pred->values[i] - target->values[i]) / T(n);
        });
    }
    return out;
}

}  // namespace dpg
