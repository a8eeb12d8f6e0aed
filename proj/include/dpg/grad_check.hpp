// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference oracle for every backward pass. Runs in 64-bit
// mode only; the checked graph is rebuilt from scratch for each probe so any
// stochastic op must be driven by an explicit, fixed rng state.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dpg/rng.hpp"
#include "dpg/tensor.hpp"

namespace dpg {

struct GradCheckReport {
    std::string op_name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    int retries = 0;
    bool passed = false;
};

// Fixed linear functional used to reduce a non-scalar operation output to a
// scalar loss; coefficients are constants, so the functional adds no checked
// gradient path of its own.
template <typename T>
TensorPtr<T> weighted_sum(Tape<T>* tape, const TensorPtr<T>& x, const TensorPtr<T>& coeffs) {
    if (x->numel() != coeffs->numel())
        throw ShapeError("weighted_sum: coefficient count must match input size");
    auto out = make_tensor<T>({1});
    T acc = T(0);
    for (std::size_t i = 0; i < x->numel(); ++i) acc += x->values[i] * coeffs->values[i];
    out->values[0] = acc;
    if (tape) {
        tape->record([x, coeffs, out]() {
            x->ensure_grad();
            for (std::size_t i = 0; i < x->numel(); ++i)
                x->grad[i] += out->grad[0] * coeffs->values[i];
        });
    }
    return out;
}

// Builds the operation under test from its inputs; may return any shape.
using GraphFn = std::function<TensorPtr<double>(Tape<double>&, const std::vector<TensorPtr<double>>&)>;
// Draws a fresh input set; called again when a probe lands on a
// non-differentiable point (maxpool tie, relu kink) and the check retries.
using InputGenFn = std::function<std::vector<TensorPtr<double>>(Rng&)>;

// Compares the analytic gradient of every input coordinate against central
// finite differences (f(x+eps) - f(x-eps)) / 2eps. Relative error uses
// |a - n| / max(|a| + |n|, 1e-6). Passes iff the max over all coordinates is
// below tolerance; on failure the inputs are resampled up to max_retries
// times before the check is declared failed.
GradCheckReport grad_check(const std::string& op_name, const GraphFn& graph,
                           const InputGenFn& make_inputs, Rng& rng, double epsilon,
                           double tolerance, int max_retries = 3);

// Convenience input factory: uniform values in [lo, hi).
TensorPtr<double> random_tensor(Rng& rng, std::vector<int> shape, double lo = -1.0,
                                double hi = 1.0);

}  // namespace dpg
