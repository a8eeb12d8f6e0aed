// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#include "dpg/grad_check.hpp"

#include <algorithm>

namespace dpg {

namespace {

// One full evaluation: fresh tape, graph, fixed projection to a scalar.
double evaluate(const GraphFn& graph, const std::vector<TensorPtr<double>>& inputs,
                const TensorPtr<double>& coeffs, Tape<double>* tape_out,
                TensorPtr<double>* loss_out) {
    Tape<double> tape;
    auto out = graph(tape, inputs);
    TensorPtr<double> loss =
        out->numel() == 1 ? out : weighted_sum<double>(&tape, out, coeffs);
    if (tape_out) {
        *tape_out = std::move(tape);
        *loss_out = loss;
    }
    return loss->values[0];
}

}  // namespace

TensorPtr<double> random_tensor(Rng& rng, std::vector<int> shape, double lo, double hi) {
    auto t = make_tensor<double>(std::move(shape));
    for (auto& v : t->values) v = rng.uniform(lo, hi);
    return t;
}

GradCheckReport grad_check(const std::string& op_name, const GraphFn& graph,
                           const InputGenFn& make_inputs, Rng& rng, double epsilon,
                           double tolerance, int max_retries) {
    GradCheckReport report;
    report.op_name = op_name;
    report.tolerance = tolerance;

    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        auto inputs = make_inputs(rng);

        // Probe output size once to fix the projection coefficients for this
        // attempt; they must stay constant across all finite-difference runs.
        std::size_t out_size;
        {
            Tape<double> probe;
            out_size = graph(probe, inputs)->numel();
        }
        auto coeffs = make_tensor<double>({static_cast<int>(out_size)});
        for (auto& c : coeffs->values) c = rng.uniform(-1.0, 1.0);

        Tape<double> tape;
        TensorPtr<double> loss;
        evaluate(graph, inputs, coeffs, &tape, &loss);
        for (auto& in : inputs) in->zero_grad();
        tape.backward(loss);

        double max_rel = 0.0;
        for (auto& in : inputs) {
            for (std::size_t i = 0; i < in->numel(); ++i) {
                const double orig = in->values[i];
                in->values[i] = orig + epsilon;
                const double fp = evaluate(graph, inputs, coeffs, nullptr, nullptr);
                in->values[i] = orig - epsilon;
                const double fm = evaluate(graph, inputs, coeffs, nullptr, nullptr);
                in->values[i] = orig;
                const double numeric = (fp - fm) / (2.0 * epsilon);
                const double analytic = in->grad[i];
                const double rel = std::abs(analytic - numeric) /
                                   std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
                max_rel = std::max(max_rel, rel);
            }
        }

        report.max_rel_error = max_rel;
        report.retries = attempt;
        if (max_rel <= tolerance) {
            report.passed = true;
            return report;
        }
        // A failed probe may have straddled a kink; resample and try again.
    }
    report.passed = false;
    return report;
}

}  // namespace dpg
