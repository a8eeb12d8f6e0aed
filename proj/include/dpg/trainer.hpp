// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dpg/manifest.hpp"
#include "dpg/model.hpp"
#include "dpg/skeleton.hpp"
#include "dpg/tensor.hpp"

namespace dpg {

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 0.001;
    int epochs = 30;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double plateau_factor = 0.1;
    int plateau_patience = 3;
    double min_lr = 1e-6;
    int early_stop_patience = 7;
    // Absolute decrease a validation loss must show to count as improvement
    // for the scheduler, early stopping and best-model saving.
    double improvement_threshold = 1e-8;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

enum class TrainStatus { Completed, EarlyStopped, Diverged };
const char* to_string(TrainStatus s);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
    double lr = 0.0;      // rate used during this epoch
    double seconds = 0.0; // wall time; excluded from any determinism contract
};

struct RunLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val = std::numeric_limits<double>::infinity();
    TrainStatus status = TrainStatus::Completed;
};

// Standard Adam with bias correction over a fixed parameter list. Moments are
// kept in the parameter scalar type; state order follows the declared
// parameter order so updates are bitwise reproducible.
template <typename T>
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<TensorPtr<T>> params, double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8)
        : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
        for (auto& p : params) {
            Slot s;
            s.param = p;
            s.m.assign(p->numel(), T(0));
            s.v.assign(p->numel(), T(0));
            slots_.push_back(std::move(s));
        }
    }

    void zero_grad() {
        for (auto& s : slots_) s.param->zero_grad();
    }

    // m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
    // p <- p - lr * m^ / (sqrt(v^) + eps). Throws DivergenceError on a
    // non-finite update.
    void step(double lr) {
        ++t_;
        const T c1 = T(1.0 / (1.0 - std::pow(beta1_, static_cast<double>(t_))));
        const T c2 = T(1.0 / (1.0 - std::pow(beta2_, static_cast<double>(t_))));
        for (auto& s : slots_) {
            s.param->ensure_grad();
            for (std::size_t i = 0; i < s.m.size(); ++i) {
                const T g = s.param->grad[i];
                s.m[i] = T(beta1_) * s.m[i] + T(1.0 - beta1_) * g;
                s.v[i] = T(beta2_) * s.v[i] + T(1.0 - beta2_) * g * g;
                const T update = T(lr) * (s.m[i] * c1) / (std::sqrt(s.v[i] * c2) + T(epsilon_));
                if (!std::isfinite(static_cast<double>(update)))
                    throw DivergenceError("non-finite Adam update at step " + std::to_string(t_));
                s.param->values[i] -= update;
            }
        }
    }

    long timestep() const { return t_; }

private:
    struct Slot {
        TensorPtr<T> param;
        std::vector<T> m, v;
    };
    std::vector<Slot> slots_;
    double beta1_, beta2_, epsilon_;
    long t_ = 0;
};

// Reduce-on-plateau: when the monitored loss fails to improve (decrease by at
// least `threshold`) for `patience` consecutive observations, the rate is
// multiplied by `factor`, floored at `min_lr`, and the counter resets.
class PlateauScheduler {
public:
    PlateauScheduler(double initial_lr, double factor, int patience, double min_lr,
                     double threshold = 1e-8)
        : lr_(initial_lr), factor_(factor), min_lr_(min_lr), threshold_(threshold),
          patience_(patience) {}

    double observe(double val_loss) {
        if (val_loss <= best_ - threshold_) {
            best_ = val_loss;
            bad_epochs_ = 0;
        } else if (++bad_epochs_ >= patience_) {
            lr_ = std::max(lr_ * factor_, min_lr_);
            bad_epochs_ = 0;
        }
        return lr_;
    }

    double lr() const { return lr_; }

private:
    double lr_, factor_, min_lr_, threshold_;
    int patience_;
    int bad_epochs_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

// Stop-signal counterpart of the scheduler, sharing the improvement rule.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience, double threshold = 1e-8)
        : patience_(patience), threshold_(threshold) {}

    bool observe(double val_loss) {
        if (val_loss <= best_ - threshold_) {
            best_ = val_loss;
            bad_epochs_ = 0;
            return false;
        }
        return ++bad_epochs_ >= patience_;
    }

private:
    int patience_;
    double threshold_;
    int bad_epochs_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

// Test/analysis hook: called once per optimizer step with the batch size and
// its pre-step MSE.
using BatchObserver = std::function<void(int epoch, int batch_index, int batch_size, double mse)>;

struct TrainResult {
    RunLog log;
    TrainStatus status = TrainStatus::Completed;
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
};

// Full training run for one (target, side) combination. Loads every labeled
// train/val clip from the manifest, encodes pattern pairs up front, then
// iterates seeded-shuffle mini-batches (final short batch kept) with
// forward/MSE/backward/Adam, epoch-level validation, plateau scheduling,
// early stopping and best-checkpoint saving. The run directory receives
// config.json, log.csv, best.dpgc and last.dpgc.
//
// The whole run is a pure function of (data, configs, seed); a diverged run
// returns status Diverged with the log preserved rather than throwing.
TrainResult train(const DatasetManifest& manifest, TargetKind target, Side side,
                  const TrainConfig& train_config, DpgConfig model_config,
                  const std::filesystem::path& run_dir,
                  const BatchObserver& observer = nullptr);

// Eval-mode prediction for one clip. The requested side must match the
// model's side (UsageError otherwise).
double predict(const DpgModel& model, const KeypointClip& clip, Side side);

void write_run_log(const RunLog& log, const std::filesystem::path& file);

}  // namespace dpg
