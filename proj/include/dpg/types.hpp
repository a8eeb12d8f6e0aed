// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "dpg/error.hpp"

namespace dpg {

// Body side a gait parameter refers to.
enum class Side { L, R };

// Gait parameter a model is trained to predict.
enum class TargetKind { GDI, KneeFlexMaxExtension, Cadence, StepLen };

inline constexpr int kNumLandmarks = 25;
inline constexpr int kNumSideParams = 8;
inline constexpr int kClipFrames = 124;
inline constexpr int kClipColumns = 2 * kNumLandmarks + kNumSideParams;  // 58
inline constexpr int kWindowStride = 93;   // 124 - 31 frame overlap
inline constexpr int kWindowOverlap = 31;

// BODY_25 landmark indices used by the trajectory encoder.
inline constexpr int kRightHip = 9;
inline constexpr int kRightKnee = 10;
inline constexpr int kRightAnkle = 11;
inline constexpr int kLeftHip = 12;
inline constexpr int kLeftKnee = 13;
inline constexpr int kLeftAnkle = 14;

inline const char* to_string(Side s) { return s == Side::L ? "L" : "R"; }

inline Side side_from_string(std::string_view s) {
    if (s == "L" || s == "l") return Side::L;
    if (s == "R" || s == "r") return Side::R;
    throw UsageError("unknown side '" + std::string(s) + "' (expected L or R)");
}

// Canonical short names; these double as manifest column stems.
inline const char* to_string(TargetKind t) {
    switch (t) {
        case TargetKind::GDI: return "GDI";
        case TargetKind::KneeFlexMaxExtension: return "KneeFlex";
        case TargetKind::Cadence: return "Cadence";
        case TargetKind::StepLen: return "StepLen";
    }
    return "?";
}

inline TargetKind target_from_string(std::string_view s) {
    if (s == "GDI" || s == "gdi") return TargetKind::GDI;
    if (s == "KneeFlex" || s == "kneeflex" || s == "KneeFlexMaxExtension")
        return TargetKind::KneeFlexMaxExtension;
    if (s == "Cadence" || s == "cadence") return TargetKind::Cadence;
    if (s == "StepLen" || s == "steplen") return TargetKind::StepLen;
    throw UsageError("unknown target '" + std::string(s) +
                     "' (expected GDI, KneeFlex, Cadence or StepLen)");
}

// A scalar gait label attached to a clip.
struct TargetLabel {
    TargetKind target = TargetKind::GDI;
    Side side = Side::L;
    double value = 0.0;
};

}  // namespace dpg
