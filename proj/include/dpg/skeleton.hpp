// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dpg/types.hpp"

namespace dpg {

struct Landmark {
    double x = 0.0;
    double y = 0.0;
};

// One frame of 2D pose output: 25 landmarks with confidences plus 8 opaque
// per-frame auxiliary scalars. Coordinates are finite after ingestion;
// non-finite values coming from a pose estimator are zeroed with confidence 0.
struct SkeletonFrame {
    std::array<Landmark, kNumLandmarks> landmarks{};
    std::array<double, kNumLandmarks> confidences{};
    std::array<double, kNumSideParams> side_params{};

    // Row layout x0,y0,...,x24,y24,s0,...,s7 shared by the clip CSV format
    // and the coordinate-pattern encoder.
    std::array<double, kClipColumns> feature_row() const;
};

// A fixed 124-frame window of one video.
struct KeypointClip {
    std::vector<SkeletonFrame> frames;  // exactly kClipFrames
    std::string video_id;
    std::string patient_id;
    int start_frame = 0;
    Side side = Side::L;
    // Landmark indices that were never observed above the confidence floor;
    // filled by impute_missing, which pins them at (0,0).
    std::vector<int> dead_landmarks;

    bool flagged() const { return !dead_landmarks.empty(); }
};

// Reads one pose-estimator JSON file per frame from `directory`, ordered by
// filename sort. Each file must carry a flat array of 75 numbers
// (25 x (x, y, confidence)), either top-level, under "pose_keypoints_2d", or
// under "people"[0]."pose_keypoints_2d". A file with an empty "people" list
// yields an all-zero frame with zero confidences. side_params are set to
// `side_params` (all zero by default).
//
// Throws DataError naming the file on malformed JSON and SchemaError when the
// landmark count is not 25. An empty directory returns an empty sequence and
// logs a warning.
std::vector<SkeletonFrame> ingest_pose_json(
    const std::filesystem::path& directory, const std::string& video_id,
    const std::array<double, kNumSideParams>& side_params = {});

// Reads the canonical clip CSV: header exactly x0,y0,...,x24,y24,s0,...,s7,
// then 124 data rows. Confidences are set to 1 (curated data carries none).
// video_id and patient_id default to the file stem; start_frame to 0.
//
// Errors: row count != 124 -> ClipLengthError; column count != 58 or wrong
// header -> SchemaError; non-numeric cell -> ParseError with row/column.
KeypointClip ingest_clip_csv(const std::filesystem::path& file);

// Inverse serializer of ingest_clip_csv. Values are printed with enough
// digits that the round trip is exact.
void write_clip_csv(const KeypointClip& clip, const std::filesystem::path& file);

// Slices a frame sequence into 124-frame clips at starts 0, 93, 186, ...
// (stride 93 = 124 - 31-frame overlap); a final partial window is dropped.
// Fewer than 124 frames yields an empty sequence and a warning.
std::vector<KeypointClip> slice_windows(const std::vector<SkeletonFrame>& frames,
                                        const std::string& video_id,
                                        const std::string& patient_id);

// Number of windows slice_windows emits for a frame count.
inline int window_count(int frame_count) {
    if (frame_count < kClipFrames) return 0;
    return (frame_count - kClipFrames) / kWindowStride + 1;
}

// Replaces every landmark observation with confidence < confidence_floor by
// linear interpolation between the nearest valid observations of the same
// landmark; leading/trailing gaps take the nearest valid value. A landmark
// with no valid observation at all is pinned at (0,0) and recorded in
// dead_landmarks. Idempotent; total on any clip.
KeypointClip impute_missing(const KeypointClip& clip, double confidence_floor);

}  // namespace dpg
