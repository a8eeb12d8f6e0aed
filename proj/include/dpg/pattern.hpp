// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "dpg/skeleton.hpp"
#include "dpg/types.hpp"

namespace dpg {

// 128x128 grayscale pattern image. The three output channels are replicated
// copies of the single stored plane, so only one plane is kept; consumers
// expand it on use.
struct PatternImage {
    static constexpr int kSide = 128;
    static constexpr int kChannels = 3;

    std::array<std::uint8_t, kSide * kSide> pixels{};
    // Set when a joint required by the encoder was dead ((0,0) for the whole
    // clip); the image is still produced.
    bool degenerate = false;

    std::uint8_t at(int row, int col) const { return pixels[row * kSide + col]; }
    std::uint8_t& at(int row, int col) { return pixels[row * kSide + col]; }
};

// The two encoded inputs of one (clip, side) sample.
struct PatternPair {
    PatternImage coord_pattern;
    PatternImage trajectory;
    std::string video_id;
    int start_frame = 0;
    Side side = Side::L;
};

// Encodes the 124x58 per-frame feature matrix as a grayscale pattern:
// global min-max scaled to 0..255 (round half away from zero; a constant
// matrix maps to all zeros), centered in a 128x64 canvas (rows 2..125,
// columns 3..60), then duplicated side by side into 128x128.
PatternImage encode_coord_pattern(const KeypointClip& clip);

// Plots the selected side's hip/knee/ankle positions over all 124 frames on
// one 128x128 canvas. The joint bounding box is mapped into the interior
// with a 4-pixel margin, aspect ratio preserved (larger extent rules, the
// shorter axis is centered; a zero-extent axis maps to the canvas center).
// Image y grows downward like the source coordinates. Points render as
// single pixels, hip=85, knee=170, ankle=255, later joints overwriting
// earlier ones.
PatternImage encode_trajectory(const KeypointClip& clip, Side side);

// Both encodings plus provenance metadata.
PatternPair encode_pair(const KeypointClip& clip, Side side);

// 8-bit grayscale PNG I/O; the round trip reproduces pixels exactly.
void write_png(const PatternImage& image, const std::filesystem::path& path);
PatternImage read_png(const std::filesystem::path& path);

// Raw cache format: 128x128 bytes, row-major, single channel.
void write_raw(const PatternImage& image, const std::filesystem::path& path);

// File naming convention for encoded images:
// <video_id>_<start_frame>_<side>_{coord|traj}.<ext>
std::string pattern_file_name(const std::string& video_id, int start_frame,
                              Side side, bool trajectory,
                              const std::string& ext = "png");

}  // namespace dpg
