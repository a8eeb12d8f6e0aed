// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpg/types.hpp"

namespace dpg {

enum class SplitPart { None, Train, Val, Test };

const char* to_string(SplitPart p);
SplitPart split_from_string(std::string_view s);

// One labeled clip in the dataset manifest.
struct ManifestEntry {
    std::string clip_path;  // relative paths resolve against the manifest dir
    std::string video_id;
    std::string patient_id;
    SplitPart split = SplitPart::None;
    // Up to 8 labels: (target, side) -> value. Absent = unlabeled.
    std::map<std::pair<TargetKind, Side>, double> labels;

    std::optional<double> label(TargetKind t, Side s) const {
        auto it = labels.find({t, s});
        if (it == labels.end()) return std::nullopt;
        return it->second;
    }
};

// The labeled sample collection with patient grouping and split assignment.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;  // directory the manifest was loaded from

    std::filesystem::path resolve(const std::string& clip_path) const;
    std::vector<std::string> distinct_patients() const;  // sorted, unique
};

// Manifest CSV, columns:
//   clip_path,video_id,patient_id,split,
//   GDI_L,GDI_R,KneeFlex_L,KneeFlex_R,Cadence_L,Cadence_R,StepLen_L,StepLen_R
// Empty label cell = unavailable; empty split cell = unassigned.
DatasetManifest read_manifest(const std::filesystem::path& file);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);

// Deterministically partitions patients (and with them all their clips) into
// train/val/test so patient counts approximate ratios via largest-remainder
// rounding; remainder ties are ordered by seeded draws, and every partition
// receives at least one patient. Pure function of (patient id set, seed).
//
// Throws UsageError with fewer than 3 distinct patients.
DatasetManifest split_by_patient(const DatasetManifest& manifest,
                                 std::uint64_t seed,
                                 int ratio_train = 8, int ratio_val = 1,
                                 int ratio_test = 1);

}  // namespace dpg
