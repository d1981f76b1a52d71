#pragma once

#include <map>
#include <string>
#include <vector>

#include "pastegen/manifest.hpp"
#include "pastegen/placement.hpp"

namespace pastegen {

struct Violation {
    std::string scene_id;
    std::string message;
};

struct VerifyReport {
    int scenes_checked = 0;
    int images_checked = 0;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

/// Re-check a generated dataset from its serialized artifacts: placement
/// constraints recomputed from the blueprints, annotation files compared
/// across blend variants and against the blueprint geometry, image pixels
/// re-hashed against the manifest. Structural problems (missing or
/// unparseable files, record-count mismatches) throw CorruptDataset;
/// semantic violations are collected in the report.
VerifyReport verify_dataset(const std::string& dataset_dir);

struct StatsReport {
    int scenes = 0;
    int images = 0;
    int placements = 0;
    int distractor_placements = 0;
    std::map<std::string, int> background_usage;                    // per scene
    std::map<std::string, int> instance_frequency;                  // targets
    std::map<std::string, int> distractor_frequency;
    std::map<std::string, std::map<std::string, int>> view_coverage;
    std::vector<int> box_scale_histogram;  // sqrt(clipped area): <16,<32,...,<512,>=512
    std::vector<int> occlusion_histogram;  // max pairwise IoU, bins of 0.1
};

StatsReport dataset_stats(const std::string& dataset_dir);

std::string format_stats(const StatsReport& stats);
std::string format_verify(const VerifyReport& report);

} // namespace pastegen
