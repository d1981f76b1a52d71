#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pastegen/blending.hpp"

namespace pastegen {

/// One rendered image in the dataset.
struct ImageRecord {
    std::string image_path;     // relative to the dataset root
    std::string blueprint_path; // relative to the dataset root
    std::string blueprint_id;
    std::string blend_mode;
    std::uint64_t scene_seed = 0;
    std::string image_pixel_sha256; // hash of the raw RGB pixel buffer
    PasteStats stats;
};

struct DatasetManifest {
    static constexpr int kFormatVersion = 1;

    nlohmann::json config_echo;
    int backgrounds_total = 0;
    int scenes_requested = 0;
    std::vector<int> failed_scenes;
    std::vector<ImageRecord> records;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);

    std::string serialize() const;
    void write(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

} // namespace pastegen
