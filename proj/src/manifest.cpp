#include "pastegen/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pastegen/errors.hpp"

namespace pastegen {

using json = nlohmann::json;

json DatasetManifest::to_json() const {
    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = config_echo;
    j["backgrounds_total"] = backgrounds_total;
    j["scenes_requested"] = scenes_requested;
    j["failed_scenes"] = failed_scenes;
    json recs = json::array();
    for (const auto& r : records) {
        recs.push_back({{"image", r.image_path},
                        {"blueprint", r.blueprint_path},
                        {"blueprint_id", r.blueprint_id},
                        {"blend_mode", r.blend_mode},
                        {"scene_seed", r.scene_seed},
                        {"image_pixel_sha256", r.image_pixel_sha256},
                        {"poisson",
                         {{"solves", r.stats.solves},
                          {"iterations", r.stats.iterations},
                          {"max_residual", r.stats.max_residual},
                          {"unconverged", r.stats.unconverged}}}});
    }
    j["records"] = std::move(recs);
    return j;
}

DatasetManifest DatasetManifest::from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw CorruptDataset("unsupported manifest format version");
        DatasetManifest m;
        m.config_echo = j.at("config");
        m.backgrounds_total = j.at("backgrounds_total").get<int>();
        m.scenes_requested = j.at("scenes_requested").get<int>();
        m.failed_scenes = j.at("failed_scenes").get<std::vector<int>>();
        for (const auto& r : j.at("records")) {
            ImageRecord rec;
            rec.image_path = r.at("image").get<std::string>();
            rec.blueprint_path = r.at("blueprint").get<std::string>();
            rec.blueprint_id = r.at("blueprint_id").get<std::string>();
            rec.blend_mode = r.at("blend_mode").get<std::string>();
            rec.scene_seed = r.at("scene_seed").get<std::uint64_t>();
            rec.image_pixel_sha256 = r.at("image_pixel_sha256").get<std::string>();
            const auto& p = r.at("poisson");
            rec.stats.solves = p.at("solves").get<int>();
            rec.stats.iterations = p.at("iterations").get<long long>();
            rec.stats.max_residual = p.at("max_residual").get<double>();
            rec.stats.unconverged = p.at("unconverged").get<int>();
            m.records.push_back(std::move(rec));
        }
        return m;
    } catch (const json::exception& e) {
        throw CorruptDataset(std::string("manifest structure error: ") + e.what());
    }
}

std::string DatasetManifest::serialize() const { return to_json().dump(2) + "\n"; }

void DatasetManifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write manifest: " + path);
    out << serialize();
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CorruptDataset("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorruptDataset(std::string("manifest parse error: ") + e.what());
    }
    return from_json(j);
}

} // namespace pastegen
