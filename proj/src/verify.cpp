#include "pastegen/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pastegen/annotations.hpp"
#include "pastegen/config.hpp"
#include "pastegen/digest.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/image_io.hpp"
#include "pastegen/rng.hpp"

namespace fs = std::filesystem;

namespace pastegen {

namespace {

std::string read_text_file_or_throw(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CorruptDataset("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int scene_index_from_id(const std::string& blueprint_id) {
    const auto pos = blueprint_id.find_last_of('_');
    if (pos == std::string::npos)
        throw CorruptDataset("malformed blueprint id: " + blueprint_id);
    return std::stoi(blueprint_id.substr(pos + 1));
}

struct LoadedDataset {
    fs::path root;
    DatasetManifest manifest;
    RunConfig config;
    std::map<std::string, SceneBlueprint> blueprints;                // id -> blueprint
    std::map<std::string, std::vector<const ImageRecord*>> by_scene; // id -> records
};

LoadedDataset load_dataset(const std::string& dataset_dir) {
    LoadedDataset ds;
    ds.root = dataset_dir;
    ds.manifest = DatasetManifest::load((ds.root / "manifest.json").string());
    try {
        ds.config = RunConfig::from_json(ds.manifest.config_echo);
    } catch (const ConfigError& e) {
        throw CorruptDataset(std::string("manifest config echo invalid: ") + e.what());
    }

    const int modes = static_cast<int>(ds.config.blend_modes.size());
    const int rendered = ds.manifest.scenes_requested -
                         static_cast<int>(ds.manifest.failed_scenes.size());
    const long long expected =
        ds.config.same_image_multiblend ? static_cast<long long>(rendered) * modes
                                        : static_cast<long long>(rendered);
    if (static_cast<long long>(ds.manifest.records.size()) != expected)
        throw CorruptDataset("manifest record count " +
                             std::to_string(ds.manifest.records.size()) +
                             " does not match expected " + std::to_string(expected));

    for (const auto& record : ds.manifest.records) {
        ds.by_scene[record.blueprint_id].push_back(&record);
        if (ds.blueprints.count(record.blueprint_id))
            continue;
        const std::string text =
            read_text_file_or_throw(ds.root / record.blueprint_path);
        try {
            ds.blueprints.emplace(record.blueprint_id, parse_blueprint(text));
        } catch (const Error& e) {
            throw CorruptDataset(std::string(e.what()) + " (" + record.blueprint_path + ")");
        }
    }
    return ds;
}

} // namespace

VerifyReport verify_dataset(const std::string& dataset_dir) {
    const LoadedDataset ds = load_dataset(dataset_dir);
    VerifyReport report;

    const double max_iou = ds.config.constraints.effective_max_pair_iou();
    const double min_vis = ds.config.constraints.effective_min_visible_fraction();

    // COCO annotations, when present, indexed by file_name.
    std::map<std::string, std::vector<Annotation>> coco_by_file;
    const fs::path coco_path = ds.root / "annotations" / "coco.json";
    const bool has_coco = ds.config.wants_format("coco");
    if (has_coco) {
        const CocoDataset coco = parse_coco_file(coco_path.string());
        std::map<int, std::string> file_by_id;
        for (const auto& img : coco.images)
            file_by_id[img.id] = img.file_name;
        for (const auto& ann : coco.annotations)
            coco_by_file[file_by_id.at(ann.image_id)].push_back(
                Annotation{coco.category_name(ann.category_id), ann.box});
        if (coco.images.size() != ds.manifest.records.size())
            throw CorruptDataset("coco image count does not match the manifest");
    }

    for (const auto& [id, bp] : ds.blueprints) {
        report.scenes_checked += 1;
        auto violation = [&](const std::string& message) {
            report.violations.push_back(Violation{id, message});
        };

        // Seed re-derivation from the echoed master seed.
        const int index = scene_index_from_id(id);
        if (bp.scene_seed !=
            derive_scene_seed(ds.config.seed, static_cast<std::uint64_t>(index)))
            violation("scene seed does not match derive_scene_seed(master, index)");

        if (bp.placements.empty()) {
            violation("blueprint has no placements");
            continue;
        }
        bool any_target = false;
        for (const auto& p : bp.placements)
            any_target |= !p.is_distractor;
        if (!any_target)
            violation("blueprint has only distractor placements");

        // Constraint soundness, recomputed pairwise from serialized geometry.
        const auto boxes = blueprint_boxes(bp);
        for (std::size_t i = 0; i < bp.placements.size(); ++i) {
            const BoundingBox unclipped = bp.placements[i].box();
            const double vis = visible_fraction(unclipped, bp.canvas_w, bp.canvas_h);
            if (vis < min_vis)
                violation("placement " + std::to_string(i) + " visible fraction " +
                          std::to_string(vis) + " below " + std::to_string(min_vis));
            if (!(boxes[i].box.width() >= 1.0 && boxes[i].box.height() >= 1.0))
                violation("placement " + std::to_string(i) + " clipped box below 1x1");
            for (std::size_t j = i + 1; j < bp.placements.size(); ++j) {
                const double clipped_iou = iou(boxes[i].box, boxes[j].box);
                const double raw_iou = iou(unclipped, bp.placements[j].box());
                if (clipped_iou > max_iou || raw_iou > max_iou)
                    violation("pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") IoU " + std::to_string(std::max(clipped_iou, raw_iou)) +
                              " exceeds " + std::to_string(max_iou));
            }
        }

        std::vector<Annotation> expected;
        for (const auto& entry : boxes)
            if (!entry.is_distractor)
                expected.push_back(Annotation{entry.label, entry.box});

        // Annotation invariance across blend variants, plus agreement with
        // the blueprint geometry.
        const auto& records = ds.by_scene.at(id);
        std::string first_xml;
        for (const auto* record : records) {
            report.images_checked += 1;

            if (ds.config.wants_format("voc")) {
                const fs::path xml_path =
                    ds.root / "annotations" / "voc" /
                    (fs::path(record->image_path).stem().string() + ".xml");
                const std::string xml = read_text_file_or_throw(xml_path);
                if (first_xml.empty())
                    first_xml = xml;
                else if (xml != first_xml)
                    violation("voc annotation differs across blend variants (" +
                              record->blend_mode + ")");

                const VocAnnotation voc = parse_voc_file(xml_path.string());
                if (voc.width != bp.canvas_w || voc.height != bp.canvas_h)
                    violation("voc size disagrees with blueprint canvas");
                if (voc.objects.size() != expected.size()) {
                    violation("voc object count " + std::to_string(voc.objects.size()) +
                              " != " + std::to_string(expected.size()));
                } else {
                    for (std::size_t k = 0; k < expected.size(); ++k) {
                        if (voc.objects[k] != voc_box_from(expected[k])) {
                            violation("voc box " + std::to_string(k) +
                                      " disagrees with blueprint geometry");
                            break;
                        }
                    }
                }
            }

            if (has_coco) {
                const std::string file_name = fs::path(record->image_path).filename().string();
                const auto it = coco_by_file.find(file_name);
                const std::vector<Annotation> actual =
                    it == coco_by_file.end() ? std::vector<Annotation>{} : it->second;
                if (actual.size() != expected.size()) {
                    violation("coco annotation count for " + file_name + " is " +
                              std::to_string(actual.size()) + ", expected " +
                              std::to_string(expected.size()));
                } else {
                    for (std::size_t k = 0; k < expected.size(); ++k) {
                        const bool same = actual[k].label == expected[k].label &&
                                          std::abs(actual[k].box.xmin - expected[k].box.xmin) < 1e-9 &&
                                          std::abs(actual[k].box.ymin - expected[k].box.ymin) < 1e-9 &&
                                          std::abs(actual[k].box.xmax - expected[k].box.xmax) < 1e-9 &&
                                          std::abs(actual[k].box.ymax - expected[k].box.ymax) < 1e-9;
                        if (!same) {
                            violation("coco box " + std::to_string(k) + " for " + file_name +
                                      " disagrees with blueprint geometry");
                            break;
                        }
                    }
                }
            }

            // Pixel integrity against the recorded hash.
            Raster image;
            try {
                image = load_image((ds.root / record->image_path).string(), 3);
            } catch (const UnreadableImage& e) {
                throw CorruptDataset(e.what());
            }
            if (image.width() != bp.canvas_w || image.height() != bp.canvas_h)
                violation("image dimensions disagree with blueprint canvas (" +
                          record->blend_mode + ")");
            else if (sha256_hex(image.data()) != record->image_pixel_sha256)
                violation("image pixels do not match the manifest hash (" +
                          record->blend_mode + ")");
        }
    }
    return report;
}

StatsReport dataset_stats(const std::string& dataset_dir) {
    const LoadedDataset ds = load_dataset(dataset_dir);

    StatsReport stats;
    stats.images = static_cast<int>(ds.manifest.records.size());
    stats.box_scale_histogram.assign(7, 0);  // <16,<32,<64,<128,<256,<512,>=512
    stats.occlusion_histogram.assign(10, 0); // [0,0.1) ... [0.9,1.0]

    for (const auto& [id, bp] : ds.blueprints) {
        stats.scenes += 1;
        stats.background_usage[bp.background_ref] += 1;

        const auto boxes = blueprint_boxes(bp);
        for (std::size_t i = 0; i < bp.placements.size(); ++i) {
            const Placement& p = bp.placements[i];
            stats.placements += 1;
            if (p.is_distractor) {
                stats.distractor_placements += 1;
                stats.distractor_frequency[p.instance_label] += 1;
            } else {
                stats.instance_frequency[p.instance_label] += 1;
            }
            stats.view_coverage[p.instance_label][p.view_id] += 1;

            const double side = std::sqrt(std::max(0.0, boxes[i].box.area()));
            int bucket = 0;
            for (double limit = 16.0; bucket < 6 && side >= limit; limit *= 2.0)
                ++bucket;
            stats.box_scale_histogram[bucket] += 1;

            double worst = 0.0;
            for (std::size_t j = 0; j < bp.placements.size(); ++j)
                if (j != i)
                    worst = std::max(worst, iou(boxes[i].box, boxes[j].box));
            stats.occlusion_histogram[std::min(9, static_cast<int>(worst * 10.0))] += 1;
        }
    }
    return stats;
}

std::string format_verify(const VerifyReport& report) {
    std::ostringstream out;
    out << "scenes checked: " << report.scenes_checked << "\n";
    out << "images checked: " << report.images_checked << "\n";
    out << "violations: " << report.violations.size() << "\n";
    for (const auto& v : report.violations)
        out << "  [" << v.scene_id << "] " << v.message << "\n";
    return out.str();
}

std::string format_stats(const StatsReport& stats) {
    std::ostringstream out;
    out << "scenes: " << stats.scenes << "\n";
    out << "images: " << stats.images << "\n";
    out << "placements: " << stats.placements << " (distractors: "
        << stats.distractor_placements << ")\n";

    out << "background usage (count: backgrounds):\n";
    std::map<int, int> usage_histogram;
    for (const auto& [bg, count] : stats.background_usage) {
        (void)bg;
        usage_histogram[count] += 1;
    }
    for (const auto& [count, num] : usage_histogram)
        out << "  " << count << "x: " << num << "\n";

    out << "instance frequency:\n";
    for (const auto& [label, count] : stats.instance_frequency)
        out << "  " << label << ": " << count << "\n";
    if (!stats.distractor_frequency.empty()) {
        out << "distractor frequency:\n";
        for (const auto& [label, count] : stats.distractor_frequency)
            out << "  " << label << ": " << count << "\n";
    }

    out << "view coverage (views used / instance):\n";
    for (const auto& [label, views] : stats.view_coverage)
        out << "  " << label << ": " << views.size() << "\n";

    static const char* kScaleNames[] = {"<16", "<32", "<64", "<128", "<256", "<512", ">=512"};
    out << "box scale histogram (sqrt of clipped area, px):\n";
    for (std::size_t i = 0; i < stats.box_scale_histogram.size(); ++i)
        out << "  " << kScaleNames[i] << ": " << stats.box_scale_histogram[i] << "\n";

    out << "occlusion histogram (max pairwise IoU, bins of 0.1):\n";
    for (std::size_t i = 0; i < stats.occlusion_histogram.size(); ++i) {
        char range[32];
        std::snprintf(range, sizeof(range), "[%.1f,%.1f%s", i / 10.0, (i + 1) / 10.0,
                      i == 9 ? "]" : ")");
        out << "  " << range << ": " << stats.occlusion_histogram[i] << "\n";
    }
    return out.str();
}

} // namespace pastegen
