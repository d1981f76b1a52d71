#include "pastegen/synthesize.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "pastegen/annotations.hpp"
#include "pastegen/assets.hpp"
#include "pastegen/digest.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/image_io.hpp"
#include "pastegen/rng.hpp"

namespace fs = std::filesystem;

namespace pastegen {

namespace {

std::string scene_id_for(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%06d", index);
    return buf;
}

class BackgroundCache {
public:
    std::shared_ptr<const Raster> get(const std::string& path) {
        {
            std::lock_guard lock(mutex_);
            const auto it = cache_.find(path);
            if (it != cache_.end())
                return it->second;
        }
        auto raster = std::make_shared<const Raster>(load_image(path, 3));
        std::lock_guard lock(mutex_);
        return cache_.emplace(path, std::move(raster)).first->second;
    }

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const Raster>> cache_;
};

struct RenderedImage {
    ImageRecord record;
    CocoImageRecord coco;
};

struct SceneResult {
    bool failed = false;
    std::vector<RenderedImage> images;
    std::string log_line;
};

} // namespace

SynthesisReport run_synthesize(const RunConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (cfg.objects_dir.empty() || cfg.backgrounds_dir.empty())
        throw ConfigError("objects_dir and backgrounds_dir must be set");

    const AssetIndex index = scan_assets(cfg.objects_dir, cfg.backgrounds_dir,
                                         cfg.distractor_labels, cfg.masks_dir);
    const int backgrounds_total = static_cast<int>(index.backgrounds.size());
    const int num_scenes =
        cfg.num_scenes == 0 ? backgrounds_total * cfg.background_reuse : cfg.num_scenes;
    if (num_scenes < 1)
        throw ConfigError("resolved scene count must be >= 1");

    const std::vector<BlendMode> modes = cfg.blend_mode_list();
    const bool write_voc_files = cfg.wants_format("voc");
    const bool write_coco_file = cfg.wants_format("coco");

    const fs::path root(cfg.output_dir);
    fs::create_directories(root / "images");
    fs::create_directories(root / "blueprints");
    if (write_voc_files)
        fs::create_directories(root / "annotations" / "voc");
    else
        fs::create_directories(root / "annotations");

    CutoutCache cutouts(index, cfg.mask_params);
    BackgroundCache backgrounds;

    std::vector<SceneResult> results(num_scenes);
    std::atomic<int> next_scene{0};
    std::mutex failure_mutex;
    std::exception_ptr first_error;
    std::atomic<bool> abort{false};

    auto run_scene = [&](int i) {
        SceneResult& result = results[i];
        const std::string id = scene_id_for(i);
        const std::uint64_t seed = derive_scene_seed(cfg.seed, static_cast<std::uint64_t>(i));
        const std::string& bg_path = index.backgrounds[i % backgrounds_total];
        const auto background = backgrounds.get(bg_path);

        RngStream rng(seed);
        SceneBlueprint bp;
        try {
            bp = compose_blueprint(rng, id, bg_path, background->width(),
                                   background->height(), index, cutouts, cfg.augment,
                                   cfg.constraints);
        } catch (const SceneUnsatisfiable&) {
            result.failed = true;
            result.log_line = "scene=" + id + " status=unsatisfiable";
            return;
        }
        bp.scene_seed = seed;

        const std::string blueprint_rel = "blueprints/" + id + ".txt";
        {
            std::ofstream out(root / blueprint_rel, std::ios::binary);
            if (!out)
                throw IoError("cannot write blueprint: " + (root / blueprint_rel).string());
            out << serialize_blueprint(bp);
        }

        const PreparedScene prepared = prepare_scene(bp, cutouts, *background);

        std::vector<BlendMode> scene_modes;
        if (cfg.same_image_multiblend)
            scene_modes = modes;
        else
            scene_modes = {modes[i % modes.size()]}; // deterministic round robin

        ImageAnnotations annotations;
        annotations.image_name = id;
        annotations.width = bp.canvas_w;
        annotations.height = bp.canvas_h;

        long long poisson_iters = 0;
        int unconverged = 0;
        for (const auto& mode : scene_modes) {
            const RenderedScene rendered = render_prepared(prepared, mode);
            annotations.objects = rendered.annotations;

            const std::string stem = id + "_" + mode.tag();
            const std::string image_rel = "images/" + stem + ".png";
            save_png((root / image_rel).string(), rendered.image);
            if (write_voc_files)
                write_voc(annotations, (root / "annotations" / "voc").string(), stem);

            RenderedImage out;
            out.record.image_path = image_rel;
            out.record.blueprint_path = blueprint_rel;
            out.record.blueprint_id = id;
            out.record.blend_mode = mode.tag();
            out.record.scene_seed = seed;
            out.record.image_pixel_sha256 = sha256_hex(rendered.image.data());
            out.record.stats = rendered.stats;
            out.coco.file_name = stem + ".png";
            out.coco.width = bp.canvas_w;
            out.coco.height = bp.canvas_h;
            out.coco.objects = rendered.annotations;
            result.images.push_back(std::move(out));

            poisson_iters += rendered.stats.iterations;
            unconverged += rendered.stats.unconverged;
        }

        char line[256];
        std::snprintf(line, sizeof(line),
                      "scene=%s seed=%llu placements=%zu modes=%zu poisson_iters=%lld "
                      "unconverged=%d",
                      id.c_str(), static_cast<unsigned long long>(seed),
                      bp.placements.size(), scene_modes.size(), poisson_iters, unconverged);
        result.log_line = line;
    };

    auto worker_loop = [&]() {
        while (!abort.load()) {
            const int i = next_scene.fetch_add(1);
            if (i >= num_scenes)
                return;
            try {
                run_scene(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                abort.store(true);
                return;
            }
            if (log) {
                std::lock_guard lock(failure_mutex);
                *log << results[i].log_line << "\n";
            }
        }
    };

    const int worker_count = std::max(1, std::min(cfg.workers, num_scenes));
    std::vector<std::thread> threads;
    for (int t = 1; t < worker_count; ++t)
        threads.emplace_back(worker_loop);
    worker_loop();
    for (auto& t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);

    DatasetManifest manifest;
    manifest.config_echo = cfg.to_json();
    manifest.config_echo["num_scenes"] = num_scenes; // resolved value
    manifest.backgrounds_total = backgrounds_total;
    manifest.scenes_requested = num_scenes;

    std::vector<CocoImageRecord> coco_records;
    for (int i = 0; i < num_scenes; ++i) {
        if (results[i].failed) {
            manifest.failed_scenes.push_back(i);
            continue;
        }
        for (auto& image : results[i].images) {
            manifest.records.push_back(image.record);
            coco_records.push_back(image.coco);
        }
    }

    if (write_coco_file)
        write_coco(coco_records, (root / "annotations" / "coco.json").string());

    const std::string manifest_path = (root / "manifest.json").string();
    manifest.write(manifest_path);

    SynthesisReport report;
    report.scenes_requested = num_scenes;
    report.scenes_failed = static_cast<int>(manifest.failed_scenes.size());
    report.scenes_rendered = num_scenes - report.scenes_failed;
    report.images_written = static_cast<int>(manifest.records.size());
    report.manifest_path = manifest_path;
    report.manifest_sha256 = sha256_file(manifest_path);
    return report;
}

} // namespace pastegen
