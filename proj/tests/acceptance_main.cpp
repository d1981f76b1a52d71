// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Generates its own synthetic asset libraries, so it runs without
// external data.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "pastegen/annotations.hpp"
#include "pastegen/assets.hpp"
#include "pastegen/blending.hpp"
#include "pastegen/config.hpp"
#include "pastegen/digest.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/evaluate.hpp"
#include "pastegen/image_io.hpp"
#include "pastegen/manifest.hpp"
#include "pastegen/mask_extract.hpp"
#include "pastegen/rng.hpp"
#include "pastegen/synthesize.hpp"
#include "pastegen/verify.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using namespace pastegen;

namespace {

struct Context {
    testutil::TempDir dir{"pastegen_acceptance"};
    fs::path assets;           // 640x480 asset library for the main dataset
    fs::path main_out;         // 100-scene, 3-mode dataset (kept for 3, 5, 6)
    RunConfig main_cfg;
    double main_runtime_seconds = 0.0;
};

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
    std::map<std::string, std::string> hashes;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            hashes[fs::relative(entry.path(), root).string()] =
                sha256_file(entry.path().string());
    return hashes;
}

RunConfig main_config(Context& ctx) {
    RunConfig cfg;
    cfg.seed = 20170701;
    cfg.objects_dir = (ctx.assets / "objects").string();
    cfg.backgrounds_dir = (ctx.assets / "backgrounds").string();
    cfg.output_dir = (ctx.main_out).string();
    cfg.distractor_labels = {"item_05"};
    cfg.num_scenes = 100;
    cfg.blend_modes = {"direct", "gaussian", "poisson"};
    return cfg;
}

// 1. Byte-identical outputs across repeated runs and worker counts, within
//    the runtime budget (100 scenes, 640x480, 3 blend modes).
bool criterion_determinism(Context& ctx, std::ostream& out) {
    testutil::AssetTreeOptions opt;
    opt.instances = 6;
    opt.views_per_instance = 3;
    opt.backgrounds = 25;
    opt.background_w = 640;
    opt.background_h = 480;
    opt.object_image_size = 200;
    ctx.assets = ctx.dir.path() / "assets_main";
    testutil::write_asset_tree(ctx.assets, opt);
    ctx.main_out = ctx.dir.path() / "dataset_main";
    ctx.main_cfg = main_config(ctx);

    RunConfig cfg = ctx.main_cfg;
    cfg.workers = 1;
    const auto start = std::chrono::steady_clock::now();
    const SynthesisReport first = run_synthesize(cfg);
    ctx.main_runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto hashes_first = tree_hashes(ctx.main_out);

    fs::remove_all(ctx.main_out);
    const SynthesisReport second = run_synthesize(cfg);
    const auto hashes_second = tree_hashes(ctx.main_out);

    fs::remove_all(ctx.main_out);
    cfg.workers = 8;
    const SynthesisReport third = run_synthesize(cfg);
    const auto hashes_third = tree_hashes(ctx.main_out);

    bool ok = true;
    if (first.scenes_failed != 0 || first.images_written != 300) {
        out << "  expected 300 images from 100 scenes x 3 modes, got "
            << first.images_written << " (failed " << first.scenes_failed << ")\n";
        ok = false;
    }
    if (hashes_first != hashes_second) {
        out << "  repeated single-worker runs differ\n";
        ok = false;
    }
    if (hashes_first != hashes_third) {
        out << "  workers=8 run differs from workers=1\n";
        ok = false;
    }
    if (first.manifest_sha256 != second.manifest_sha256 ||
        first.manifest_sha256 != third.manifest_sha256) {
        out << "  manifest digests differ across runs\n";
        ok = false;
    }
    if (ctx.main_runtime_seconds > 300.0) {
        out << "  runtime " << ctx.main_runtime_seconds << "s exceeds the 300s budget\n";
        ok = false;
    }
    out << "  100 scenes x 3 modes in " << ctx.main_runtime_seconds
        << "s; manifest sha256 " << first.manifest_sha256.substr(0, 16) << "...\n";
    return ok;
}

// 2. Zero constraint violations over >= 500 generated scenes with the
//    default constraints, re-checked independently from the serialized
//    blueprints and by the shipped verifier.
bool criterion_constraints(Context& ctx, std::ostream& out) {
    const fs::path assets = ctx.dir.path() / "assets_small";
    testutil::AssetTreeOptions opt;
    opt.instances = 5;
    opt.views_per_instance = 2;
    opt.backgrounds = 10;
    opt.background_w = 320;
    opt.background_h = 240;
    testutil::write_asset_tree(assets, opt);

    RunConfig cfg;
    cfg.seed = 555;
    cfg.objects_dir = (assets / "objects").string();
    cfg.backgrounds_dir = (assets / "backgrounds").string();
    cfg.output_dir = (ctx.dir.path() / "dataset_500").string();
    cfg.distractor_labels = {"item_04"};
    cfg.num_scenes = 500;
    cfg.blend_modes = {"direct"}; // constraints are blueprint-level
    cfg.workers = 8;
    const SynthesisReport report = run_synthesize(cfg);
    if (report.scenes_failed != 0) {
        out << "  " << report.scenes_failed << " scenes failed to compose\n";
        return false;
    }

    // Independent brute force straight off the blueprint files.
    int violations = 0;
    int scenes = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(cfg.output_dir) / "blueprints")) {
        const SceneBlueprint bp = parse_blueprint(testutil::read_file(entry.path()));
        ++scenes;
        const auto boxes = blueprint_boxes(bp);
        for (std::size_t i = 0; i < bp.placements.size(); ++i) {
            if (visible_fraction(bp.placements[i].box(), bp.canvas_w, bp.canvas_h) <
                0.25 - 1e-12)
                ++violations;
            for (std::size_t j = i + 1; j < bp.placements.size(); ++j) {
                if (iou(boxes[i].box, boxes[j].box) > 0.75 + 1e-12)
                    ++violations;
                if (iou(bp.placements[i].box(), bp.placements[j].box()) > 0.75 + 1e-12)
                    ++violations;
            }
        }
    }

    const VerifyReport verified = verify_dataset(cfg.output_dir);
    out << "  " << scenes << " scenes, brute-force violations: " << violations
        << ", verifier violations: " << verified.violations.size() << "\n";
    return scenes >= 500 && violations == 0 && verified.ok();
}

// 3. For every blueprint rendered under {direct, gaussian, poisson}, the
//    three annotation files are byte-identical.
bool criterion_annotation_invariance(Context& ctx, std::ostream& out) {
    const DatasetManifest manifest =
        DatasetManifest::load((ctx.main_out / "manifest.json").string());
    std::map<std::string, std::set<std::string>> xml_bytes_by_scene;
    std::map<std::string, int> modes_by_scene;
    for (const auto& record : manifest.records) {
        const fs::path xml = ctx.main_out / "annotations" / "voc" /
                             (fs::path(record.image_path).stem().string() + ".xml");
        xml_bytes_by_scene[record.blueprint_id].insert(testutil::read_file(xml));
        modes_by_scene[record.blueprint_id] += 1;
    }
    int scenes = 0;
    for (const auto& [scene, variants] : xml_bytes_by_scene) {
        ++scenes;
        if (modes_by_scene[scene] != 3) {
            out << "  scene " << scene << " has " << modes_by_scene[scene] << " variants\n";
            return false;
        }
        if (variants.size() != 1) {
            out << "  scene " << scene << " annotation files differ across blend modes\n";
            return false;
        }
    }
    out << "  " << scenes << " scenes x 3 blend modes, all annotation files identical\n";
    return scenes == 100;
}

// 4. CG solution matches a dense direct solve of the identical system within
//    1e-3 max-norm on randomized composites; the identity case reproduces
//    the background within 1/255.
bool criterion_poisson_oracle(Context& ctx, std::ostream& out) {
    (void)ctx;
    RngStream rng(0xACCE);
    int verified = 0;
    std::size_t max_unknowns = 0;
    double worst = 0.0;
    while (verified < 20) {
        const int bw = 33 + static_cast<int>(rng.uniform_index(32));
        const int bh = 33 + static_cast<int>(rng.uniform_index(32));
        const Raster bg = testutil::gradient_background(bw, bh, rng.next_u64());
        const int radius = 8 + static_cast<int>(rng.uniform_index(15));
        const Cutout cutout = testutil::disk_cutout(radius, rng.next_u64());
        const int ax = static_cast<int>(rng.uniform_int(-radius, bw - radius));
        const int ay = static_cast<int>(rng.uniform_int(-radius, bh - radius));

        const PoissonSystem system = poisson_system(bg, cutout, ax, ay, 1e-6, 20000);
        const std::size_t n = system.unknowns.size();
        if (system.used_direct_fallback || n == 0 || n > 2000)
            continue;

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            A(i, i) = 4.0;
            for (const int nb : system.neighbors[i])
                if (nb >= 0)
                    A(i, nb) -= 1.0;
        }
        const auto lu = A.partialPivLu();
        for (int c = 0; c < 3; ++c) {
            Eigen::VectorXd b(n);
            for (std::size_t i = 0; i < n; ++i)
                b(i) = system.rhs[c][i];
            const Eigen::VectorXd dense = lu.solve(b);
            for (std::size_t i = 0; i < n; ++i)
                worst = std::max(worst, std::abs(dense(i) - system.solution[c][i]));
        }
        max_unknowns = std::max(max_unknowns, n);
        ++verified;
    }

    // Identity case: source pixels equal to the background region.
    const Raster bg = testutil::gradient_background(80, 60, 99);
    const int radius = 16, ax = 20, ay = 12, size = 2 * radius + 1;
    Raster color(size, size, 3);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            for (int c = 0; c < 3; ++c)
                color.at(x, y, c) = bg.at(ax + x, ay + y, c);
    const Cutout identity = make_cutout(
        color, testutil::disk_mask(size, size, radius, radius, radius), "o", "v");
    const Raster pasted = paste_poisson(bg, identity, ax, ay, 1e-6, 20000);
    int identity_diff = 0;
    for (std::size_t i = 0; i < pasted.data().size(); ++i)
        identity_diff = std::max(identity_diff,
                                 std::abs(static_cast<int>(pasted.data()[i]) -
                                          static_cast<int>(bg.data()[i])));

    out << "  " << verified << " composites (max " << max_unknowns
        << " unknowns), worst |cg - dense| = " << worst
        << ", identity max pixel diff = " << identity_diff << "\n";
    return worst <= 1e-3 && identity_diff <= 1;
}

// 5. Pixels outside every pasted mask (dilated by the kernel radius for the
//    Gaussian mode) are byte-identical to the source background, for every
//    image of the main dataset.
bool criterion_locality(Context& ctx, std::ostream& out) {
    const DatasetManifest manifest =
        DatasetManifest::load((ctx.main_out / "manifest.json").string());
    const AssetIndex index = scan_assets(ctx.main_cfg.objects_dir,
                                         ctx.main_cfg.backgrounds_dir,
                                         ctx.main_cfg.distractor_labels);
    CutoutCache cutouts(index, ctx.main_cfg.mask_params);
    const std::vector<BlendMode> modes = ctx.main_cfg.blend_mode_list();

    std::map<std::string, SceneBlueprint> blueprints;
    int images_checked = 0;
    long long outside_pixels = 0;
    for (const auto& record : manifest.records) {
        if (!blueprints.count(record.blueprint_id))
            blueprints[record.blueprint_id] = parse_blueprint(
                testutil::read_file(ctx.main_out / record.blueprint_path));
        const SceneBlueprint& bp = blueprints[record.blueprint_id];

        int radius = 0;
        for (const auto& mode : modes)
            if (mode.tag() == record.blend_mode)
                radius = mode.locality_radius();

        // Union of pasted masks, dilated by the mode's locality radius.
        Raster covered(bp.canvas_w, bp.canvas_h, 1);
        for (const auto& p : bp.placements) {
            const auto cutout = cutouts.get(p.instance_label, p.view_id);
            const Raster alpha = transform_alpha(cutout->alpha, p.scale, p.rotation);
            const auto tight = mask_tight_box(alpha);
            if (!tight)
                return false;
            const int ox = static_cast<int>(tight->xmin);
            const int oy = static_cast<int>(tight->ymin);
            for (int y = 0; y < p.height; ++y)
                for (int x = 0; x < p.width; ++x) {
                    if (alpha.at(ox + x, oy + y) == 0)
                        continue;
                    for (int dy = -radius; dy <= radius; ++dy)
                        for (int dx = -radius; dx <= radius; ++dx) {
                            const int cx = p.anchor_x + x + dx;
                            const int cy = p.anchor_y + y + dy;
                            if (cx >= 0 && cy >= 0 && cx < bp.canvas_w && cy < bp.canvas_h)
                                covered.at(cx, cy) = 255;
                        }
                }
        }

        const Raster image = load_image((ctx.main_out / record.image_path).string(), 3);
        const Raster background = load_image(bp.background_ref, 3);
        for (int y = 0; y < bp.canvas_h; ++y)
            for (int x = 0; x < bp.canvas_w; ++x) {
                if (covered.at(x, y) > 0)
                    continue;
                ++outside_pixels;
                for (int c = 0; c < 3; ++c)
                    if (image.at(x, y, c) != background.at(x, y, c)) {
                        out << "  " << record.image_path << " differs from background at ("
                            << x << "," << y << ")\n";
                        return false;
                    }
            }
        ++images_checked;
    }
    out << "  " << images_checked << " images, " << outside_pixels
        << " outside-mask pixels all byte-identical to their backgrounds\n";
    return images_checked == 300;
}

// 6. All-point AP matches a brute-force cutoff-enumeration oracle within
//    1e-9; a perfect detector scores mAP 1.0; the 50x30 ground-truth filter
//    excludes small boxes from num_gt.
bool criterion_evaluator(Context& ctx, std::ostream& out) {
    // Oracle equivalence on 50 randomized instances.
    RngStream rng(0xEA1);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int num_gt = 1 + static_cast<int>(rng.uniform_index(5));
        int available = num_gt;
        std::vector<ScoredFlag> flags;
        const int dets = static_cast<int>(rng.uniform_index(11));
        for (int d = 0; d < dets; ++d) {
            const bool tp = available > 0 && rng.uniform01() < 0.5;
            if (tp)
                --available;
            flags.push_back(
                ScoredFlag{rng.uniform01() < 0.25 ? 0.5 : rng.uniform01(), tp});
        }
        // Brute force: for each TP recall step, the envelope max over all
        // cutoffs with recall at or beyond it.
        std::vector<ScoredFlag> sorted = flags;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const ScoredFlag& a, const ScoredFlag& b) {
                             return a.score > b.score;
                         });
        std::vector<double> precision(sorted.size()), recall(sorted.size());
        int tp_count = 0;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            tp_count += sorted[k].is_tp ? 1 : 0;
            precision[k] = static_cast<double>(tp_count) / (k + 1);
            recall[k] = static_cast<double>(tp_count) / num_gt;
        }
        double oracle = 0.0;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            if (!sorted[k].is_tp)
                continue;
            double envelope = 0.0;
            for (std::size_t j = 0; j < sorted.size(); ++j)
                if (recall[j] >= recall[k])
                    envelope = std::max(envelope, precision[j]);
            oracle += envelope / num_gt;
        }
        const double impl = average_precision(flags, num_gt, EvalConfig::Interp::AllPoint);
        worst = std::max(worst, std::abs(impl - oracle));
    }
    if (worst > 1e-9) {
        out << "  AP oracle mismatch: " << worst << "\n";
        return false;
    }

    // Perfect detector over the generated dataset: detections equal to every
    // ground truth that passes the evaluation size filter.
    EvalConfig cfg; // IoU 0.5, min box 50x30, all-point
    const std::string gt_path = (ctx.main_out / "annotations" / "coco.json").string();
    const CocoDataset gt = parse_coco_file(gt_path);
    nlohmann::json detections = nlohmann::json::array();
    int kept = 0;
    for (const auto& ann : gt.annotations) {
        if (ann.box.width() < cfg.min_box_width || ann.box.height() < cfg.min_box_height)
            continue;
        ++kept;
        detections.push_back({{"image_id", ann.image_id},
                              {"category_id", ann.category_id},
                              {"bbox", {ann.box.xmin, ann.box.ymin, ann.box.width(),
                                        ann.box.height()}},
                              {"score", 1.0}});
    }
    const fs::path det_path = ctx.dir.path() / "perfect_detections.json";
    testutil::write_file(det_path, detections.dump());
    const ApResult perfect = evaluate_files(gt_path, det_path.string(), cfg);
    if (std::abs(perfect.map - 1.0) > 1e-12) {
        out << "  perfect detector scored mAP " << perfect.map << "\n";
        return false;
    }

    // Size filter: a 40x20 ground truth is excluded from num_gt, and a
    // detection covering only it counts as a false positive.
    const std::vector<std::vector<Annotation>> gts{
        {Annotation{"a", BoundingBox{0, 0, 60, 40}},
         Annotation{"a", BoundingBox{100, 100, 140, 120}}}};
    const std::vector<std::vector<Detection>> hit_small{
        {Detection{"a", BoundingBox{100, 100, 140, 120}, 0.9}}};
    const ApResult filtered = evaluate_detections(hit_small, gts, cfg);
    if (filtered.per_class.at("a") != 0.0) {
        out << "  filtered ground truth was matched\n";
        return false;
    }

    out << "  oracle gap " << worst << "; perfect detector mAP = " << perfect.map << " over "
        << kept << " boxes; 50x30 filter active\n";
    return true;
}

// 7. The shipped composition config reproduces the reuse arithmetic exactly:
//    every background used exactly `reuse` times, scene count = N * reuse.
bool criterion_composition(Context& ctx, std::ostream& out) {
    const fs::path assets = ctx.dir.path() / "assets_comp";
    testutil::AssetTreeOptions opt;
    opt.instances = 3;
    opt.views_per_instance = 2;
    opt.backgrounds = 12;
    opt.background_w = 320;
    opt.background_h = 240;
    testutil::write_asset_tree(assets, opt);

    RunConfig cfg = RunConfig::from_file(PASTEGEN_CONFIG_DIR "/full_recipe.json");
    cfg.objects_dir = (assets / "objects").string();
    cfg.backgrounds_dir = (assets / "backgrounds").string();
    cfg.output_dir = (ctx.dir.path() / "dataset_comp").string();
    cfg.workers = 8;
    const SynthesisReport report = run_synthesize(cfg);
    if (report.scenes_failed != 0 || report.scenes_requested != 48) {
        out << "  expected 12 backgrounds x 4 = 48 scenes, got "
            << report.scenes_requested << " (failed " << report.scenes_failed << ")\n";
        return false;
    }

    const StatsReport stats = dataset_stats(cfg.output_dir);
    for (const auto& [bg, count] : stats.background_usage)
        if (count != 4) {
            out << "  background " << bg << " used " << count << " times\n";
            return false;
        }
    if (stats.background_usage.size() != 12 || stats.scenes != 48) {
        out << "  usage table covers " << stats.background_usage.size() << " backgrounds, "
            << stats.scenes << " scenes\n";
        return false;
    }

    // The same arithmetic at library scale, as pure assignment math: 1548
    // backgrounds, reuse factor 4, scene i uses background i mod 1548.
    std::vector<int> usage(1548, 0);
    const int scenes = 1548 * 4;
    for (int i = 0; i < scenes; ++i)
        usage[i % 1548] += 1;
    for (const int count : usage)
        if (count != 4)
            return false;

    out << "  12 backgrounds x4 reproduced exactly; 1548x4 = " << scenes
        << " assignment verified\n";
    return true;
}

// 8. Mask extraction quality on synthetic fixtures.
bool criterion_mask_quality(Context& ctx, std::ostream& out) {
    (void)ctx;
    Raster img = testutil::solid_color(200, 200, 255, 255, 255);
    testutil::draw_disk(img, 100, 100, 50, 20, 20, 20);
    const Raster oracle = testutil::disk_mask(200, 200, 100, 100, 50);
    const Raster mask = extract_mask(img);

    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < mask.data().size(); ++i) {
        const bool a = mask.data()[i] > 0;
        const bool b = oracle.data()[i] > 0;
        inter += a && b;
        uni += a || b;
    }
    const double mask_iou = static_cast<double>(inter) / uni;

    bool uniform_rejected = false;
    try {
        extract_mask(testutil::solid_color(64, 64, 180, 180, 180));
    } catch (const NoForeground&) {
        uniform_rejected = true;
    }

    out << "  analytic disk IoU = " << mask_iou << "; uniform image rejected: "
        << (uniform_rejected ? "yes" : "no") << "\n";
    return mask_iou >= 0.98 && uniform_rejected;
}

} // namespace

int main() {
    Context ctx;
    const std::vector<std::pair<std::string, std::function<bool(Context&, std::ostream&)>>>
        criteria{
            {"determinism across runs and worker counts, within the runtime budget",
             criterion_determinism},
            {"constraint soundness over 500 generated scenes", criterion_constraints},
            {"annotation invariance across blend modes", criterion_annotation_invariance},
            {"poisson solver matches a dense direct solve", criterion_poisson_oracle},
            {"blending locality outside pasted masks", criterion_locality},
            {"evaluator equals the brute-force AP oracle", criterion_evaluator},
            {"background reuse composition arithmetic", criterion_composition},
            {"mask extraction quality on synthetic fixtures", criterion_mask_quality},
        };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = criteria[i].second(ctx, detail);
        } catch (const std::exception& e) {
            detail << "  exception: " << e.what() << "\n";
        }
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << criteria[i].first
                  << "\n" << detail.str();
        failures += ok ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : "criteria failed") << " ("
              << criteria.size() - failures << "/" << criteria.size() << ")\n";
    return failures == 0 ? 0 : 1;
}
