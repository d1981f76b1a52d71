#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "pastegen/annotations.hpp"
#include "pastegen/assets.hpp"
#include "pastegen/blending.hpp"
#include "pastegen/config.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/image_io.hpp"
#include "pastegen/manifest.hpp"
#include "pastegen/rng.hpp"
#include "pastegen/synthesize.hpp"
#include "pastegen/verify.hpp"
#include "testutil.hpp"

using namespace pastegen;

TEST_CASE("scan_assets builds a sorted, complete index") {
    testutil::TempDir dir;
    testutil::AssetTreeOptions opt;
    opt.instances = 2;
    opt.views_per_instance = 3;
    opt.backgrounds = 5;
    testutil::write_asset_tree(dir.path(), opt);

    const AssetIndex index = scan_assets((dir.path() / "objects").string(),
                                         (dir.path() / "backgrounds").string(), {});
    REQUIRE(index.objects.size() == 2);
    for (const auto& [label, views] : index.objects) {
        CHECK(views.size() == 3);
        CHECK(std::is_sorted(views.begin(), views.end(),
                             [](const AssetView& a, const AssetView& b) {
                                 return a.view_id < b.view_id;
                             }));
        for (const auto& view : views)
            CHECK_FALSE(view.mask_path.empty());
        (void)label;
    }
    CHECK(index.backgrounds.size() == 5);
    CHECK(std::is_sorted(index.backgrounds.begin(), index.backgrounds.end()));
}

TEST_CASE("missing mask files leave the mask path empty and maskgen fills in") {
    testutil::TempDir dir;
    testutil::AssetTreeOptions opt;
    opt.instances = 1;
    opt.write_masks = false;
    testutil::write_asset_tree(dir.path(), opt);

    const AssetIndex index = scan_assets((dir.path() / "objects").string(),
                                         (dir.path() / "backgrounds").string(), {});
    const auto& views = index.objects.begin()->second;
    for (const auto& view : views)
        CHECK(view.mask_path.empty());

    const Cutout cutout = load_cutout(views[0], index.objects.begin()->first, MaskParams{});
    CHECK(count_foreground(cutout.alpha) > 0);
}

TEST_CASE("an empty backgrounds directory raises EmptyAssets") {
    testutil::TempDir dir;
    testutil::AssetTreeOptions opt;
    opt.instances = 1;
    testutil::write_asset_tree(dir.path(), opt);
    std::filesystem::create_directories(dir.path() / "empty_bg");
    CHECK_THROWS_AS(scan_assets((dir.path() / "objects").string(),
                                (dir.path() / "empty_bg").string(), {}),
                    EmptyAssets);
}

TEST_CASE("unknown distractor labels are rejected") {
    testutil::TempDir dir;
    testutil::write_asset_tree(dir.path(), {.instances = 2});
    CHECK_THROWS_AS(scan_assets((dir.path() / "objects").string(),
                                (dir.path() / "backgrounds").string(), {"nope"}),
                    Error);
}

TEST_CASE("derive_scene_seed is stable, collision-free and master-sensitive") {
    CHECK(derive_scene_seed(17, 3) == derive_scene_seed(17, 3));

    std::vector<std::uint64_t> seeds;
    seeds.reserve(1000000);
    for (std::uint64_t i = 0; i < 1000000; ++i)
        seeds.push_back(derive_scene_seed(0xDEADBEEF, i));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    for (std::uint64_t i = 0; i < 10000; ++i)
        CHECK(derive_scene_seed(1, i) != derive_scene_seed(2, i));
}

TEST_CASE("voc integer conversion follows the floor/ceil rule") {
    const VocBox a = voc_box_from(Annotation{"x", BoundingBox{0.0, 0.0, 10.0, 10.0}});
    CHECK(a.xmin == 1);
    CHECK(a.ymin == 1);
    CHECK(a.xmax == 10);
    CHECK(a.ymax == 10);

    const VocBox b = voc_box_from(Annotation{"x", BoundingBox{2.5, 3.5, 7.25, 9.0}});
    CHECK(b.xmin == 3);
    CHECK(b.ymin == 4);
    CHECK(b.xmax == 8);
    CHECK(b.ymax == 9);
}

TEST_CASE("voc write-then-parse reproduces integer boxes exactly") {
    testutil::TempDir dir;
    ImageAnnotations annotations;
    annotations.image_name = "scene_000042";
    annotations.width = 640;
    annotations.height = 480;
    annotations.objects = {Annotation{"mug", BoundingBox{12.75, 9.0, 100.5, 200.25}},
                           Annotation{"box", BoundingBox{0.0, 0.0, 33.0, 21.0}}};

    const std::string path = write_voc(annotations, dir.str(), "scene_000042_direct");
    const VocAnnotation parsed = parse_voc_file(path);
    CHECK(parsed.filename == "scene_000042");
    CHECK(parsed.width == 640);
    CHECK(parsed.height == 480);
    CHECK(parsed.depth == 3);
    REQUIRE(parsed.objects.size() == 2);
    CHECK(parsed.objects[0] == voc_box_from(annotations.objects[0]));
    CHECK(parsed.objects[1] == voc_box_from(annotations.objects[1]));
}

TEST_CASE("corrupted voc xml raises CorruptDataset") {
    testutil::TempDir dir;
    const auto path = dir.path() / "bad.xml";
    testutil::write_file(path, "<annotation><filename>x</filename><size>");
    CHECK_THROWS_AS(parse_voc_file(path.string()), CorruptDataset);
}

TEST_CASE("coco writer emits half-open float boxes and deterministic ids") {
    std::vector<CocoImageRecord> records(6);
    for (int scene = 0; scene < 2; ++scene) {
        for (int mode = 0; mode < 3; ++mode) {
            auto& record = records[scene * 3 + mode];
            record.file_name = "scene_" + std::to_string(scene) + "_" + std::to_string(mode) +
                               ".png";
            record.width = 320;
            record.height = 240;
            record.objects = {Annotation{"mug", BoundingBox{0, 0, 10, 10}}};
        }
    }
    const std::string text = coco_json(records);
    CHECK(text == coco_json(records)); // byte-identical on identical input

    const CocoDataset parsed = parse_coco(text);
    CHECK(parsed.images.size() == 6);
    REQUIRE(parsed.annotations.size() == 6);
    CHECK(parsed.annotations[0].box == BoundingBox{0.0, 0.0, 10.0, 10.0});
    for (std::size_t i = 0; i < parsed.images.size(); ++i)
        CHECK(parsed.images[i].id == static_cast<int>(i) + 1);
}

TEST_CASE("coco boxes round-trip through JSON for fractional coordinates") {
    RngStream rng(404);
    std::vector<CocoImageRecord> records(1);
    records[0].file_name = "img.png";
    records[0].width = 1000;
    records[0].height = 1000;
    for (int i = 0; i < 40; ++i) {
        const double x0 = i % 2 == 0 ? rng.uniform_index(500) : rng.uniform(0.0, 500.0);
        const double y0 = i % 3 == 0 ? rng.uniform_index(500) : rng.uniform(0.0, 500.0);
        const double w = 1.0 + rng.uniform(0.0, 100.0);
        const double h = 1.0 + rng.uniform(0.0, 100.0);
        records[0].objects.push_back(
            Annotation{"label_" + std::to_string(i % 5), BoundingBox{x0, y0, x0 + w, y0 + h}});
    }
    const CocoDataset parsed = parse_coco(coco_json(records));
    REQUIRE(parsed.annotations.size() == records[0].objects.size());
    for (std::size_t i = 0; i < parsed.annotations.size(); ++i) {
        CHECK(parsed.annotations[i].box.xmin == records[0].objects[i].box.xmin);
        CHECK(parsed.annotations[i].box.ymin == records[0].objects[i].box.ymin);
        CHECK(parsed.annotations[i].box.xmax == records[0].objects[i].box.xmax);
        CHECK(parsed.annotations[i].box.ymax == records[0].objects[i].box.ymax);
        CHECK(parsed.category_name(parsed.annotations[i].category_id) ==
              records[0].objects[i].label);
    }
}

TEST_CASE("manifest serialization round-trips") {
    DatasetManifest manifest;
    manifest.config_echo = {{"seed", 7}};
    manifest.backgrounds_total = 3;
    manifest.scenes_requested = 12;
    manifest.failed_scenes = {5};
    ImageRecord record;
    record.image_path = "images/scene_000000_direct.png";
    record.blueprint_path = "blueprints/scene_000000.txt";
    record.blueprint_id = "scene_000000";
    record.blend_mode = "direct";
    record.scene_seed = derive_scene_seed(7, 0);
    record.image_pixel_sha256 = std::string(64, 'a');
    record.stats.solves = 3;
    record.stats.iterations = 123;
    record.stats.max_residual = 1e-7;
    manifest.records.push_back(record);

    const DatasetManifest parsed = DatasetManifest::from_json(manifest.to_json());
    CHECK(parsed.serialize() == manifest.serialize());
    CHECK(parsed.records[0].scene_seed == record.scene_seed);
    CHECK(parsed.records[0].stats.iterations == 123);
}

TEST_CASE("render_scene and render_multiblend share annotations and pixels") {
    testutil::TempDir dir;
    testutil::write_asset_tree(dir.path(), {.instances = 2,
                                            .views_per_instance = 2,
                                            .backgrounds = 1,
                                            .background_w = 240,
                                            .background_h = 180});
    const AssetIndex index = scan_assets((dir.path() / "objects").string(),
                                         (dir.path() / "backgrounds").string(), {});
    const CutoutCache cache(index, MaskParams{});
    const Raster background = load_image(index.backgrounds[0], 3);

    AugmentConfig aug;
    aug.objects_per_scene = {2, 2};
    aug.distractors_per_scene = {0, 0};
    RngStream rng(31337);
    SceneBlueprint bp = compose_blueprint(rng, "scene_000000", index.backgrounds[0],
                                          background.width(), background.height(), index,
                                          cache, aug, ConstraintConfig{});

    const RenderedScene single = render_scene(bp, BlendMode::direct(), cache, background);
    const auto singleton = render_multiblend(bp, {BlendMode::direct()}, cache, background);
    REQUIRE(singleton.size() == 1);
    CHECK(singleton[0].image == single.image);

    const std::vector<BlendMode> modes{BlendMode::direct(), BlendMode::gaussian(2.0),
                                       BlendMode::poisson()};
    const auto renders = render_multiblend(bp, modes, cache, background);
    REQUIRE(renders.size() == 3);
    for (const auto& rendered : renders) {
        REQUIRE(rendered.annotations.size() == single.annotations.size());
        for (std::size_t i = 0; i < rendered.annotations.size(); ++i) {
            CHECK(rendered.annotations[i].label == single.annotations[i].label);
            CHECK(rendered.annotations[i].box == single.annotations[i].box);
        }
        // The per-render VOC writer produces byte-identical XML across modes.
        const std::string path = write_voc(rendered, (dir.path() / "voc").string());
        CHECK(testutil::read_file(path) ==
              testutil::read_file(write_voc(renders[0], (dir.path() / "voc").string())));
    }
}

TEST_CASE("multiblend off rotates deterministically through the mode list") {
    testutil::TempDir dir;
    testutil::write_asset_tree(dir.path() / "assets", {.instances = 2,
                                                       .views_per_instance = 2,
                                                       .backgrounds = 2,
                                                       .background_w = 200,
                                                       .background_h = 160});
    RunConfig cfg;
    cfg.seed = 3;
    cfg.objects_dir = (dir.path() / "assets" / "objects").string();
    cfg.backgrounds_dir = (dir.path() / "assets" / "backgrounds").string();
    cfg.output_dir = (dir.path() / "out").string();
    cfg.num_scenes = 6;
    cfg.blend_modes = {"direct", "gaussian"};
    cfg.same_image_multiblend = false;
    cfg.augment.objects_per_scene = {1, 2};
    cfg.augment.distractors_per_scene = {0, 0};

    const SynthesisReport report = run_synthesize(cfg);
    CHECK(report.images_written == 6); // one image per scene

    const DatasetManifest manifest = DatasetManifest::load(report.manifest_path);
    REQUIRE(manifest.records.size() == 6);
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        CHECK(manifest.records[i].blend_mode == (i % 2 == 0 ? "direct" : "gaussian"));

    const VerifyReport verified = verify_dataset(cfg.output_dir);
    CHECK(verified.ok());
}

TEST_CASE("a manifest record-count mismatch raises CorruptDataset") {
    testutil::TempDir dir;
    testutil::write_asset_tree(dir.path() / "assets", {.instances = 2,
                                                       .views_per_instance = 2,
                                                       .backgrounds = 2,
                                                       .background_w = 200,
                                                       .background_h = 160});
    RunConfig cfg;
    cfg.seed = 8;
    cfg.objects_dir = (dir.path() / "assets" / "objects").string();
    cfg.backgrounds_dir = (dir.path() / "assets" / "backgrounds").string();
    cfg.output_dir = (dir.path() / "out").string();
    cfg.num_scenes = 2;
    cfg.blend_modes = {"direct"};
    cfg.augment.objects_per_scene = {1, 1};
    cfg.augment.distractors_per_scene = {0, 0};
    const SynthesisReport report = run_synthesize(cfg);

    DatasetManifest manifest = DatasetManifest::load(report.manifest_path);
    manifest.records.pop_back();
    manifest.write(report.manifest_path);
    CHECK_THROWS_AS(verify_dataset(cfg.output_dir), CorruptDataset);
}

TEST_CASE("png save/load round-trips both color and mask rasters") {
    testutil::TempDir dir;
    const Raster color = testutil::gradient_background(64, 48, 5);
    const auto color_path = dir.path() / "c.png";
    save_png(color_path.string(), color);
    CHECK(load_image(color_path.string(), 3) == color);

    const Raster mask = testutil::disk_mask(32, 32, 16, 16, 10);
    const auto mask_path = dir.path() / "m.png";
    save_png(mask_path.string(), mask);
    CHECK(load_image(mask_path.string(), 1) == mask);

    CHECK_THROWS_AS(load_image((dir.path() / "missing.png").string(), 3), UnreadableImage);
}
