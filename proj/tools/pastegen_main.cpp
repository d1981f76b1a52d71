#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pastegen/assets.hpp"
#include "pastegen/config.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/evaluate.hpp"
#include "pastegen/image_io.hpp"
#include "pastegen/synthesize.hpp"
#include "pastegen/verify.hpp"

namespace fs = std::filesystem;
using namespace pastegen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // violations, failed extractions, corrupt input
constexpr int kExitUsage = 2;     // bad flags or config

int cmd_extract_masks(const std::string& objects_dir, const std::string& masks_out,
                      const MaskParams& params, bool skip_failures) {
    params.validate();
    int extracted = 0;
    int existing = 0;
    std::vector<std::string> failures;

    if (!fs::is_directory(objects_dir)) {
        std::cerr << "objects directory does not exist: " << objects_dir << "\n";
        return kExitUsage;
    }
    for (const auto& instance : fs::directory_iterator(objects_dir)) {
        if (!instance.is_directory())
            continue;
        const std::string label = instance.path().filename().string();
        for (const auto& file : fs::directory_iterator(instance.path())) {
            if (!file.is_regular_file())
                continue;
            std::string ext = file.path().extension().string();
            for (auto& c : ext)
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (ext != ".png" && ext != ".jpg" && ext != ".jpeg")
                continue;

            const fs::path mask_path =
                fs::path(masks_out) / label / (file.path().stem().string() + ".png");
            if (fs::exists(mask_path)) {
                ++existing;
                continue;
            }
            try {
                const Raster image = load_image(file.path().string(), 3);
                const Raster mask = extract_mask(image, params);
                fs::create_directories(mask_path.parent_path());
                save_png(mask_path.string(), mask);
                ++extracted;
            } catch (const Error& e) {
                failures.push_back(file.path().string() + ": " + e.what());
            }
        }
    }

    std::cout << "extract-masks: extracted=" << extracted << " existing=" << existing
              << " failed=" << failures.size() << "\n";
    if (failures.empty())
        return kExitOk;
    if (skip_failures) {
        fs::create_directories(masks_out);
        const fs::path report = fs::path(masks_out) / "failures.txt";
        std::ofstream out(report);
        for (const auto& line : failures)
            out << line << "\n";
        std::cout << "failures listed in " << report.string() << "\n";
        return kExitOk;
    }
    for (const auto& line : failures)
        std::cerr << line << "\n";
    return kExitFailure;
}

int cmd_synthesize(const std::string& config_path, int workers_override,
                   std::uint64_t seed_override, bool has_seed_override) {
    RunConfig cfg = RunConfig::from_file(config_path);
    if (workers_override > 0)
        cfg.workers = workers_override;
    if (has_seed_override)
        cfg.seed = seed_override;
    cfg.validate();

    const SynthesisReport report = run_synthesize(cfg, &std::cout);
    std::cout << "synthesize: scenes=" << report.scenes_rendered << "/"
              << report.scenes_requested << " images=" << report.images_written
              << " failed=" << report.scenes_failed << "\n";
    std::cout << "manifest: " << report.manifest_path << " sha256="
              << report.manifest_sha256 << "\n";
    if (report.scenes_failed > cfg.max_scene_failures) {
        std::cerr << report.scenes_failed << " unsatisfiable scenes exceed the budget of "
                  << cfg.max_scene_failures << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_verify(const std::string& dataset_dir) {
    const VerifyReport report = verify_dataset(dataset_dir);
    std::cout << format_verify(report);
    return report.ok() ? kExitOk : kExitFailure;
}

int cmd_stats(const std::string& dataset_dir) {
    std::cout << format_stats(dataset_stats(dataset_dir));
    return kExitOk;
}

int cmd_evaluate(const std::string& dataset_dir, const std::string& detections_file,
                 const EvalConfig& cfg) {
    const std::string gt_path =
        (fs::path(dataset_dir) / "annotations" / "coco.json").string();
    const ApResult result = evaluate_files(gt_path, detections_file, cfg);
    std::cout << format_ap_table(result);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthesize, verify and evaluate cut-and-paste detection datasets"};
    app.require_subcommand(1);

    // extract-masks
    auto* extract = app.add_subcommand(
        "extract-masks", "Extract foreground masks for object images that lack one");
    std::string objects_dir, masks_out;
    MaskParams mask_params;
    bool skip_failures = false;
    extract->add_option("--objects", objects_dir, "Objects directory")->required();
    extract->add_option("--masks-out", masks_out, "Output masks directory")->required();
    extract->add_option("--border-width", mask_params.border_width,
                        "Background-estimation border width");
    extract->add_option("--color-threshold", mask_params.color_threshold,
                        "RGB distance threshold");
    extract->add_option("--morph-radius", mask_params.morph_radius,
                        "Open/close structuring radius");
    bool no_fill = false;
    extract->add_flag("--no-fill-holes", no_fill, "Keep enclosed holes");
    extract->add_flag("--skip-failures", skip_failures,
                      "List failed images in a report instead of failing");

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "Generate a dataset from a config file");
    std::string config_path;
    int workers = 0;
    std::uint64_t seed = 0;
    synth->add_option("--config", config_path, "Run configuration (JSON)")->required();
    synth->add_option("--workers", workers, "Worker threads (overrides config)");
    auto* seed_opt = synth->add_option("--seed", seed, "Master seed (overrides config)");

    // verify
    auto* verify = app.add_subcommand("verify", "Re-check a generated dataset");
    std::string verify_dir;
    verify->add_option("dataset", verify_dir, "Dataset directory")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Dataset composition statistics");
    std::string stats_dir;
    stats->add_option("dataset", stats_dir, "Dataset directory")->required();

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score COCO-style detection results against the dataset");
    std::string eval_dir, detections_file, interpolation = "allpoint";
    EvalConfig eval_cfg;
    evaluate->add_option("dataset", eval_dir, "Dataset directory")->required();
    evaluate->add_option("detections", detections_file, "Detections JSON file")->required();
    evaluate->add_option("--interpolation", interpolation, "allpoint or voc11")
        ->check(CLI::IsMember({"allpoint", "voc11"}));
    evaluate->add_option("--iou-threshold", eval_cfg.iou_threshold, "Matching IoU");
    evaluate->add_option("--min-box-width", eval_cfg.min_box_width,
                         "Ground-truth width filter");
    evaluate->add_option("--min-box-height", eval_cfg.min_box_height,
                         "Ground-truth height filter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*extract) {
            mask_params.fill_holes = !no_fill;
            return cmd_extract_masks(objects_dir, masks_out, mask_params, skip_failures);
        }
        if (*synth)
            return cmd_synthesize(config_path, workers, seed, seed_opt->count() > 0);
        if (*verify)
            return cmd_verify(verify_dir);
        if (*stats)
            return cmd_stats(stats_dir);
        if (*evaluate) {
            eval_cfg.interpolation = interpolation == "voc11" ? EvalConfig::Interp::Voc11
                                                              : EvalConfig::Interp::AllPoint;
            return cmd_evaluate(eval_dir, detections_file, eval_cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CorruptDataset& e) {
        std::cerr << "corrupt dataset: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
