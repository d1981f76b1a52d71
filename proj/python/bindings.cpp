#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pastegen/blending.hpp"
#include "pastegen/box.hpp"
#include "pastegen/config.hpp"
#include "pastegen/cutout.hpp"
#include "pastegen/errors.hpp"
#include "pastegen/evaluate.hpp"
#include "pastegen/mask_extract.hpp"
#include "pastegen/rng.hpp"
#include "pastegen/synthesize.hpp"
#include "pastegen/verify.hpp"

namespace py = pybind11;
using namespace pastegen;

namespace {

Raster raster_from_array(const py::array_t<std::uint8_t, py::array::c_style |
                                                             py::array::forcecast>& arr) {
    if (arr.ndim() == 2) {
        Raster out(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)), 1);
        std::memcpy(out.data().data(), arr.data(), out.data().size());
        return out;
    }
    if (arr.ndim() == 3 && arr.shape(2) == 3) {
        Raster out(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)), 3);
        std::memcpy(out.data().data(), arr.data(), out.data().size());
        return out;
    }
    throw py::value_error("expected a HxW (mask) or HxWx3 (color) uint8 array");
}

py::array_t<std::uint8_t> array_from_raster(const Raster& raster) {
    py::array_t<std::uint8_t> out;
    if (raster.channels() == 1)
        out = py::array_t<std::uint8_t>({raster.height(), raster.width()});
    else
        out = py::array_t<std::uint8_t>({raster.height(), raster.width(), 3});
    std::memcpy(out.mutable_data(), raster.data().data(), raster.data().size());
    return out;
}

BoundingBox box_from_tuple(const std::tuple<double, double, double, double>& t) {
    return BoundingBox{std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
}

Cutout cutout_from_arrays(const py::array_t<std::uint8_t, py::array::c_style |
                                                              py::array::forcecast>& color,
                          const py::array_t<std::uint8_t, py::array::c_style |
                                                              py::array::forcecast>& alpha) {
    return make_cutout(raster_from_array(color), raster_from_array(alpha), "object", "view");
}

EvalConfig::Interp interp_from_name(const std::string& name) {
    if (name == "allpoint")
        return EvalConfig::Interp::AllPoint;
    if (name == "voc11")
        return EvalConfig::Interp::Voc11;
    throw py::value_error("interpolation must be 'allpoint' or 'voc11'");
}

py::dict stats_dict(const PasteStats& stats) {
    py::dict out;
    out["solves"] = stats.solves;
    out["iterations"] = stats.iterations;
    out["max_residual"] = stats.max_residual;
    out["unconverged"] = stats.unconverged;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cut-and-paste dataset synthesis: compositing, placement and evaluation";

    py::register_exception<Error>(m, "PastegenError");

    m.def(
        "iou",
        [](const std::tuple<double, double, double, double>& a,
           const std::tuple<double, double, double, double>& b) {
            return iou(box_from_tuple(a), box_from_tuple(b));
        },
        py::arg("a"), py::arg("b"),
        "IoU of two (xmin, ymin, xmax, ymax) boxes in the half-open convention");

    m.def(
        "visible_fraction",
        [](const std::tuple<double, double, double, double>& box, int canvas_w,
           int canvas_h) {
            return visible_fraction(box_from_tuple(box), canvas_w, canvas_h);
        },
        py::arg("box"), py::arg("canvas_w"), py::arg("canvas_h"));

    m.def("derive_scene_seed", &derive_scene_seed, py::arg("master_seed"),
          py::arg("scene_index"),
          "Deterministic 64-bit seed for one scene of a run");

    m.def(
        "transform_cutout",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& color,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& alpha,
           double scale, double rotation) {
            const Cutout out = transform_cutout(cutout_from_arrays(color, alpha), scale,
                                                rotation);
            return py::make_tuple(array_from_raster(out.color), array_from_raster(out.alpha));
        },
        py::arg("color"), py::arg("alpha"), py::arg("scale"), py::arg("rotation"),
        "Rotate (ccw degrees) and scale a cutout; returns tight (color, alpha)");

    m.def(
        "estimate_background_color",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
           int border_width) {
            const BorderStats stats =
                estimate_background_color(raster_from_array(image), border_width);
            return py::make_tuple(stats.mean, stats.stddev);
        },
        py::arg("image"), py::arg("border_width") = 10);

    m.def(
        "extract_mask",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
           int border_width, double color_threshold, int morph_radius, bool fill_holes) {
            MaskParams params;
            params.border_width = border_width;
            params.color_threshold = color_threshold;
            params.morph_radius = morph_radius;
            params.fill_holes = fill_holes;
            return array_from_raster(extract_mask(raster_from_array(image), params));
        },
        py::arg("image"), py::arg("border_width") = 10, py::arg("color_threshold") = 30.0,
        py::arg("morph_radius") = 2, py::arg("fill_holes") = true,
        "Classical foreground mask from a shot against a near-uniform background");

    m.def(
        "paste_direct",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bg,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& color,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& alpha,
           int x, int y) {
            return array_from_raster(paste_direct(raster_from_array(bg),
                                                  cutout_from_arrays(color, alpha), x, y));
        },
        py::arg("background"), py::arg("color"), py::arg("alpha"), py::arg("x"),
        py::arg("y"));

    m.def(
        "paste_gaussian",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bg,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& color,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& alpha,
           int x, int y, double sigma) {
            return array_from_raster(paste_gaussian(
                raster_from_array(bg), cutout_from_arrays(color, alpha), x, y, sigma));
        },
        py::arg("background"), py::arg("color"), py::arg("alpha"), py::arg("x"),
        py::arg("y"), py::arg("sigma") = 2.0);

    m.def(
        "paste_poisson",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bg,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& color,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& alpha,
           int x, int y, double tolerance, int max_iters) {
            PasteStats stats;
            const Raster out =
                paste_poisson(raster_from_array(bg), cutout_from_arrays(color, alpha), x, y,
                              tolerance, max_iters, &stats);
            return py::make_tuple(array_from_raster(out), stats_dict(stats));
        },
        py::arg("background"), py::arg("color"), py::arg("alpha"), py::arg("x"),
        py::arg("y"), py::arg("tolerance") = 1e-6, py::arg("max_iters") = 10000,
        "Gradient-domain paste; returns (image, solver stats)");

    m.def(
        "average_precision",
        [](const std::vector<std::pair<double, bool>>& scored_flags, int num_gt,
           const std::string& interpolation) {
            std::vector<ScoredFlag> flags;
            flags.reserve(scored_flags.size());
            for (const auto& [score, tp] : scored_flags)
                flags.push_back(ScoredFlag{score, tp});
            return average_precision(flags, num_gt, interp_from_name(interpolation));
        },
        py::arg("scored_flags"), py::arg("num_gt"), py::arg("interpolation") = "allpoint",
        "AP from (score, is_tp) pairs and the ground-truth count");

    m.def(
        "synthesize",
        [](const std::string& config_path, int workers, py::object seed) {
            RunConfig cfg = RunConfig::from_file(config_path);
            if (workers > 0)
                cfg.workers = workers;
            if (!seed.is_none())
                cfg.seed = seed.cast<std::uint64_t>();
            const SynthesisReport report = run_synthesize(cfg);
            py::dict out;
            out["scenes_requested"] = report.scenes_requested;
            out["scenes_rendered"] = report.scenes_rendered;
            out["scenes_failed"] = report.scenes_failed;
            out["images_written"] = report.images_written;
            out["manifest_path"] = report.manifest_path;
            out["manifest_sha256"] = report.manifest_sha256;
            return out;
        },
        py::arg("config_path"), py::arg("workers") = 0, py::arg("seed") = py::none(),
        "Run the full generation pipeline for a config file");

    m.def(
        "verify",
        [](const std::string& dataset_dir) {
            const VerifyReport report = verify_dataset(dataset_dir);
            py::list out;
            for (const auto& v : report.violations) {
                py::dict entry;
                entry["scene_id"] = v.scene_id;
                entry["message"] = v.message;
                out.append(entry);
            }
            return out;
        },
        py::arg("dataset_dir"), "Violations found by the dataset verifier (empty = clean)");

    m.def(
        "stats",
        [](const std::string& dataset_dir) {
            const StatsReport stats = dataset_stats(dataset_dir);
            py::dict out;
            out["scenes"] = stats.scenes;
            out["images"] = stats.images;
            out["placements"] = stats.placements;
            out["distractor_placements"] = stats.distractor_placements;
            out["background_usage"] = stats.background_usage;
            out["instance_frequency"] = stats.instance_frequency;
            out["distractor_frequency"] = stats.distractor_frequency;
            out["box_scale_histogram"] = stats.box_scale_histogram;
            out["occlusion_histogram"] = stats.occlusion_histogram;
            return out;
        },
        py::arg("dataset_dir"));

    m.def(
        "evaluate",
        [](const std::string& dataset_dir, const std::string& detections_path,
           const std::string& interpolation, double iou_threshold) {
            EvalConfig cfg;
            cfg.interpolation = interp_from_name(interpolation);
            cfg.iou_threshold = iou_threshold;
            const ApResult result = evaluate_files(
                dataset_dir + "/annotations/coco.json", detections_path, cfg);
            py::dict out;
            out["per_class"] = result.per_class;
            out["mAP"] = result.map;
            out["skipped"] = result.skipped;
            return out;
        },
        py::arg("dataset_dir"), py::arg("detections_path"),
        py::arg("interpolation") = "allpoint", py::arg("iou_threshold") = 0.5);
}
