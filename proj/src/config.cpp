#include "pastegen/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::string& scope,
                const std::set<std::string>& allowed) {
    if (!j.is_object())
        throw ConfigError("config section '" + scope + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown config key '" +
                              (scope.empty() ? key : scope + "." + key) + "'");
    }
}

template <typename T>
void read_field(const json& j, const std::string& key, T& out) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

void read_interval(const json& j, const std::string& key, IntInterval& out) {
    if (!j.contains(key))
        return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
        !v[1].is_number_integer())
        throw ConfigError("config key '" + key + "' must be a [lo, hi] integer pair");
    out.lo = v[0].get<int>();
    out.hi = v[1].get<int>();
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    check_keys(j, "",
               {"seed", "objects_dir", "backgrounds_dir", "masks_dir", "output_dir",
                "distractor_labels", "num_scenes", "background_reuse", "blend_modes",
                "same_image_multiblend", "formats", "gaussian_sigma", "poisson_tolerance",
                "poisson_max_iters", "max_scene_failures", "workers", "augment",
                "constraints", "mask_params"});

    RunConfig cfg;
    read_field(j, "seed", cfg.seed);
    read_field(j, "objects_dir", cfg.objects_dir);
    read_field(j, "backgrounds_dir", cfg.backgrounds_dir);
    read_field(j, "masks_dir", cfg.masks_dir);
    read_field(j, "output_dir", cfg.output_dir);
    read_field(j, "distractor_labels", cfg.distractor_labels);
    read_field(j, "num_scenes", cfg.num_scenes);
    read_field(j, "background_reuse", cfg.background_reuse);
    read_field(j, "blend_modes", cfg.blend_modes);
    read_field(j, "same_image_multiblend", cfg.same_image_multiblend);
    read_field(j, "formats", cfg.formats);
    read_field(j, "gaussian_sigma", cfg.gaussian_sigma);
    read_field(j, "poisson_tolerance", cfg.poisson_tolerance);
    read_field(j, "poisson_max_iters", cfg.poisson_max_iters);
    read_field(j, "max_scene_failures", cfg.max_scene_failures);
    read_field(j, "workers", cfg.workers);

    if (j.contains("augment")) {
        const auto& a = j.at("augment");
        check_keys(a, "augment",
                   {"rotation_range", "scale_min", "scale_max", "use_view_sampling",
                    "objects_per_scene", "distractors_per_scene"});
        read_field(a, "rotation_range", cfg.augment.rotation_range);
        read_field(a, "scale_min", cfg.augment.scale_min);
        read_field(a, "scale_max", cfg.augment.scale_max);
        read_field(a, "use_view_sampling", cfg.augment.use_view_sampling);
        read_interval(a, "objects_per_scene", cfg.augment.objects_per_scene);
        read_interval(a, "distractors_per_scene", cfg.augment.distractors_per_scene);
    }
    if (j.contains("constraints")) {
        const auto& c = j.at("constraints");
        check_keys(c, "constraints",
                   {"max_pair_iou", "min_visible_fraction", "allow_truncation",
                    "allow_occlusion", "max_attempts_per_object"});
        read_field(c, "max_pair_iou", cfg.constraints.max_pair_iou);
        read_field(c, "min_visible_fraction", cfg.constraints.min_visible_fraction);
        read_field(c, "allow_truncation", cfg.constraints.allow_truncation);
        read_field(c, "allow_occlusion", cfg.constraints.allow_occlusion);
        read_field(c, "max_attempts_per_object", cfg.constraints.max_attempts_per_object);
    }
    if (j.contains("mask_params")) {
        const auto& m = j.at("mask_params");
        check_keys(m, "mask_params",
                   {"border_width", "color_threshold", "morph_radius", "fill_holes"});
        read_field(m, "border_width", cfg.mask_params.border_width);
        read_field(m, "color_threshold", cfg.mask_params.color_threshold);
        read_field(m, "morph_radius", cfg.mask_params.morph_radius);
        read_field(m, "fill_holes", cfg.mask_params.fill_holes);
    }

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["objects_dir"] = objects_dir;
    j["backgrounds_dir"] = backgrounds_dir;
    j["masks_dir"] = masks_dir;
    j["output_dir"] = output_dir;
    j["distractor_labels"] = distractor_labels;
    j["num_scenes"] = num_scenes;
    j["background_reuse"] = background_reuse;
    j["blend_modes"] = blend_modes;
    j["same_image_multiblend"] = same_image_multiblend;
    j["formats"] = formats;
    j["gaussian_sigma"] = gaussian_sigma;
    j["poisson_tolerance"] = poisson_tolerance;
    j["poisson_max_iters"] = poisson_max_iters;
    j["max_scene_failures"] = max_scene_failures;
    j["augment"] = {{"rotation_range", augment.rotation_range},
                    {"scale_min", augment.scale_min},
                    {"scale_max", augment.scale_max},
                    {"use_view_sampling", augment.use_view_sampling},
                    {"objects_per_scene", {augment.objects_per_scene.lo,
                                           augment.objects_per_scene.hi}},
                    {"distractors_per_scene", {augment.distractors_per_scene.lo,
                                               augment.distractors_per_scene.hi}}};
    j["constraints"] = {{"max_pair_iou", constraints.max_pair_iou},
                        {"min_visible_fraction", constraints.min_visible_fraction},
                        {"allow_truncation", constraints.allow_truncation},
                        {"allow_occlusion", constraints.allow_occlusion},
                        {"max_attempts_per_object", constraints.max_attempts_per_object}};
    j["mask_params"] = {{"border_width", mask_params.border_width},
                        {"color_threshold", mask_params.color_threshold},
                        {"morph_radius", mask_params.morph_radius},
                        {"fill_holes", mask_params.fill_holes}};
    return j;
}

std::vector<BlendMode> RunConfig::blend_mode_list() const {
    std::vector<BlendMode> modes;
    for (const auto& name : blend_modes) {
        if (name == "direct")
            modes.push_back(BlendMode::direct());
        else if (name == "gaussian")
            modes.push_back(BlendMode::gaussian(gaussian_sigma));
        else if (name == "poisson")
            modes.push_back(BlendMode::poisson(poisson_tolerance, poisson_max_iters));
        else
            throw ConfigError("unknown blend mode '" + name +
                              "' (expected direct, gaussian or poisson)");
        modes.back().validate();
    }
    return modes;
}

bool RunConfig::wants_format(const std::string& name) const {
    return std::find(formats.begin(), formats.end(), name) != formats.end();
}

void RunConfig::validate() const {
    if (num_scenes < 0)
        throw ConfigError("num_scenes must be >= 0 (0 derives it from the backgrounds)");
    if (background_reuse < 1)
        throw ConfigError("background_reuse must be >= 1");
    if (blend_modes.empty())
        throw ConfigError("blend_modes must be non-empty");
    if (max_scene_failures < 0)
        throw ConfigError("max_scene_failures must be >= 0");
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
    for (const auto& f : formats)
        if (f != "voc" && f != "coco")
            throw ConfigError("unknown output format '" + f + "'");
    blend_mode_list();
    augment.validate();
    constraints.validate();
    mask_params.validate();
}

} // namespace pastegen
