#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pastegen/blending.hpp"
#include "pastegen/mask_extract.hpp"
#include "pastegen/placement.hpp"

namespace pastegen {

/// Declarative run configuration. Every field has a documented default and
/// unknown keys are a hard error. The fully-resolved form is echoed into the
/// dataset manifest; `workers` is execution machinery and deliberately not
/// part of the echo, so the manifest is invariant to the worker count.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string objects_dir;
    std::string backgrounds_dir;
    std::string masks_dir; // empty -> sibling "masks" directory of objects_dir
    std::string output_dir = "out";
    std::vector<std::string> distractor_labels;

    int num_scenes = 0; // 0 -> backgrounds * background_reuse
    int background_reuse = 4;
    std::vector<std::string> blend_modes{"direct", "gaussian", "poisson"};
    bool same_image_multiblend = true;
    std::vector<std::string> formats{"voc", "coco"};

    double gaussian_sigma = 2.0;
    double poisson_tolerance = 1e-6;
    int poisson_max_iters = 10000;
    int max_scene_failures = 0;
    int workers = 1;

    AugmentConfig augment;
    ConstraintConfig constraints;
    MaskParams mask_params;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);

    /// Fully-resolved echo (defaults filled in), without `workers`.
    nlohmann::json to_json() const;

    std::vector<BlendMode> blend_mode_list() const;
    bool wants_format(const std::string& name) const;
    void validate() const;
};

} // namespace pastegen
