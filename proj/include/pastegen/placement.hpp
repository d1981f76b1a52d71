#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pastegen/assets.hpp"
#include "pastegen/box.hpp"
#include "pastegen/rng.hpp"

namespace pastegen {

struct ConstraintConfig {
    double max_pair_iou = 0.75;
    double min_visible_fraction = 0.25;
    bool allow_truncation = true;
    bool allow_occlusion = true;
    int max_attempts_per_object = 100;

    double effective_max_pair_iou() const { return allow_occlusion ? max_pair_iou : 0.0; }
    double effective_min_visible_fraction() const {
        return allow_truncation ? min_visible_fraction : 1.0;
    }
    void validate() const;
};

struct IntInterval {
    int lo = 0;
    int hi = 0;
    friend bool operator==(const IntInterval&, const IntInterval&) = default;
};

struct AugmentConfig {
    double rotation_range = 30.0; // degrees, symmetric about zero
    double scale_min = 0.3;      // relative to the source cutout size
    double scale_max = 0.9;
    bool use_view_sampling = true; // off restricts every draw to the canonical view
    IntInterval objects_per_scene{3, 8};
    IntInterval distractors_per_scene{0, 3};

    void validate() const;
};

/// One pasted object, geometry only. `width`/`height` are the dimensions of
/// the transformed (tight) cutout, so the pasted box is reconstructible from
/// the blueprint alone, without touching pixels again.
struct Placement {
    std::string instance_label;
    std::string view_id;
    double scale = 1.0;
    double rotation = 0.0; // degrees, counter-clockwise
    int anchor_x = 0;      // top-left corner of the transformed cutout
    int anchor_y = 0;
    int width = 0;
    int height = 0;
    int z_order = 0; // 0 pasted first
    bool is_distractor = false;

    BoundingBox box() const {
        return BoundingBox{static_cast<double>(anchor_x), static_cast<double>(anchor_y),
                           static_cast<double>(anchor_x + width),
                           static_cast<double>(anchor_y + height)};
    }
};

/// A fully determined scene, independent of any blending mode.
struct SceneBlueprint {
    std::string blueprint_id;
    std::string background_ref;
    int canvas_w = 0;
    int canvas_h = 0;
    std::uint64_t scene_seed = 0;
    std::vector<Placement> placements;
};

struct BlueprintBox {
    std::string label;
    BoundingBox box; // clipped to the canvas
    bool is_distractor = false;
};

/// Draw rotation, scale and anchor until the candidate satisfies the
/// visibility and pairwise-IoU constraints against `existing` (unclipped
/// boxes of prior placements; the cap is enforced on both the clipped and
/// the unclipped pair). Throws PlacementExhausted after
/// max_attempts_per_object rejected draws.
Placement sample_placement(RngStream& rng, const std::vector<BoundingBox>& existing,
                           const Raster& cutout_alpha, int canvas_w, int canvas_h,
                           const AugmentConfig& aug, const ConstraintConfig& cons);

/// Draw object and distractor counts, instances, views and placements for
/// one scene. Objects that exhaust their placement attempts are dropped;
/// throws SceneUnsatisfiable only when no target object could be placed.
SceneBlueprint compose_blueprint(RngStream& rng, std::string blueprint_id,
                                 std::string background_ref, int canvas_w, int canvas_h,
                                 const AssetIndex& assets, const CutoutCache& cutouts,
                                 const AugmentConfig& aug, const ConstraintConfig& cons);

/// Placement boxes clipped to the canvas, in placement order.
std::vector<BlueprintBox> blueprint_boxes(const SceneBlueprint& bp);

/// Human-readable text form; the unit of comparison for the determinism
/// contract. parse(serialize(bp)) reproduces bp exactly.
std::string serialize_blueprint(const SceneBlueprint& bp);
SceneBlueprint parse_blueprint(const std::string& text);

} // namespace pastegen
