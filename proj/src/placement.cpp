#include "pastegen/placement.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool pair_iou_ok(const BoundingBox& candidate, const std::vector<BoundingBox>& existing,
                 int canvas_w, int canvas_h, double max_iou) {
    const BoundingBox cand_clipped = clip_to_canvas(candidate, canvas_w, canvas_h);
    for (const auto& other : existing) {
        if (iou(candidate, other) > max_iou)
            return false;
        const BoundingBox other_clipped = clip_to_canvas(other, canvas_w, canvas_h);
        if (cand_clipped.valid() && other_clipped.valid() &&
            iou(cand_clipped, other_clipped) > max_iou)
            return false;
    }
    return true;
}

} // namespace

void ConstraintConfig::validate() const {
    if (!(max_pair_iou >= 0.0 && max_pair_iou <= 1.0))
        throw ConfigError("constraints.max_pair_iou must be in [0, 1]");
    if (!(min_visible_fraction > 0.0 && min_visible_fraction <= 1.0))
        throw ConfigError("constraints.min_visible_fraction must be in (0, 1]");
    if (max_attempts_per_object < 1)
        throw ConfigError("constraints.max_attempts_per_object must be >= 1");
}

void AugmentConfig::validate() const {
    if (rotation_range < 0.0)
        throw ConfigError("augment.rotation_range must be >= 0");
    if (!(scale_min > 0.0 && scale_max >= scale_min))
        throw ConfigError("augment.scale_range must be positive and ordered");
    if (objects_per_scene.lo < 1 || objects_per_scene.hi < objects_per_scene.lo)
        throw ConfigError("augment.objects_per_scene must be a non-empty interval with lo >= 1");
    if (distractors_per_scene.lo < 0 || distractors_per_scene.hi < distractors_per_scene.lo)
        throw ConfigError("augment.distractors_per_scene must be a non-empty interval");
}

Placement sample_placement(RngStream& rng, const std::vector<BoundingBox>& existing,
                           const Raster& cutout_alpha, int canvas_w, int canvas_h,
                           const AugmentConfig& aug, const ConstraintConfig& cons) {
    if (canvas_w < 32 || canvas_h < 32)
        throw Error("sample_placement: canvas must be at least 32x32");

    const double min_vis = cons.effective_min_visible_fraction();
    const double max_iou = cons.effective_max_pair_iou();

    for (int attempt = 0; attempt < cons.max_attempts_per_object; ++attempt) {
        // Fixed draw order per attempt: rotation, scale, anchor_x, anchor_y.
        const double rotation = rng.uniform(-aug.rotation_range, aug.rotation_range);
        const double scale = rng.uniform(aug.scale_min, aug.scale_max);

        const Raster transformed = transform_alpha(cutout_alpha, scale, rotation);
        const auto tight = mask_tight_box(transformed);
        if (!tight)
            continue; // degenerate transform, counts as a rejected attempt

        const int tw = static_cast<int>(tight->width());
        const int th = static_cast<int>(tight->height());

        // Candidate anchors keep at least one pixel of the box on canvas;
        // the visibility constraint then rejects the rest.
        const int ax = static_cast<int>(rng.uniform_int(1 - tw, canvas_w - 1));
        const int ay = static_cast<int>(rng.uniform_int(1 - th, canvas_h - 1));

        const BoundingBox box{static_cast<double>(ax), static_cast<double>(ay),
                              static_cast<double>(ax + tw), static_cast<double>(ay + th)};
        if (visible_fraction(box, canvas_w, canvas_h) < min_vis)
            continue;
        const BoundingBox clipped = clip_to_canvas(box, canvas_w, canvas_h);
        if (!(clipped.width() >= 1.0 && clipped.height() >= 1.0))
            continue;
        if (!pair_iou_ok(box, existing, canvas_w, canvas_h, max_iou))
            continue;

        Placement p;
        p.scale = scale;
        p.rotation = rotation;
        p.anchor_x = ax;
        p.anchor_y = ay;
        p.width = tw;
        p.height = th;
        return p;
    }
    throw PlacementExhausted("no admissible placement after " +
                             std::to_string(cons.max_attempts_per_object) + " attempts");
}

SceneBlueprint compose_blueprint(RngStream& rng, std::string blueprint_id,
                                 std::string background_ref, int canvas_w, int canvas_h,
                                 const AssetIndex& assets, const CutoutCache& cutouts,
                                 const AugmentConfig& aug, const ConstraintConfig& cons) {
    aug.validate();
    cons.validate();

    const std::vector<std::string> targets = assets.target_labels();
    if (targets.empty())
        throw EmptyAssets("compose_blueprint: no target instances in the asset index");
    const std::vector<std::string> distractors = assets.distractor_label_list();

    const int n_objects =
        static_cast<int>(rng.uniform_int(aug.objects_per_scene.lo, aug.objects_per_scene.hi));
    const int n_distractors =
        distractors.empty()
            ? 0
            : static_cast<int>(rng.uniform_int(aug.distractors_per_scene.lo,
                                               aug.distractors_per_scene.hi));

    SceneBlueprint bp;
    bp.blueprint_id = std::move(blueprint_id);
    bp.background_ref = std::move(background_ref);
    bp.canvas_w = canvas_w;
    bp.canvas_h = canvas_h;

    std::vector<BoundingBox> existing;
    auto place_one = [&](const std::vector<std::string>& pool, bool is_distractor) {
        const std::string& label = pool[rng.uniform_index(pool.size())];
        const auto& views = assets.objects.at(label);
        const std::string& view_id =
            aug.use_view_sampling ? views[rng.uniform_index(views.size())].view_id
                                  : views.front().view_id; // canonical: first sorted view
        const auto cutout = cutouts.get(label, view_id);
        try {
            Placement p = sample_placement(rng, existing, cutout->alpha, canvas_w, canvas_h,
                                           aug, cons);
            p.instance_label = label;
            p.view_id = view_id;
            p.is_distractor = is_distractor;
            p.z_order = static_cast<int>(bp.placements.size());
            existing.push_back(p.box());
            bp.placements.push_back(std::move(p));
        } catch (const PlacementExhausted&) {
            // Dropped; the scene fails only if no target object lands at all.
        }
    };

    for (int i = 0; i < n_objects; ++i)
        place_one(targets, false);
    for (int i = 0; i < n_distractors; ++i)
        place_one(distractors, true);

    bool any_target = false;
    for (const auto& p : bp.placements)
        any_target |= !p.is_distractor;
    if (!any_target)
        throw SceneUnsatisfiable("no target object could be placed in scene " +
                                 bp.blueprint_id);
    return bp;
}

std::vector<BlueprintBox> blueprint_boxes(const SceneBlueprint& bp) {
    std::vector<BlueprintBox> out;
    out.reserve(bp.placements.size());
    for (const auto& p : bp.placements) {
        BlueprintBox entry;
        entry.label = p.instance_label;
        entry.box = clip_to_canvas(p.box(), bp.canvas_w, bp.canvas_h);
        entry.is_distractor = p.is_distractor;
        out.push_back(std::move(entry));
    }
    return out;
}

std::string serialize_blueprint(const SceneBlueprint& bp) {
    std::ostringstream out;
    out << "pastegen-blueprint v1\n";
    out << "blueprint_id: " << bp.blueprint_id << "\n";
    out << "background: " << bp.background_ref << "\n";
    out << "canvas: " << bp.canvas_w << " " << bp.canvas_h << "\n";
    out << "scene_seed: " << bp.scene_seed << "\n";
    out << "placements: " << bp.placements.size() << "\n";
    for (const auto& p : bp.placements) {
        out << "placement: " << p.z_order << " " << p.instance_label << " " << p.view_id
            << " " << format_double(p.scale) << " " << format_double(p.rotation) << " "
            << p.anchor_x << " " << p.anchor_y << " " << p.width << " " << p.height << " "
            << (p.is_distractor ? 1 : 0) << "\n";
    }
    return out.str();
}

SceneBlueprint parse_blueprint(const std::string& text) {
    std::istringstream in(text);
    std::string line;

    auto fail = [](const std::string& why) -> void {
        throw Error("blueprint parse error: " + why);
    };
    auto expect_value = [&](const std::string& key) -> std::string {
        if (!std::getline(in, line))
            fail("missing line for " + key);
        const std::string prefix = key + ": ";
        if (line.rfind(prefix, 0) != 0)
            fail("expected '" + key + ":' got '" + line + "'");
        return line.substr(prefix.size());
    };

    if (!std::getline(in, line) || line != "pastegen-blueprint v1")
        fail("bad header");

    SceneBlueprint bp;
    bp.blueprint_id = expect_value("blueprint_id");
    bp.background_ref = expect_value("background");
    {
        std::istringstream v(expect_value("canvas"));
        if (!(v >> bp.canvas_w >> bp.canvas_h))
            fail("bad canvas line");
    }
    bp.scene_seed = std::strtoull(expect_value("scene_seed").c_str(), nullptr, 10);
    const std::size_t count = std::strtoull(expect_value("placements").c_str(), nullptr, 10);

    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream v(expect_value("placement"));
        Placement p;
        int distractor_flag = 0;
        if (!(v >> p.z_order >> p.instance_label >> p.view_id >> p.scale >> p.rotation >>
              p.anchor_x >> p.anchor_y >> p.width >> p.height >> distractor_flag))
            fail("bad placement line " + std::to_string(i));
        p.is_distractor = distractor_flag != 0;
        bp.placements.push_back(std::move(p));
    }
    return bp;
}

} // namespace pastegen
