#pragma once

#include <optional>
#include <string>

#include "pastegen/box.hpp"
#include "pastegen/raster.hpp"

namespace pastegen {

/// One segmented object view: color raster plus a binary alpha mask of the
/// same size, stored tight (the mask touches all four canvas edges).
struct Cutout {
    Raster color;       // 3 channels
    Raster alpha;       // 1 channel, samples are 0 or 255
    std::string instance_label;
    std::string view_id;
};

/// Tight bounding box of {alpha > 0}, or nullopt for an empty mask.
/// Integer pixel box in the half-open convention.
std::optional<BoundingBox> mask_tight_box(const Raster& alpha);

/// Crop color+alpha to the mask's tight box and validate the Cutout
/// invariants. Throws if the mask is empty or dimensions disagree.
Cutout make_cutout(const Raster& color, const Raster& alpha,
                   std::string instance_label, std::string view_id);

/// Canvas size of transform_cutout's intermediate (pre-crop) raster:
/// the ceil'ed bounding box of the rotated, scaled source canvas.
void transformed_canvas_dims(int w, int h, double scale, double rotation_deg,
                             int& out_w, int& out_h);

/// Transformed alpha mask on the intermediate canvas: bilinear resample
/// (zero outside the source), rounded, then thresholded at 128.
Raster transform_alpha(const Raster& alpha, double scale, double rotation_deg);

/// Rotate about the cutout center (counter-clockwise, degrees) then scale.
/// Color is resampled bilinearly with edge-clamp addressing; alpha is
/// resampled bilinearly and re-binarized at 128. Output is cropped to the
/// tight box of the transformed mask.
/// Throws DegenerateTransform when no foreground pixel survives.
Cutout transform_cutout(const Cutout& c, double scale, double rotation_deg);

} // namespace pastegen
