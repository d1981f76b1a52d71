#pragma once

#include <array>

#include "pastegen/raster.hpp"

namespace pastegen {

/// Knobs for classical foreground extraction from shots against a
/// near-uniform background.
struct MaskParams {
    int border_width = 10;         // frame used to estimate the background color
    double color_threshold = 30.0; // Euclidean RGB distance, 8-bit space
    int morph_radius = 2;          // disk radius for open+close cleanup
    bool fill_holes = true;

    void validate() const;
};

struct BorderStats {
    std::array<double, 3> mean;
    std::array<double, 3> stddev;
};

/// Mean and per-channel standard deviation over the border frame of the
/// stated width. Throws BadBorder when the frame would cover the whole image.
BorderStats estimate_background_color(const Raster& img, int border_width);

/// Threshold on Euclidean RGB distance from the estimated background color,
/// then open+close, then largest 4-connected component, then hole filling.
/// Output samples are 0 or 255. Throws NoForeground when nothing survives.
Raster extract_mask(const Raster& img, const MaskParams& params = {});

/// Morphological open then close with a disk structuring element.
/// Radius 0 is the identity. Throws MaskVanished when the result is empty.
Raster refine_mask(const Raster& mask, int morph_radius);

// Building blocks, exposed for tests and the verifier.
Raster morph_dilate(const Raster& mask, int radius);
Raster morph_erode(const Raster& mask, int radius);
Raster largest_component_4conn(const Raster& mask);
Raster fill_enclosed_holes(const Raster& mask);
int count_foreground(const Raster& mask);

} // namespace pastegen
