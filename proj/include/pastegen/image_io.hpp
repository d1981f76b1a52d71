#pragma once

#include <string>

#include "pastegen/raster.hpp"

namespace pastegen {

/// Decode a PNG or JPEG file into a raster with the requested channel count
/// (1 = grayscale, 3 = RGB). Throws UnreadableImage with the path on failure.
Raster load_image(const std::string& path, int channels);

/// Write a raster as PNG (grayscale or RGB). Throws IoError on failure.
void save_png(const std::string& path, const Raster& img);

} // namespace pastegen
