#include "pastegen/mask_extract.hpp"

#include <cmath>
#include <vector>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

// Disk structuring element offsets: {(dx,dy) : dx^2+dy^2 <= r^2}.
std::vector<std::pair<int, int>> disk_offsets(int radius) {
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius)
                offsets.emplace_back(dx, dy);
    return offsets;
}

Raster morph_apply(const Raster& mask, int radius, bool dilate) {
    if (radius <= 0)
        return mask;
    const auto offsets = disk_offsets(radius);
    Raster out(mask.width(), mask.height(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool hit = dilate ? false : true;
            for (const auto& [dx, dy] : offsets) {
                const int nx = x + dx;
                const int ny = y + dy;
                // Outside the canvas counts as background.
                const bool fg = mask.contains(nx, ny) && mask.at(nx, ny) > 0;
                if (dilate) {
                    if (fg) { hit = true; break; }
                } else {
                    if (!fg) { hit = false; break; }
                }
            }
            out.at(x, y) = hit ? 255 : 0;
        }
    }
    return out;
}

} // namespace

void MaskParams::validate() const {
    if (border_width < 1)
        throw ConfigError("mask_params.border_width must be >= 1");
    if (!(color_threshold >= 1.0 && color_threshold <= 441.0))
        throw ConfigError("mask_params.color_threshold must be in [1, 441]");
    if (morph_radius < 0)
        throw ConfigError("mask_params.morph_radius must be >= 0");
}

BorderStats estimate_background_color(const Raster& img, int border_width) {
    if (img.channels() != 3)
        throw Error("estimate_background_color: expects a 3-channel raster");
    if (border_width < 1 || 2 * border_width >= std::min(img.width(), img.height()))
        throw BadBorder("estimate_background_color: border width " +
                        std::to_string(border_width) + " too large for " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));

    double sum[3] = {0, 0, 0};
    double sum_sq[3] = {0, 0, 0};
    std::size_t count = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const bool on_border = x < border_width || y < border_width ||
                                   x >= img.width() - border_width ||
                                   y >= img.height() - border_width;
            if (!on_border)
                continue;
            ++count;
            for (int c = 0; c < 3; ++c) {
                const double v = img.at(x, y, c);
                sum[c] += v;
                sum_sq[c] += v * v;
            }
        }
    }

    BorderStats stats;
    for (int c = 0; c < 3; ++c) {
        stats.mean[c] = sum[c] / count;
        const double var = std::max(0.0, sum_sq[c] / count - stats.mean[c] * stats.mean[c]);
        stats.stddev[c] = std::sqrt(var);
    }
    return stats;
}

Raster morph_dilate(const Raster& mask, int radius) { return morph_apply(mask, radius, true); }
Raster morph_erode(const Raster& mask, int radius) { return morph_apply(mask, radius, false); }

int count_foreground(const Raster& mask) {
    int n = 0;
    for (const auto v : mask.data())
        if (v > 0)
            ++n;
    return n;
}

Raster largest_component_4conn(const Raster& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, 0);
    int next_label = 0;
    int best_label = 0;
    int best_size = 0;
    std::vector<int> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int idx = y * w + x;
            if (mask.at(x, y) == 0 || label[idx] != 0)
                continue;
            ++next_label;
            int size = 0;
            stack.push_back(idx);
            label[idx] = next_label;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                ++size;
                const int cx = cur % w;
                const int cy = cur / w;
                const int nbr[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
                for (const auto& n : nbr) {
                    if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h)
                        continue;
                    const int nidx = n[1] * w + n[0];
                    if (mask.at(n[0], n[1]) > 0 && label[nidx] == 0) {
                        label[nidx] = next_label;
                        stack.push_back(nidx);
                    }
                }
            }
            // Ties go to the first component in row-major scan order.
            if (size > best_size) {
                best_size = size;
                best_label = next_label;
            }
        }
    }

    Raster out(w, h, 1);
    if (best_label != 0)
        for (int i = 0; i < w * h; ++i)
            if (label[i] == best_label)
                out.data()[i] = 255;
    return out;
}

Raster fill_enclosed_holes(const Raster& mask) {
    const int w = mask.width();
    const int h = mask.height();
    // Flood the background from the border (4-connectivity); any background
    // pixel the flood cannot reach is an enclosed hole.
    std::vector<std::uint8_t> reached(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack;
    auto push = [&](int x, int y) {
        const int idx = y * w + x;
        if (!reached[idx] && mask.at(x, y) == 0) {
            reached[idx] = 1;
            stack.push_back(idx);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cx = cur % w;
        const int cy = cur / w;
        if (cx > 0) push(cx - 1, cy);
        if (cx + 1 < w) push(cx + 1, cy);
        if (cy > 0) push(cx, cy - 1);
        if (cy + 1 < h) push(cx, cy + 1);
    }

    Raster out(w, h, 1);
    for (int i = 0; i < w * h; ++i)
        out.data()[i] = (mask.data()[i] > 0 || !reached[i]) ? 255 : 0;
    return out;
}

Raster refine_mask(const Raster& mask, int morph_radius) {
    if (mask.channels() != 1)
        throw Error("refine_mask: expects a 1-channel mask");
    if (count_foreground(mask) == 0)
        throw Error("refine_mask: input mask is empty");
    Raster out = morph_dilate(morph_erode(mask, morph_radius), morph_radius); // open
    out = morph_erode(morph_dilate(out, morph_radius), morph_radius);         // close
    if (count_foreground(out) == 0)
        throw MaskVanished("refine_mask: morphology erased the whole mask");
    return out;
}

Raster extract_mask(const Raster& img, const MaskParams& params) {
    params.validate();
    if (img.channels() != 3)
        throw Error("extract_mask: expects a 3-channel image");
    if (img.width() < 32 || img.height() < 32)
        throw Error("extract_mask: image must be at least 32x32");

    const BorderStats bg = estimate_background_color(img, params.border_width);
    const double threshold_sq = params.color_threshold * params.color_threshold;

    Raster mask(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double dist_sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double d = img.at(x, y, c) - bg.mean[c];
                dist_sq += d * d;
            }
            mask.at(x, y) = dist_sq > threshold_sq ? 255 : 0;
        }
    }
    if (count_foreground(mask) == 0)
        throw NoForeground("extract_mask: no pixel exceeds the color threshold");

    mask = morph_dilate(morph_erode(mask, params.morph_radius), params.morph_radius);
    mask = morph_erode(morph_dilate(mask, params.morph_radius), params.morph_radius);
    mask = largest_component_4conn(mask);
    if (params.fill_holes)
        mask = fill_enclosed_holes(mask);

    if (count_foreground(mask) == 0)
        throw NoForeground("extract_mask: mask is empty after cleanup");
    return mask;
}

} // namespace pastegen
