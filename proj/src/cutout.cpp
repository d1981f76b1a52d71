#include "pastegen/cutout.hpp"

#include <cmath>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Ceil with a snap window so exact-in-principle sizes (identity, multiples
// of 90 degrees) are not inflated by floating-point noise in sin/cos.
int ceil_snapped(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) < 1e-7)
        return static_cast<int>(r);
    return static_cast<int>(std::ceil(v));
}

struct TransformFrame {
    double cos_t, sin_t, scale;
    double cx, cy;          // source canvas center
    double min_x, min_y;    // top-left of the transformed canvas bbox
    int out_w, out_h;
};

// Rotation is counter-clockwise as seen on screen; in image coordinates
// (y down) that is [[c, s], [-s, c]].
TransformFrame make_frame(int w, int h, double scale, double rotation_deg) {
    if (!(scale > 0.0))
        throw Error("transform_cutout: scale must be positive");
    const double t = rotation_deg * kPi / 180.0;
    TransformFrame f;
    f.cos_t = std::cos(t);
    f.sin_t = std::sin(t);
    f.scale = scale;
    f.cx = w / 2.0;
    f.cy = h / 2.0;

    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    const double corners[4][2] = {{0, 0},
                                  {static_cast<double>(w), 0},
                                  {0, static_cast<double>(h)},
                                  {static_cast<double>(w), static_cast<double>(h)}};
    for (int i = 0; i < 4; ++i) {
        const double dx = corners[i][0] - f.cx;
        const double dy = corners[i][1] - f.cy;
        const double tx = scale * (f.cos_t * dx + f.sin_t * dy);
        const double ty = scale * (-f.sin_t * dx + f.cos_t * dy);
        if (i == 0) {
            min_x = max_x = tx;
            min_y = max_y = ty;
        } else {
            min_x = std::min(min_x, tx);
            max_x = std::max(max_x, tx);
            min_y = std::min(min_y, ty);
            max_y = std::max(max_y, ty);
        }
    }
    f.min_x = min_x;
    f.min_y = min_y;
    f.out_w = std::max(1, ceil_snapped(max_x - min_x));
    f.out_h = std::max(1, ceil_snapped(max_y - min_y));
    return f;
}

// Source position whose transform lands on the center of output pixel (ox,oy).
void source_point(const TransformFrame& f, int ox, int oy, double& sx, double& sy) {
    const double gx = (f.min_x + ox + 0.5) / f.scale;
    const double gy = (f.min_y + oy + 0.5) / f.scale;
    sx = f.cx + f.cos_t * gx - f.sin_t * gy;
    sy = f.cy + f.sin_t * gx + f.cos_t * gy;
}

double bilinear_alpha(const Raster& alpha, double sx, double sy) {
    const double u = sx - 0.5;
    const double v = sy - 0.5;
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const double fx = u - i0;
    const double fy = v - j0;
    auto sample = [&](int i, int j) -> double {
        return alpha.contains(i, j) ? alpha.at(i, j) : 0.0;
    };
    const double top = sample(i0, j0) * (1.0 - fx) + sample(i0 + 1, j0) * fx;
    const double bot = sample(i0, j0 + 1) * (1.0 - fx) + sample(i0 + 1, j0 + 1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

std::uint8_t bilinear_color(const Raster& color, double sx, double sy, int c) {
    const double u = sx - 0.5;
    const double v = sy - 0.5;
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const double fx = u - i0;
    const double fy = v - j0;
    auto sample = [&](int i, int j) -> double {
        i = std::clamp(i, 0, color.width() - 1);
        j = std::clamp(j, 0, color.height() - 1);
        return color.at(i, j, c);
    };
    const double top = sample(i0, j0) * (1.0 - fx) + sample(i0 + 1, j0) * fx;
    const double bot = sample(i0, j0 + 1) * (1.0 - fx) + sample(i0 + 1, j0 + 1) * fx;
    const double value = top * (1.0 - fy) + bot * fy;
    return static_cast<std::uint8_t>(std::clamp<long>(std::lround(value), 0, 255));
}

} // namespace

std::optional<BoundingBox> mask_tight_box(const Raster& alpha) {
    int min_x = alpha.width(), min_y = alpha.height(), max_x = -1, max_y = -1;
    for (int y = 0; y < alpha.height(); ++y) {
        for (int x = 0; x < alpha.width(); ++x) {
            if (alpha.at(x, y) > 0) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (max_x < 0)
        return std::nullopt;
    return BoundingBox{static_cast<double>(min_x), static_cast<double>(min_y),
                       static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)};
}

Cutout make_cutout(const Raster& color, const Raster& alpha,
                   std::string instance_label, std::string view_id) {
    if (color.channels() != 3 || alpha.channels() != 1)
        throw Error("make_cutout: color must be 3-channel and alpha 1-channel");
    if (color.width() != alpha.width() || color.height() != alpha.height())
        throw Error("make_cutout: color and alpha dimensions differ");

    Raster binary(alpha.width(), alpha.height(), 1);
    for (int y = 0; y < alpha.height(); ++y)
        for (int x = 0; x < alpha.width(); ++x)
            binary.at(x, y) = alpha.at(x, y) >= 128 ? 255 : 0;

    const auto tight = mask_tight_box(binary);
    if (!tight)
        throw Error("make_cutout: mask has no foreground pixels");

    const int x0 = static_cast<int>(tight->xmin);
    const int y0 = static_cast<int>(tight->ymin);
    const int w = static_cast<int>(tight->width());
    const int h = static_cast<int>(tight->height());

    Cutout out;
    out.color = Raster(w, h, 3);
    out.alpha = Raster(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.alpha.at(x, y) = binary.at(x0 + x, y0 + y);
            for (int c = 0; c < 3; ++c)
                out.color.at(x, y, c) = color.at(x0 + x, y0 + y, c);
        }
    }
    out.instance_label = std::move(instance_label);
    out.view_id = std::move(view_id);
    return out;
}

void transformed_canvas_dims(int w, int h, double scale, double rotation_deg,
                             int& out_w, int& out_h) {
    const TransformFrame f = make_frame(w, h, scale, rotation_deg);
    out_w = f.out_w;
    out_h = f.out_h;
}

Raster transform_alpha(const Raster& alpha, double scale, double rotation_deg) {
    const TransformFrame f = make_frame(alpha.width(), alpha.height(), scale, rotation_deg);
    Raster out(f.out_w, f.out_h, 1);
    for (int oy = 0; oy < f.out_h; ++oy) {
        for (int ox = 0; ox < f.out_w; ++ox) {
            double sx, sy;
            source_point(f, ox, oy, sx, sy);
            const double a = bilinear_alpha(alpha, sx, sy);
            out.at(ox, oy) = std::lround(a) >= 128 ? 255 : 0;
        }
    }
    return out;
}

Cutout transform_cutout(const Cutout& c, double scale, double rotation_deg) {
    const TransformFrame f = make_frame(c.alpha.width(), c.alpha.height(), scale, rotation_deg);
    const Raster alpha = transform_alpha(c.alpha, scale, rotation_deg);

    const auto tight = mask_tight_box(alpha);
    if (!tight)
        throw DegenerateTransform("transform_cutout: transformed mask is empty");

    const int x0 = static_cast<int>(tight->xmin);
    const int y0 = static_cast<int>(tight->ymin);
    const int w = static_cast<int>(tight->width());
    const int h = static_cast<int>(tight->height());

    Cutout out;
    out.alpha = Raster(w, h, 1);
    out.color = Raster(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.alpha.at(x, y) = alpha.at(x0 + x, y0 + y);
            double sx, sy;
            source_point(f, x0 + x, y0 + y, sx, sy);
            for (int ch = 0; ch < 3; ++ch)
                out.color.at(x, y, ch) = bilinear_color(c.color, sx, sy, ch);
        }
    }
    out.instance_label = c.instance_label;
    out.view_id = c.view_id;
    return out;
}

} // namespace pastegen
