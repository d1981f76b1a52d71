#pragma once

#include <algorithm>

#include "pastegen/errors.hpp"

namespace pastegen {

/// Axis-aligned box in continuous pixel coordinates, half-open:
/// [xmin,xmax) x [ymin,ymax), top-left origin.
struct BoundingBox {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool valid() const { return xmax > xmin && ymax > ymin; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    if (w <= 0.0)
        return 0.0;
    const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (h <= 0.0)
        return 0.0;
    return w * h;
}

/// Intersection area over union area; 0 when disjoint.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0)
        return 0.0;
    return inter / (a.area() + b.area() - inter);
}

/// Fraction of the box area that falls inside a canvas of the given size.
inline double visible_fraction(const BoundingBox& box, int canvas_w, int canvas_h) {
    const BoundingBox canvas{0.0, 0.0, static_cast<double>(canvas_w),
                             static_cast<double>(canvas_h)};
    return intersection_area(box, canvas) / box.area();
}

/// Box clipped to the canvas. May come out invalid (zero area) when fully outside.
inline BoundingBox clip_to_canvas(const BoundingBox& box, int canvas_w, int canvas_h) {
    return BoundingBox{std::max(box.xmin, 0.0), std::max(box.ymin, 0.0),
                       std::min(box.xmax, static_cast<double>(canvas_w)),
                       std::min(box.ymax, static_cast<double>(canvas_h))};
}

} // namespace pastegen
