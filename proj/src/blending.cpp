#include "pastegen/blending.hpp"

#include <algorithm>
#include <cmath>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

struct OverlapRect {
    int x0, y0, x1, y1; // canvas coordinates, half-open
    bool empty() const { return x1 <= x0 || y1 <= y0; }
};

OverlapRect overlap_rect(const Raster& bg, const Cutout& cutout, int ax, int ay) {
    return OverlapRect{std::max(ax, 0), std::max(ay, 0),
                       std::min(ax + cutout.color.width(), bg.width()),
                       std::min(ay + cutout.color.height(), bg.height())};
}

void require_overlap(const OverlapRect& rect) {
    if (rect.empty())
        throw NoOverlap("pasted cutout does not overlap the canvas");
}

void paste_direct_inplace(Raster& canvas, const Cutout& cutout, int ax, int ay) {
    const OverlapRect rect = overlap_rect(canvas, cutout, ax, ay);
    require_overlap(rect);
    for (int y = rect.y0; y < rect.y1; ++y) {
        for (int x = rect.x0; x < rect.x1; ++x) {
            if (cutout.alpha.at(x - ax, y - ay) == 0)
                continue;
            for (int c = 0; c < 3; ++c)
                canvas.at(x, y, c) = cutout.color.at(x - ax, y - ay, c);
        }
    }
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += kernel[k + radius];
    }
    for (auto& w : kernel)
        w /= sum;
    return kernel;
}

void paste_gaussian_inplace(Raster& canvas, const Cutout& cutout, int ax, int ay,
                            double sigma) {
    if (!(sigma > 0.0))
        throw Error("paste_gaussian: sigma must be positive");
    const OverlapRect rect = overlap_rect(canvas, cutout, ax, ay);
    require_overlap(rect);

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const auto kernel = gaussian_kernel(sigma, radius);
    const int cw = cutout.color.width();
    const int ch = cutout.color.height();
    const int pw = cw + 2 * radius;
    const int ph = ch + 2 * radius;

    // Blur the zero-padded binary alpha, separably.
    std::vector<double> padded(static_cast<std::size_t>(pw) * ph, 0.0);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            padded[static_cast<std::size_t>(y + radius) * pw + (x + radius)] =
                cutout.alpha.at(x, y) > 0 ? 1.0 : 0.0;

    std::vector<double> horiz(padded.size(), 0.0);
    for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int sx = x + k;
                if (sx >= 0 && sx < pw)
                    acc += kernel[k + radius] * padded[static_cast<std::size_t>(y) * pw + sx];
            }
            horiz[static_cast<std::size_t>(y) * pw + x] = acc;
        }
    }
    std::vector<double> soft(padded.size(), 0.0);
    for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int sy = y + k;
                if (sy >= 0 && sy < ph)
                    acc += kernel[k + radius] * horiz[static_cast<std::size_t>(sy) * pw + x];
            }
            soft[static_cast<std::size_t>(y) * pw + x] = acc;
        }
    }

    const int x0 = std::max(ax - radius, 0);
    const int y0 = std::max(ay - radius, 0);
    const int x1 = std::min(ax + cw + radius, canvas.width());
    const int y1 = std::min(ay + ch + radius, canvas.height());
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double a =
                soft[static_cast<std::size_t>(y - ay + radius) * pw + (x - ax + radius)];
            if (a <= 0.0)
                continue;
            const int sx = std::clamp(x - ax, 0, cw - 1); // edge-clamp source lookup
            const int sy = std::clamp(y - ay, 0, ch - 1);
            for (int c = 0; c < 3; ++c) {
                const double blended =
                    a * cutout.color.at(sx, sy, c) + (1.0 - a) * canvas.at(x, y, c);
                canvas.at(x, y, c) = static_cast<std::uint8_t>(
                    std::clamp<long>(std::lround(blended), 0, 255));
            }
        }
    }
}

struct CgResult {
    long long iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history; // relative residual per iteration, 0th = initial
};

// Conjugate gradient on the interior Laplacian (diagonal 4, SPD), Jacobi
// preconditioned. Reductions are plain sequential loops so results are
// bit-stable for a fixed build. Keeps the iterate with the smallest
// residual seen.
CgResult solve_poisson_cg(const std::vector<std::array<int, 4>>& neighbors,
                          const std::vector<double>& b, std::vector<double>& x,
                          double tolerance, int max_iters) {
    const std::size_t n = b.size();
    std::vector<double> r(n), p(n), ap(n), best_x = x;

    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 4.0 * v[i];
            for (const int nb : neighbors[i])
                if (nb >= 0)
                    acc -= v[nb];
            out[i] = acc;
        }
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += a[i] * c[i];
        return acc;
    };

    double b_norm = std::sqrt(dot(b, b));
    if (b_norm == 0.0)
        b_norm = 1.0;

    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - ap[i];

    double best_res = std::sqrt(dot(r, r)) / b_norm;
    CgResult result;
    result.relative_residual = best_res;
    result.residual_history.push_back(best_res);
    if (best_res <= tolerance) {
        result.converged = true;
        return result;
    }

    // Jacobi preconditioner: M = diag(A) = 4I.
    for (std::size_t i = 0; i < n; ++i)
        p[i] = r[i] / 4.0;
    double rz = dot(r, p);

    for (int iter = 1; iter <= max_iters; ++iter) {
        apply(p, ap);
        const double p_ap = dot(p, ap);
        if (p_ap == 0.0)
            break;
        const double alpha = rz / p_ap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double res = std::sqrt(dot(r, r)) / b_norm;
        if (!std::isfinite(res))
            throw SolverDiverged("poisson solve produced a non-finite residual");
        result.iterations = iter;
        result.residual_history.push_back(res);
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        if (res <= tolerance) {
            result.converged = true;
            result.relative_residual = res;
            return result;
        }
        double rz_new = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            rz_new += r[i] * (r[i] / 4.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] / 4.0 + beta * p[i];
    }

    x = best_x;
    result.relative_residual = best_res;
    result.converged = false;
    return result;
}

struct PoissonAssembly {
    OverlapRect rect;
    std::vector<int> unknown_index; // rect-local grid -> unknown index or -1
    std::vector<std::pair<int, int>> unknowns;
    std::vector<std::array<int, 4>> neighbors;
    bool has_strict_interior = false;
    int canvas_w = 0, canvas_h = 0;
    int cutout_w = 0, cutout_h = 0;
    int ax = 0, ay = 0;

    bool in_mask(const Cutout& cutout, int x, int y) const {
        const int lx = x - ax;
        const int ly = y - ay;
        return lx >= 0 && ly >= 0 && lx < cutout_w && ly < cutout_h &&
               cutout.alpha.at(lx, ly) > 0;
    }
    bool on_image_edge(int x, int y) const {
        return x == 0 || y == 0 || x == canvas_w - 1 || y == canvas_h - 1;
    }
    // Strictly inside the cutout canvas: the source value is defined on the
    // whole 4-neighborhood, so the guidance field needs no extrapolation.
    bool inside_cutout(int x, int y) const {
        const int lx = x - ax;
        const int ly = y - ay;
        return lx >= 1 && ly >= 1 && lx <= cutout_w - 2 && ly <= cutout_h - 2;
    }
    double src(const Cutout& cutout, int x, int y, int c) const {
        return cutout.color.at(x - ax, y - ay, c) / 255.0;
    }
    int index_of(int x, int y) const {
        if (x < rect.x0 || y < rect.y0 || x >= rect.x1 || y >= rect.y1)
            return -1;
        const int rw = rect.x1 - rect.x0;
        return unknown_index[static_cast<std::size_t>(y - rect.y0) * rw + (x - rect.x0)];
    }
};

// Unknowns: on-canvas mask pixels away from both the image edge and the
// cutout-canvas edge. Dirichlet boundary values: the source on truncated
// (image-edge) mask pixels, the current composite everywhere else. Mask
// pixels tangent to the tight cutout canvas render as background, exactly
// like the exterior boundary ring.
PoissonAssembly assemble_poisson(const Raster& canvas, const Cutout& cutout, int ax,
                                 int ay) {
    PoissonAssembly a;
    a.rect = overlap_rect(canvas, cutout, ax, ay);
    require_overlap(a.rect);
    a.canvas_w = canvas.width();
    a.canvas_h = canvas.height();
    a.cutout_w = cutout.color.width();
    a.cutout_h = cutout.color.height();
    a.ax = ax;
    a.ay = ay;

    const int rw = a.rect.x1 - a.rect.x0;
    const int rh = a.rect.y1 - a.rect.y0;
    a.unknown_index.assign(static_cast<std::size_t>(rw) * rh, -1);
    for (int y = a.rect.y0; y < a.rect.y1; ++y) {
        for (int x = a.rect.x0; x < a.rect.x1; ++x) {
            if (!a.in_mask(cutout, x, y) || a.on_image_edge(x, y) || !a.inside_cutout(x, y))
                continue;
            a.unknown_index[static_cast<std::size_t>(y - a.rect.y0) * rw + (x - a.rect.x0)] =
                static_cast<int>(a.unknowns.size());
            a.unknowns.emplace_back(x, y);
            a.has_strict_interior = a.has_strict_interior ||
                                    (a.in_mask(cutout, x - 1, y) && a.in_mask(cutout, x + 1, y) &&
                                     a.in_mask(cutout, x, y - 1) && a.in_mask(cutout, x, y + 1));
        }
    }
    const std::size_t n = a.unknowns.size();
    a.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = a.unknowns[i];
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k)
            a.neighbors[i][k] = a.index_of(nx[k], ny[k]);
    }
    return a;
}

// Must run against the pre-paste composite: Dirichlet values read the canvas
// at pixels the solve never overwrites.
void build_poisson_rhs(const PoissonAssembly& a, const Raster& canvas, const Cutout& cutout,
                       int channel, std::vector<double>& b, std::vector<double>& x0) {
    const std::size_t n = a.unknowns.size();
    b.resize(n);
    x0.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = a.unknowns[i];
        const double src_p = a.src(cutout, x, y, channel);
        double rhs = 0.0;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
            rhs += src_p - a.src(cutout, nx[k], ny[k], channel); // source-gradient guidance
            if (a.neighbors[i][k] >= 0)
                continue;
            if (a.in_mask(cutout, nx[k], ny[k]) && a.on_image_edge(nx[k], ny[k]))
                rhs += a.src(cutout, nx[k], ny[k], channel); // truncated: no bg available
            else
                rhs += canvas.at(nx[k], ny[k], channel) / 255.0;
        }
        b[i] = rhs;
        x0[i] = src_p; // warm start at the source values
    }
}

void paste_poisson_inplace(Raster& canvas, const Cutout& cutout, int ax, int ay,
                           double tolerance, int max_iters, PasteStats* stats) {
    if (!(tolerance > 0.0) || max_iters < 1)
        throw Error("paste_poisson: tolerance must be > 0 and max_iters >= 1");
    const PoissonAssembly a = assemble_poisson(canvas, cutout, ax, ay);

    // No strict interior: the gradient-domain system degenerates, paste directly.
    if (!a.has_strict_interior) {
        paste_direct_inplace(canvas, cutout, ax, ay);
        return;
    }

    std::vector<double> b, x_vec;
    for (int c = 0; c < 3; ++c) {
        build_poisson_rhs(a, canvas, cutout, c, b, x_vec);
        const CgResult cg = solve_poisson_cg(a.neighbors, b, x_vec, tolerance, max_iters);
        if (stats) {
            stats->solves += 1;
            stats->iterations += cg.iterations;
            stats->max_residual = std::max(stats->max_residual, cg.relative_residual);
            if (!cg.converged)
                stats->unconverged += 1;
        }
        for (std::size_t i = 0; i < a.unknowns.size(); ++i) {
            const auto [x, y] = a.unknowns[i];
            canvas.at(x, y, c) = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(x_vec[i] * 255.0), 0, 255));
        }
    }

    // Truncated mask pixels on the image edge still get the source. Mask
    // pixels tangent to the cutout canvas stay background (Dirichlet).
    for (int y = a.rect.y0; y < a.rect.y1; ++y) {
        for (int x = a.rect.x0; x < a.rect.x1; ++x) {
            if (!a.in_mask(cutout, x, y) || a.index_of(x, y) >= 0 || !a.on_image_edge(x, y))
                continue;
            for (int c = 0; c < 3; ++c)
                canvas.at(x, y, c) = cutout.color.at(x - ax, y - ay, c);
        }
    }
}

} // namespace

std::string BlendMode::tag() const {
    switch (kind) {
    case Kind::Direct: return "direct";
    case Kind::Gaussian: return "gaussian";
    case Kind::Poisson: return "poisson";
    }
    return "direct";
}

void BlendMode::validate() const {
    if (kind == Kind::Gaussian && !(sigma > 0.0))
        throw ConfigError("blend mode gaussian: sigma must be > 0");
    if (kind == Kind::Poisson && (!(tolerance > 0.0) || max_iters < 1))
        throw ConfigError("blend mode poisson: tolerance must be > 0 and max_iters >= 1");
}

int BlendMode::locality_radius() const {
    return kind == Kind::Gaussian ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
}

Raster paste_direct(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y) {
    Raster out = bg;
    paste_direct_inplace(out, cutout, anchor_x, anchor_y);
    return out;
}

Raster paste_gaussian(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y,
                      double sigma) {
    Raster out = bg;
    paste_gaussian_inplace(out, cutout, anchor_x, anchor_y, sigma);
    return out;
}

Raster paste_poisson(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y,
                     double tolerance, int max_iters, PasteStats* stats) {
    Raster out = bg;
    paste_poisson_inplace(out, cutout, anchor_x, anchor_y, tolerance, max_iters, stats);
    return out;
}

PoissonSystem poisson_system(const Raster& bg, const Cutout& cutout, int anchor_x,
                             int anchor_y, double tolerance, int max_iters) {
    const PoissonAssembly a = assemble_poisson(bg, cutout, anchor_x, anchor_y);
    PoissonSystem out;
    out.unknowns = a.unknowns;
    out.neighbors = a.neighbors;
    if (!a.has_strict_interior) {
        out.used_direct_fallback = true;
        return out;
    }
    for (int c = 0; c < 3; ++c) {
        std::vector<double> b, x_vec;
        build_poisson_rhs(a, bg, cutout, c, b, x_vec);
        const CgResult cg = solve_poisson_cg(a.neighbors, b, x_vec, tolerance, max_iters);
        out.stats.solves += 1;
        out.stats.iterations += cg.iterations;
        out.stats.max_residual = std::max(out.stats.max_residual, cg.relative_residual);
        if (!cg.converged)
            out.stats.unconverged += 1;
        out.rhs[c] = std::move(b);
        out.solution[c] = std::move(x_vec);
        out.residual_history[c] = cg.residual_history;
    }
    return out;
}

PreparedScene prepare_scene(const SceneBlueprint& bp, const CutoutCache& cutouts,
                            Raster background) {
    if (background.width() != bp.canvas_w || background.height() != bp.canvas_h)
        throw Error("prepare_scene: background does not match blueprint canvas " +
                    bp.blueprint_id);
    PreparedScene scene;
    scene.blueprint = &bp;
    scene.background = std::move(background);
    scene.transformed.reserve(bp.placements.size());
    for (const auto& p : bp.placements) {
        const auto cutout = cutouts.get(p.instance_label, p.view_id);
        Cutout t = transform_cutout(*cutout, p.scale, p.rotation);
        if (t.color.width() != p.width || t.color.height() != p.height)
            throw Error("prepare_scene: transformed cutout dimensions disagree with "
                        "blueprint " + bp.blueprint_id + " (asset mismatch?)");
        scene.transformed.push_back(std::move(t));
    }
    return scene;
}

RenderedScene render_prepared(const PreparedScene& scene, const BlendMode& mode) {
    mode.validate();
    const SceneBlueprint& bp = *scene.blueprint;

    RenderedScene out;
    out.image = scene.background;
    out.blueprint_id = bp.blueprint_id;
    out.blend_mode_tag = mode.tag();

    for (std::size_t i = 0; i < bp.placements.size(); ++i) {
        const Placement& p = bp.placements[i];
        const Cutout& cutout = scene.transformed[i];
        switch (mode.kind) {
        case BlendMode::Kind::Direct:
            paste_direct_inplace(out.image, cutout, p.anchor_x, p.anchor_y);
            break;
        case BlendMode::Kind::Gaussian:
            paste_gaussian_inplace(out.image, cutout, p.anchor_x, p.anchor_y, mode.sigma);
            break;
        case BlendMode::Kind::Poisson:
            paste_poisson_inplace(out.image, cutout, p.anchor_x, p.anchor_y,
                                  mode.tolerance, mode.max_iters, &out.stats);
            break;
        }
    }

    for (const auto& entry : blueprint_boxes(bp))
        if (!entry.is_distractor)
            out.annotations.push_back(Annotation{entry.label, entry.box});
    return out;
}

RenderedScene render_scene(const SceneBlueprint& bp, const BlendMode& mode,
                           const CutoutCache& cutouts, Raster background) {
    const PreparedScene scene = prepare_scene(bp, cutouts, std::move(background));
    return render_prepared(scene, mode);
}

std::vector<RenderedScene> render_multiblend(const SceneBlueprint& bp,
                                             const std::vector<BlendMode>& modes,
                                             const CutoutCache& cutouts, Raster background) {
    if (modes.empty())
        throw Error("render_multiblend: modes must be non-empty");
    const PreparedScene scene = prepare_scene(bp, cutouts, std::move(background));
    std::vector<RenderedScene> out;
    out.reserve(modes.size());
    for (const auto& mode : modes)
        out.push_back(render_prepared(scene, mode));
    return out;
}

} // namespace pastegen
