#pragma once

#include <string>
#include <vector>

#include "pastegen/assets.hpp"
#include "pastegen/cutout.hpp"
#include "pastegen/placement.hpp"
#include "pastegen/raster.hpp"

namespace pastegen {

struct BlendMode {
    enum class Kind { Direct, Gaussian, Poisson };

    Kind kind = Kind::Direct;
    double sigma = 2.0;        // Gaussian only
    double tolerance = 1e-6;   // Poisson only, relative residual
    int max_iters = 10000;     // Poisson only

    static BlendMode direct() { return BlendMode{}; }
    static BlendMode gaussian(double sigma = 2.0) {
        return BlendMode{Kind::Gaussian, sigma, 1e-6, 10000};
    }
    static BlendMode poisson(double tolerance = 1e-6, int max_iters = 10000) {
        return BlendMode{Kind::Poisson, 2.0, tolerance, max_iters};
    }

    std::string tag() const;
    void validate() const;
    /// Chebyshev radius around pasted masks that the mode may touch.
    int locality_radius() const;
};

/// Accumulated Poisson solver metadata for one rendered image.
struct PasteStats {
    int solves = 0;            // one per pasted object per channel
    long long iterations = 0;  // summed over solves
    double max_residual = 0.0; // worst relative residual among solves
    int unconverged = 0;       // solves that hit the iteration cap
};

struct Annotation {
    std::string label;
    BoundingBox box;
};

struct RenderedScene {
    Raster image;
    std::vector<Annotation> annotations; // non-distractor placements only
    std::string blueprint_id;
    std::string blend_mode_tag;
    PasteStats stats;
};

/// out = alpha*src + (1-alpha)*bg with binary alpha; pixels outside the mask
/// untouched. Throws NoOverlap when the cutout canvas misses the image.
Raster paste_direct(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y);

/// Binary alpha blurred with a normalized Gaussian kernel of radius
/// ceil(3*sigma), then soft alpha-composited.
Raster paste_gaussian(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y,
                      double sigma);

/// Gradient-domain paste: per channel, solve the discrete Poisson equation
/// over the on-canvas mask region with source gradients as guidance and the
/// current background as Dirichlet boundary. Truncated mask pixels on the
/// image edge keep the source value (no background exists there); mask
/// pixels tangent to the tight cutout canvas act as boundary and keep the
/// background. Conjugate gradient, Jacobi-preconditioned, fixed summation
/// order; the best iterate is kept and an unconverged solve is flagged in
/// the stats rather than treated as an error. Falls back to a direct paste
/// when the mask has no strict interior.
Raster paste_poisson(const Raster& bg, const Cutout& cutout, int anchor_x, int anchor_y,
                     double tolerance, int max_iters, PasteStats* stats = nullptr);

/// The assembled linear system and continuous solution of one gradient-domain
/// paste, exposed so an independent solver can check the same system.
struct PoissonSystem {
    std::vector<std::pair<int, int>> unknowns; // canvas coordinates
    std::vector<std::array<int, 4>> neighbors; // unknown index, or -1 at the boundary
    std::array<std::vector<double>, 3> rhs;
    std::array<std::vector<double>, 3> solution; // conjugate-gradient result, in [0,1]
    std::array<std::vector<double>, 3> residual_history; // relative residual per iteration
    bool used_direct_fallback = false;
    PasteStats stats;
};

PoissonSystem poisson_system(const Raster& bg, const Cutout& cutout, int anchor_x,
                             int anchor_y, double tolerance, int max_iters);

/// A blueprint with its background and transformed cutouts materialized,
/// ready to render under any number of blend modes.
struct PreparedScene {
    const SceneBlueprint* blueprint = nullptr;
    Raster background;
    std::vector<Cutout> transformed; // one per placement, in z order
};

PreparedScene prepare_scene(const SceneBlueprint& bp, const CutoutCache& cutouts,
                            Raster background);

RenderedScene render_prepared(const PreparedScene& scene, const BlendMode& mode);

/// Paste all placements in z order under the given mode.
RenderedScene render_scene(const SceneBlueprint& bp, const BlendMode& mode,
                           const CutoutCache& cutouts, Raster background);

/// One render per mode, sharing the blueprint and annotation set.
std::vector<RenderedScene> render_multiblend(const SceneBlueprint& bp,
                                             const std::vector<BlendMode>& modes,
                                             const CutoutCache& cutouts, Raster background);

} // namespace pastegen
