"""Cut-and-paste dataset synthesis: compositing, placement and evaluation."""

from ._core import (
    PastegenError,
    average_precision,
    derive_scene_seed,
    estimate_background_color,
    evaluate,
    extract_mask,
    iou,
    paste_direct,
    paste_gaussian,
    paste_poisson,
    stats,
    synthesize,
    transform_cutout,
    verify,
    visible_fraction,
)

__all__ = [
    "PastegenError",
    "average_precision",
    "derive_scene_seed",
    "estimate_background_color",
    "evaluate",
    "extract_mask",
    "iou",
    "paste_direct",
    "paste_gaussian",
    "paste_poisson",
    "stats",
    "synthesize",
    "transform_cutout",
    "verify",
    "visible_fraction",
]
