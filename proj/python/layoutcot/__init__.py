"""Python bindings for the LayoutCoT layout generation engine."""

from ._core import (
    BBox,
    Element,
    Layout,
    LayoutCoTError,
    RetrievalIndex,
    alignment,
    denormalize,
    ltsim,
    max_iou,
    normalize,
    overlap,
    parse_html,
    render_svg,
    run_task,
    size_reasonableness,
    to_html,
    transport_distance,
    underlay_loose,
    underlay_strict,
)

__all__ = [
    "BBox",
    "Element",
    "Layout",
    "LayoutCoTError",
    "RetrievalIndex",
    "alignment",
    "denormalize",
    "ltsim",
    "max_iou",
    "normalize",
    "overlap",
    "parse_html",
    "render_svg",
    "run_task",
    "size_reasonableness",
    "to_html",
    "transport_distance",
    "underlay_loose",
    "underlay_strict",
]
