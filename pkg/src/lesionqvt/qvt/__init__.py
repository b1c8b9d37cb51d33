"""Vessel tree analysis: segmentation, skeleton branches, tortuosity/curvature, fractal dimension."""
from __future__ import annotations

from dataclasses import dataclass

from scipy import ndimage as ndi

from ..volume import BinaryMask, ScalarVolume
from .features import FRACTAL_IDS, QVT_IDS, box_counts, fractal_dimensions, qvt_features
from .geometry import (
    DEFAULT_CURVATURE_WINDOW,
    branch_tortuosity,
    curvature_profile,
    curve_curvature,
    path_tortuosity,
)
from .segmentation import lesion_attached_tree, lung_mask_threshold, otsu_threshold, segment_vessels
from .skeleton import DEFAULT_MIN_SPUR, DEFAULT_SMOOTHING, Branch, SkeletonGraph, branch_decompose, skeletonize

VESSEL_FEATURE_IDS = QVT_IDS + FRACTAL_IDS


@dataclass(frozen=True)
class VesselSettings:
    lung_threshold: float = -320.0
    lung_closing_radius: int = 2
    vessel_mode: str = "otsu"
    vessel_threshold: float | None = None
    min_spur: int = DEFAULT_MIN_SPUR
    smoothing: float = DEFAULT_SMOOTHING
    curvature_window: int = DEFAULT_CURVATURE_WINDOW


def tree_graph(tree: BinaryMask, settings: VesselSettings = VesselSettings()) -> SkeletonGraph:
    radii = ndi.distance_transform_edt(tree.data, sampling=tree.spacing) if tree.data.any() else None
    return branch_decompose(skeletonize(tree), settings.min_spur, radii, settings.smoothing)


def tree_features(tree: BinaryMask, settings: VesselSettings = VesselSettings()) -> dict[str, float]:
    """The 44 vessel columns (34 QVT + 10 fractal) for an already-isolated tree mask."""
    out = qvt_features(tree_graph(tree, settings), tree, settings.curvature_window)
    out.update(fractal_dimensions(tree))
    return {k: float(out[k]) for k in VESSEL_FEATURE_IDS}


def vessel_feature_block(
    v: ScalarVolume,
    lesion: BinaryMask,
    lung: BinaryMask | None = None,
    settings: VesselSettings = VesselSettings(),
) -> dict[str, float]:
    if lung is None:
        lung = lung_mask_threshold(v, settings.lung_threshold, settings.lung_closing_radius)
    vessels = segment_vessels(v, lung, settings.vessel_mode, settings.vessel_threshold)
    return tree_features(lesion_attached_tree(vessels, lesion), settings)


__all__ = [
    "Branch",
    "FRACTAL_IDS",
    "QVT_IDS",
    "SkeletonGraph",
    "VESSEL_FEATURE_IDS",
    "VesselSettings",
    "box_counts",
    "branch_decompose",
    "branch_tortuosity",
    "curvature_profile",
    "curve_curvature",
    "fractal_dimensions",
    "lesion_attached_tree",
    "lung_mask_threshold",
    "otsu_threshold",
    "path_tortuosity",
    "qvt_features",
    "segment_vessels",
    "skeletonize",
    "tree_features",
    "tree_graph",
]
