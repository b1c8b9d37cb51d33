"""Per-ROI radiomics: 3 shape + 16 first-order + 74 texture = 93 features."""
from __future__ import annotations

from importlib import resources

from ..volume import BinaryMask, ScalarVolume
from .discretize import DEFAULT_BIN_WIDTH, GrayLevelVolume, discretize, from_levels
from .firstorder import FIRSTORDER_NAMES, first_order_features
from .shape import SHAPE_NAMES, shape_features
from .texture import TEXTURE_FAMILIES, TextureMatrix, texture_features, texture_matrix

ROI_FEATURE_IDS: tuple[str, ...] = (
    tuple(f"shape_{n}" for n in SHAPE_NAMES)
    + tuple(f"firstorder_{n}" for n in FIRSTORDER_NAMES)
    + tuple(f"{fam}_{n}" for fam, names in TEXTURE_FAMILIES.items() for n in names)
)

# size-bearing features of the 108-feature reference template that are not computed
EXCLUDED_FEATURE_IDS: tuple[str, ...] = (
    "shape_MeshVolume", "shape_VoxelVolume", "shape_SurfaceArea", "shape_SurfaceVolumeRatio",
    "shape_Maximum3DDiameter", "shape_Maximum2DDiameterSlice", "shape_Maximum2DDiameterColumn",
    "shape_Maximum2DDiameterRow", "shape_MajorAxisLength", "shape_MinorAxisLength",
    "shape_LeastAxisLength", "firstorder_Energy", "firstorder_TotalEnergy",
    "gldm_DependenceNonUniformity",
)


def catalog_text() -> str:
    return resources.files(__package__).joinpath("catalog.txt").read_text(encoding="utf-8")


def roi_feature_block(
    v: ScalarVolume, roi: BinaryMask, bin_width: float = DEFAULT_BIN_WIDTH
) -> dict[str, float]:
    """93 features for one ROI in catalog order.

    Shape runs non-strict so collinear or planar ROIs still yield finite values.
    """
    g = discretize(v, roi, bin_width)
    out = {}
    out.update(shape_features(roi, strict=False))
    out.update(first_order_features(v, roi, bin_width))
    out.update(texture_features(g))
    return {k: out[k] for k in ROI_FEATURE_IDS}


__all__ = [
    "DEFAULT_BIN_WIDTH",
    "EXCLUDED_FEATURE_IDS",
    "GrayLevelVolume",
    "ROI_FEATURE_IDS",
    "TextureMatrix",
    "catalog_text",
    "discretize",
    "first_order_features",
    "from_levels",
    "roi_feature_block",
    "shape_features",
    "texture_features",
    "texture_matrix",
]
