"""Size-free shape descriptors: Sphericity, Elongation, Flatness."""
from __future__ import annotations

import numpy as np
from scipy import ndimage as ndi
from skimage.measure import marching_cubes, mesh_surface_area

from ..errors import DegenerateGeometry, EmptyRoi
from ..volume import BinaryMask
from .discretize import roi_bbox

SHAPE_NAMES = ("Sphericity", "Elongation", "Flatness")

# Gaussian pre-smoothing (voxels) before meshing; removes the staircase bias
# of a raw binary isosurface. 0.7 keeps 1-voxel sheets above the 0.5 level.
MESH_SMOOTHING_SIGMA = 0.7


def surface_area(mask: np.ndarray, spacing) -> float:
    box = roi_bbox(mask)
    padded = np.pad(mask[box], 3).astype(np.float64)
    smooth = ndi.gaussian_filter(padded, MESH_SMOOTHING_SIGMA)
    field = smooth if smooth.max() > 0.5 else padded
    verts, faces, _, _ = marching_cubes(field, 0.5, spacing=tuple(spacing))
    return float(mesh_surface_area(verts, faces))


def principal_moments(mask: np.ndarray, spacing) -> np.ndarray:
    """Eigenvalues (descending) of the covariance of voxel-center coordinates in mm."""
    pts = np.argwhere(mask) * np.asarray(spacing)
    if len(pts) < 2:
        return np.zeros(3)
    cov = np.cov(pts, rowvar=False, bias=True)
    return np.clip(np.linalg.eigvalsh(cov)[::-1], 0.0, None)


def shape_features(m: BinaryMask, strict: bool = True) -> dict[str, float]:
    """With ``strict=False`` degenerate ROIs get 0 for the undefined axis ratios."""
    if not m.data.any():
        raise EmptyRoi("shape of an empty ROI")
    lam = principal_moments(m.data, m.spacing)
    degenerate = lam[0] <= 0 or lam[2] <= 1e-12 * lam[0]
    if degenerate and strict:
        raise DegenerateGeometry("ROI is collinear or coplanar; principal axes undefined")
    volume = m.count * float(np.prod(m.spacing))
    area = surface_area(m.data, m.spacing)
    return {
        "shape_Sphericity": (36.0 * np.pi * volume**2) ** (1.0 / 3.0) / area,
        "shape_Elongation": float(np.sqrt(lam[1] / lam[0])) if lam[0] > 0 else 0.0,
        "shape_Flatness": float(np.sqrt(lam[2] / lam[0])) if lam[0] > 0 else 0.0,
    }
