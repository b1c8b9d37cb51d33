"""Synthetic phantoms with analytic ground truth.

Curves carry their closed-form arc length, chord and curvature; tubes and
ellipsoids are voxelized by testing voxel centers. ``planted_dataset`` writes
a complete two-timepoint cohort (volumes, masks, manifest, diameters) in the
formats the pipeline reads.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import SelfIntersection, TooSmall
from .roi import recist_diameter
from .volume import BinaryMask, ScalarVolume, write_mask, write_volume


@dataclass(frozen=True, eq=False)
class ParametricCurve:
    points: np.ndarray
    arc_length: float
    chord: float
    curvature: float
    closed: bool = False

    @property
    def tortuosity(self) -> float:
        return self.arc_length / self.chord if self.chord > 0 else math.inf


def _samples(length: float, step: float = 0.02) -> np.ndarray:
    return np.linspace(0.0, 1.0, max(2, int(math.ceil(length / step)) + 1))


def line(start, end) -> ParametricCurve:
    start, end = np.asarray(start, float), np.asarray(end, float)
    length = float(np.linalg.norm(end - start))
    t = _samples(length)[:, None]
    return ParametricCurve(start + t * (end - start), length, length, 0.0)


def _plane_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    n = np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def arc(radius: float, angle: float, center=(0.0, 0.0, 0.0), normal=(0.0, 0.0, 1.0), start_angle: float = 0.0) -> ParametricCurve:
    """Circular arc of ``angle`` radians; a full turn gives a closed circle."""
    u, w = _plane_basis(normal)
    length = radius * angle
    a = start_angle + angle * _samples(length)
    pts = np.asarray(center, float) + radius * (np.cos(a)[:, None] * u + np.sin(a)[:, None] * w)
    closed = math.isclose(angle, 2 * math.pi)
    chord = 0.0 if closed else 2 * radius * math.sin(angle / 2)
    return ParametricCurve(pts, length, chord, 1.0 / radius, closed)


def helix(radius: float, pitch: float, turns: float, center=(0.0, 0.0, 0.0)) -> ParametricCurve:
    """x = R cos t, y = R sin t, z = b t for t in [0, 2 pi turns]; curvature R / (R^2 + b^2)."""
    tmax = 2 * math.pi * turns
    speed = math.hypot(radius, pitch)
    t = tmax * _samples(speed * tmax)
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t), pitch * t]) + np.asarray(center, float)
    return ParametricCurve(
        pts,
        speed * tmax,
        float(np.linalg.norm(pts[-1] - pts[0])),
        radius / (radius**2 + pitch**2),
    )


def _check_self_distance(curve: ParametricCurve, radius: float) -> None:
    pts = curve.points
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(steps)])
    total = s[-1]
    pairs = cKDTree(pts).query_pairs(2 * radius, output_type="ndarray")
    if len(pairs) == 0:
        return
    sep = np.abs(s[pairs[:, 0]] - s[pairs[:, 1]])
    if curve.closed:
        sep = np.minimum(sep, total - sep)
    if np.any(sep > math.pi * radius):
        raise SelfIntersection("curve comes within 2 radii of itself")


def tube_mask_on_grid(curves, radius: float, dims, spacing, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Voxels whose centers lie within ``radius`` mm of any of the sampled curves."""
    pts = np.vstack([c.points for c in curves])
    spacing = np.asarray(spacing, float)
    origin = np.asarray(origin, float)
    lo = np.floor((pts.min(0) - radius - origin) / spacing).astype(int)
    hi = np.ceil((pts.max(0) + radius - origin) / spacing).astype(int) + 1
    lo = np.clip(lo, 0, dims)
    hi = np.clip(hi, 0, dims)
    out = np.zeros(dims, dtype=bool)
    if np.any(hi <= lo):
        return out
    axes = [np.arange(a, b) * s + o for a, b, s, o in zip(lo, hi, spacing, origin)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    d, _ = cKDTree(pts).query(grid, distance_upper_bound=radius * (1 + 1e-12))
    out[lo[0] : hi[0], lo[1] : hi[1], lo[2] : hi[2]] = (d <= radius).reshape(hi - lo)
    return out


def tube_phantom(curve, radius: float, spacing: float = 0.75, pad: int = 4) -> BinaryMask:
    """Tube of ``radius`` mm around one curve (or a list of curves) on a fitted grid."""
    curves = list(curve) if isinstance(curve, (list, tuple)) else [curve]
    if radius < 1.5 * spacing:
        raise TooSmall(f"tube radius {radius} mm is below 1.5 voxels")
    for c in curves:
        _check_self_distance(c, radius)
    pts = np.vstack([c.points for c in curves])
    origin = pts.min(0) - radius - pad * spacing
    dims = tuple(int(n) for n in np.ceil((pts.max(0) + radius + pad * spacing - origin) / spacing) + 1)
    data = tube_mask_on_grid(curves, radius, dims, (spacing,) * 3, origin)
    return BinaryMask(data, (spacing,) * 3, tuple(origin))


def ellipsoid_mask_on_grid(semi_axes, center, dims, spacing, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    axes = [np.arange(n) * s + o - c for n, s, o, c in zip(dims, spacing, origin, center)]
    x, y, z = np.meshgrid(*axes, indexing="ij", sparse=True)
    a, b, c = semi_axes
    return (x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2 <= 1.0


def ellipsoid_phantom(
    semi_axes,
    spacing: float = 0.75,
    intensity_in: float = -100.0,
    intensity_out: float = -850.0,
    pad: int = 4,
) -> tuple[ScalarVolume, BinaryMask]:
    semi_axes = tuple(float(a) for a in semi_axes)
    if min(semi_axes) <= 2 * spacing:
        raise TooSmall(f"semi-axes {semi_axes} must exceed 2 voxels ({2 * spacing} mm)")
    dims = tuple(int(math.ceil(2 * a / spacing)) + 2 * pad + 1 for a in semi_axes)
    center = tuple((n - 1) * spacing / 2 for n in dims)
    mask = ellipsoid_mask_on_grid(semi_axes, center, dims, (spacing,) * 3)
    data = np.where(mask, intensity_in, intensity_out)
    sp = (spacing,) * 3
    return ScalarVolume(data, sp), BinaryMask(mask, sp)


def ball_mask(radius_vox: float, pad: int = 3) -> np.ndarray:
    """Digitized ball of ``radius_vox`` voxels centred on a voxel center."""
    r = int(math.ceil(radius_vox))
    n = 2 * (r + pad) + 1
    x, y, z = np.ogrid[:n, :n, :n]
    c = r + pad
    return (x - c) ** 2 + (y - c) ** 2 + (z - c) ** 2 <= radius_vox**2


# ---------------------------------------------------------------- planted cohort

BODY_HU = 30.0
LUNG_HU = -850.0
VESSEL_HU = 40.0
LESION_LOW_HU = 20.0
LESION_HIGH_HU = 120.0
LESION_NOISE_HU = 4.0
DATASET_SPACING = 0.75
DATASET_DIMS = (48, 48, 48)
_WALL = 3


@dataclass(frozen=True)
class PlantedLesion:
    lesion_id: str
    patient_id: str
    label: int
    speckled_tp1: bool
    speckled_tp2: bool
    radii_mm: tuple[float, float, float]
    scales: tuple[float, float, float]


_STEPS = np.array([(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1) if (a, b, c) != (0, 0, 0)])
FRAGMENT_LENGTH = 6
STRAND_LENGTH = 64
STRAND_DENSITY = (0.03, 0.08)


def _strands(rng, inside: np.ndarray, length: float, density: float, persistence: float) -> np.ndarray:
    """Random 26-connected walks confined to ``inside`` until ``density`` of it is covered.

    Walks never revisit a voxel; each step repeats the previous direction
    with probability ``persistence``, otherwise picks a free neighbour.
    """
    marked = np.zeros(inside.shape, dtype=bool)
    cells = np.argwhere(inside)
    target = int(round(density * len(cells)))
    shape = np.array(inside.shape)
    count = 0
    while count < target:
        p = cells[rng.integers(len(cells))]
        step = None
        walked = 0
        while walked < length and count < target:
            if not marked[tuple(p)]:
                marked[tuple(p)] = True
                count += 1
            walked += 1
            nxt = p + _STEPS
            ok = ((nxt >= 0) & (nxt < shape)).all(axis=1)
            nxt = nxt[ok]
            free = nxt[inside[tuple(nxt.T)] & ~marked[tuple(nxt.T)]]
            if len(free) == 0:
                break
            straight = p + step if step is not None else None
            if straight is not None and rng.random() < persistence and (free == straight).all(axis=1).any():
                q = straight
            else:
                q = free[rng.integers(len(free))]
            step, p = q - p, q
    return marked


def _lesion_texture(rng, inside: np.ndarray, speckled: bool, separation: float) -> np.ndarray:
    """Bright strands on a dim background, differing only in strand length.

    Speckled interiors are broken into short fragments (many small zones);
    the alternative joins the same material into long strands (few large
    zones). Density and walk straightness are drawn per lesion from the same
    ranges for both kinds, so histograms and most local statistics overlap.
    """
    density = rng.uniform(*STRAND_DENSITY)
    persistence = rng.uniform(0.0, 0.9)
    if speckled:
        length = FRAGMENT_LENGTH
    else:
        length = STRAND_LENGTH * max(separation, 1.0) if np.isfinite(separation) else np.inf
    bright = _strands(rng, inside, length, density, persistence)
    base = np.where(bright, LESION_HIGH_HU, LESION_LOW_HU)
    if not np.isfinite(separation):
        return base
    return np.round(base + rng.normal(0.0, LESION_NOISE_HU / max(separation, 1e-9), inside.shape))


def _vessel_curves(rng, center, radii, n_vessels: int):
    curves = []
    for _ in range(n_vessels):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        start = center + d * (radii.min() * 0.6)
        length = float(rng.uniform(8.0, 12.0))
        bend = rng.normal(size=3)
        bend -= bend.dot(d) * d
        bend /= np.linalg.norm(bend)
        t = np.linspace(0.0, 1.0, 400)[:, None]
        sag = float(rng.uniform(0.0, 3.0))
        outer = radii.max() + length
        pts = start + d * (t * (outer - radii.min() * 0.6)) + bend * (sag * np.sin(np.pi * t))
        curves.append(ParametricCurve(pts, float("nan"), float("nan"), float("nan")))
    return curves


def _scan(lesion_radii, scale, speckled, separation, vessel_curves, texture_rng):
    dims = DATASET_DIMS
    sp = (DATASET_SPACING,) * 3
    center = np.array([(n - 1) * DATASET_SPACING / 2 for n in dims])
    data = np.full(dims, BODY_HU)
    w = _WALL
    data[w:-w, w:-w, w:-w] = LUNG_HU
    lung = np.zeros(dims, dtype=bool)
    lung[w:-w, w:-w, w:-w] = True
    vessels = tube_mask_on_grid(vessel_curves, 1.5, dims, sp) & lung if vessel_curves else np.zeros(dims, bool)
    data[vessels] = VESSEL_HU
    axes = tuple(r * s for r, s in zip(lesion_radii, scale))
    lesion = ellipsoid_mask_on_grid(axes, center, dims, sp) & lung
    texture = _lesion_texture(texture_rng, lesion, speckled, separation)
    data[lesion] = texture[lesion]
    return ScalarVolume(data, sp), BinaryMask(lesion, sp), BinaryMask(lung, sp)


def planted_dataset(
    n_lesions: int,
    out_dir,
    seed: int = 7,
    label_noise: float = 0.05,
    separation: float = 1.0,
    write_lung_masks: bool = True,
) -> list[PlantedLesion]:
    """Write a cohort whose response label is carried by TP2 lesion texture.

    Responders have a speckled TP2 interior (short bright fragments, many
    small zones), non-responders long bright strands at the same density.
    TP1 texture is drawn independently of the label and the TP2 size change
    is label-independent; the >= 30% shrinkage is realised only at a third
    scan, so the label is recoverable from diameters while the image signal
    lives in TP2 zone structure. ``separation`` divides the intensity noise
    and stretches the strands; ``inf`` removes noise and leaves strands
    unbounded.
    """
    if n_lesions < 40:
        raise TooSmall("planted_dataset needs at least 40 lesions")
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lesions = []
    manifest_rows = []
    diameter_rows = []
    patient = 0
    lesions_left = 0
    for i in range(n_lesions):
        if lesions_left == 0:
            patient += 1
            lesions_left = int(rng.integers(1, 3))
        lesions_left -= 1
        lesion_id = f"L{i:04d}"
        patient_id = f"P{patient:04d}"
        speckled_tp2 = bool(rng.random() < 0.5)
        label = int(speckled_tp2) if rng.random() >= label_noise else int(not speckled_tp2)
        speckled_tp1 = bool(rng.random() < 0.5)
        radii = np.array(rng.uniform(6.0, 9.0, size=3))
        tp2_scale = float(rng.uniform(0.85, 1.0))
        tp3_scale = float(rng.uniform(0.45, 0.6)) if label else float(rng.uniform(0.8, 0.95))
        n_vessels = int(rng.integers(1, 4))
        center = np.array([(n - 1) * DATASET_SPACING / 2 for n in DATASET_DIMS])
        curves = _vessel_curves(rng, center, radii, n_vessels)
        lesion_seed = int(rng.integers(0, 2**63 - 1))
        tex_rng = np.random.default_rng(lesion_seed)
        scans = [
            (0, 1.0, speckled_tp1),
            (1, tp2_scale, speckled_tp2),
            (2, tp3_scale, False),
        ]
        for tp, scale, speckled in scans:
            vol, lesion, lung = _scan(radii, (scale,) * 3, speckled, separation, curves, tex_rng)
            stem = f"images/{lesion_id}_tp{tp}"
            write_volume(vol, out / f"{stem}_ct.mhd")
            write_mask(lesion, out / f"{stem}_lesion.mhd")
            lung_path = ""
            if write_lung_masks:
                write_mask(lung, out / f"{stem}_lung.mhd")
                lung_path = f"{stem}_lung.mhd"
            manifest_rows.append([lesion_id, patient_id, tp, f"{stem}_ct.mhd", f"{stem}_lesion.mhd", lung_path])
            diameter_rows.append([lesion_id, patient_id, tp, repr(recist_diameter(lesion)), label])
        lesions.append(
            PlantedLesion(lesion_id, patient_id, label, speckled_tp1, speckled_tp2,
                          tuple(float(r) for r in radii), (1.0, tp2_scale, tp3_scale))
        )
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lesion_id", "patient_id", "timepoint", "volume_path", "lesion_mask_path", "lung_mask_path"])
        w.writerows(manifest_rows)
    with open(out / "diameters.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lesion_id", "patient_id", "timepoint", "diameter_mm", "label"])
        w.writerows(diameter_rows)
    return lesions
