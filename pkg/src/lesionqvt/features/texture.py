"""Texture matrices (GLCM, GLRLM, GLSZM, GLDM, NGTDM) and the 74 texture features.

Definitions follow the PyRadiomics documentation with two deliberate
differences: logarithms skip empty cells instead of adding an epsilon, and
degenerate denominators (zero variance, a single gray level, a homogeneous
neighbourhood) yield 0 rather than a sentinel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from ..errors import UnknownKind
from .discretize import GrayLevelVolume

KINDS = ("GLCM", "GLRLM", "GLSZM", "GLDM", "NGTDM")

# 13 unique offsets of the 26-neighbourhood: one of each +/- pair
DIRECTIONS: tuple[tuple[int, int, int], ...] = tuple(
    (a, b, c)
    for a in (-1, 0, 1)
    for b in (-1, 0, 1)
    for c in (-1, 0, 1)
    if (c, b, a) > (0, 0, 0)
)
NEIGHBOURS_26 = tuple(
    (a, b, c)
    for a in (-1, 0, 1)
    for b in (-1, 0, 1)
    for c in (-1, 0, 1)
    if (a, b, c) != (0, 0, 0)
)

GLCM_NAMES = (
    "Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade", "ClusterTendency",
    "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance",
    "JointEnergy", "JointEntropy", "Imc1", "Imc2", "Idm", "MCC", "Idmn", "Id", "Idn",
    "InverseVariance", "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
)
GLRLM_NAMES = (
    "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance", "RunVariance",
    "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis",
)
GLSZM_NAMES = (
    "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance", "ZoneVariance",
    "ZoneEntropy", "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis",
)
GLDM_NAMES = (
    "SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
    "DependenceNonUniformityNormalized", "GrayLevelVariance", "DependenceVariance",
    "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis",
)
NGTDM_NAMES = ("Coarseness", "Contrast", "Busyness", "Complexity", "Strength")

TEXTURE_FAMILIES = {
    "glcm": GLCM_NAMES,
    "glrlm": GLRLM_NAMES,
    "glszm": GLSZM_NAMES,
    "gldm": GLDM_NAMES,
    "ngtdm": NGTDM_NAMES,
}


@dataclass(frozen=True, eq=False)
class TextureMatrix:
    """Raw (unnormalized) counts.

    GLCM/GLRLM carry a leading direction axis (13 entries, ordered as
    ``DIRECTIONS``); row ``i`` holds gray level ``i + 1`` and column ``j``
    holds run length / zone size / dependence ``j + 1``. NGTDM columns are
    ``(n_i, s_i)``.
    """

    kind: str
    values: np.ndarray


def _padded(levels: np.ndarray) -> np.ndarray:
    return np.pad(levels, 1)


def _shifted(padded: np.ndarray, d) -> np.ndarray:
    nx, ny, nz = (s - 2 for s in padded.shape)
    dx, dy, dz = d
    return padded[1 + dx : 1 + dx + nx, 1 + dy : 1 + dy + ny, 1 + dz : 1 + dz + nz]


def glcm_matrix(g: GrayLevelVolume) -> np.ndarray:
    ng = g.ng
    lv = g.levels
    pad = _padded(lv)
    out = np.zeros((len(DIRECTIONS), ng, ng))
    for k, d in enumerate(DIRECTIONS):
        nb = _shifted(pad, d)
        ok = (lv > 0) & (nb > 0)
        codes = (lv[ok] - 1) * ng + (nb[ok] - 1)
        p = np.bincount(codes, minlength=ng * ng).reshape(ng, ng).astype(np.float64)
        out[k] = p + p.T
    return out


def _runs(levels: np.ndarray, d) -> tuple[np.ndarray, np.ndarray]:
    """(level, length) of every maximal run of equal levels along direction ``d``."""
    pad = _padded(levels)
    fwd = _shifted(pad, d)
    back = _shifted(pad, tuple(-c for c in d))
    inside = levels > 0
    starts = np.argwhere(inside & (back != levels))
    ends = np.argwhere(inside & (fwd != levels))
    d = np.asarray(d)
    axis = int(np.flatnonzero(d)[0])

    m = max(levels.shape)
    span = 3 * m  # base coordinates of a diagonal line lie in [-m, 2m)

    def order(pts):
        t = pts[:, axis] * d[axis]
        base = pts - t[:, None] * d + m
        # one int64 key: line id first, then position along the line
        key = ((base[:, 0] * span + base[:, 1]) * span + base[:, 2]) * (2 * m + 1) + (t + m)
        idx = np.argsort(key)
        return t[idx], pts[idx]

    t0, p0 = order(starts)
    t1, _ = order(ends)
    lengths = t1 - t0 + 1
    return levels[p0[:, 0], p0[:, 1], p0[:, 2]], lengths


def glrlm_matrix(g: GrayLevelVolume) -> np.ndarray:
    per_dir = [_runs(g.levels, d) for d in DIRECTIONS]
    max_len = max(int(lengths.max()) for _, lengths in per_dir)
    out = np.zeros((len(DIRECTIONS), g.ng, max_len))
    for k, (lv, lengths) in enumerate(per_dir):
        np.add.at(out[k], (lv - 1, lengths - 1), 1.0)
    return out


_S26 = np.ones((3, 3, 3), dtype=bool)


def glszm_matrix(g: GrayLevelVolume) -> np.ndarray:
    zones = []
    for level in range(1, g.ng + 1):
        lab, n = ndi.label(g.levels == level, structure=_S26)
        if n:
            sizes = np.bincount(lab.ravel())[1:]
            zones.append((np.full(n, level), sizes))
    lv = np.concatenate([z[0] for z in zones])
    sizes = np.concatenate([z[1] for z in zones])
    out = np.zeros((g.ng, int(sizes.max())))
    np.add.at(out, (lv - 1, sizes - 1), 1.0)
    return out


def gldm_matrix(g: GrayLevelVolume, alpha: int = 0) -> np.ndarray:
    lv = g.levels
    pad = _padded(lv)
    inside = lv > 0
    dep = np.ones(lv.shape, dtype=np.int64)
    for d in NEIGHBOURS_26:
        nb = _shifted(pad, d)
        dep += (nb > 0) & (np.abs(nb - lv) <= alpha)
    out = np.zeros((g.ng, 27))
    np.add.at(out, (lv[inside] - 1, dep[inside] - 1), 1.0)
    return out


def ngtdm_matrix(g: GrayLevelVolume) -> np.ndarray:
    """Per level: n_i = voxels with at least one in-ROI neighbour, s_i = sum |i - neighbour mean|."""
    lv = g.levels
    pad = _padded(lv)
    total = np.zeros(lv.shape)
    count = np.zeros(lv.shape, dtype=np.int64)
    for d in NEIGHBOURS_26:
        nb = _shifted(pad, d)
        total += nb
        count += nb > 0
    ok = (lv > 0) & (count > 0)
    diff = np.abs(lv[ok] - total[ok] / count[ok])
    out = np.zeros((g.ng, 2))
    out[:, 0] = np.bincount(lv[ok] - 1, minlength=g.ng)
    out[:, 1] = np.bincount(lv[ok] - 1, weights=diff, minlength=g.ng)
    return out


def texture_matrix(kind: str, g: GrayLevelVolume, alpha: int = 0) -> TextureMatrix:
    kind = kind.upper()
    if kind == "GLCM":
        return TextureMatrix(kind, glcm_matrix(g))
    if kind == "GLRLM":
        return TextureMatrix(kind, glrlm_matrix(g))
    if kind == "GLSZM":
        return TextureMatrix(kind, glszm_matrix(g))
    if kind == "GLDM":
        return TextureMatrix(kind, gldm_matrix(g, alpha))
    if kind == "NGTDM":
        return TextureMatrix(kind, ngtdm_matrix(g))
    raise UnknownKind(f"unknown texture matrix kind {kind!r}")


# ---------------------------------------------------------------- features

def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def glcm_direction_features(counts: np.ndarray) -> dict[str, float]:
    ng = counts.shape[0]
    p = counts / counts.sum()
    i = np.arange(1, ng + 1, dtype=np.float64)[:, None]
    j = i.T
    px = p.sum(1)
    py = p.sum(0)
    ux = float((px * i[:, 0]).sum())
    uy = float((py * j[0]).sum())
    sx = np.sqrt(float((px * (i[:, 0] - ux) ** 2).sum()))
    sy = np.sqrt(float((py * (j[0] - uy) ** 2).sum()))

    diff = np.abs(i - j).astype(np.int64)
    psum = np.bincount((i + j).astype(np.int64).ravel(), weights=p.ravel(), minlength=2 * ng + 1)
    pdiff = np.bincount(diff.ravel(), weights=p.ravel(), minlength=ng)
    k_sum = np.arange(psum.size, dtype=np.float64)
    k_diff = np.arange(pdiff.size, dtype=np.float64)

    hx, hy, hxy = _entropy(px), _entropy(py), _entropy(p)
    pxy = px[:, None] * py[None, :]
    nz = p > 0
    hxy1 = float(-(p[nz] * np.log2(pxy[nz])).sum())
    hxy2 = _entropy(pxy)

    cluster = i + j - ux - uy
    da = float((k_diff * pdiff).sum())

    f = {}
    f["Autocorrelation"] = float((p * i * j).sum())
    f["JointAverage"] = ux
    f["ClusterProminence"] = float((cluster**4 * p).sum())
    f["ClusterShade"] = float((cluster**3 * p).sum())
    f["ClusterTendency"] = float((cluster**2 * p).sum())
    f["Contrast"] = float(((i - j) ** 2 * p).sum())
    f["Correlation"] = _ratio(f["Autocorrelation"] - ux * uy, sx * sy)
    f["DifferenceAverage"] = da
    f["DifferenceEntropy"] = _entropy(pdiff)
    f["DifferenceVariance"] = float(((k_diff - da) ** 2 * pdiff).sum())
    f["JointEnergy"] = float((p**2).sum())
    f["JointEntropy"] = hxy
    f["Imc1"] = _ratio(hxy - hxy1, max(hx, hy))
    f["Imc2"] = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - hxy)))))
    f["Idm"] = float((p / (1.0 + (i - j) ** 2)).sum())
    f["MCC"] = _mcc(p, px, py)
    f["Idmn"] = float((p / (1.0 + (i - j) ** 2 / ng**2)).sum())
    f["Id"] = float((p / (1.0 + diff)).sum())
    f["Idn"] = float((p / (1.0 + diff / ng)).sum())
    f["InverseVariance"] = float((pdiff[1:] / k_diff[1:] ** 2).sum())
    f["MaximumProbability"] = float(p.max())
    f["SumAverage"] = float((k_sum * psum).sum())
    f["SumEntropy"] = _entropy(psum)
    f["SumSquares"] = float(((i - ux) ** 2 * p).sum())
    return f


def _mcc(p, px, py) -> float:
    rows = px > 0
    cols = py > 0
    if rows.sum() < 2:
        return 0.0
    # Q = sum_k p(i,k) p(j,k) / (px(i) py(k)) shares its spectrum with A A^T
    a = p[np.ix_(rows, cols)] / np.sqrt(px[rows][:, None] * py[cols][None, :])
    s = np.linalg.svd(a, compute_uv=False)
    lam = s[1] ** 2
    return float(np.sqrt(lam)) if lam >= 1e-12 else 0.0


def glcm_features(m: np.ndarray) -> dict[str, float]:
    per_dir = [glcm_direction_features(c) for c in m if c.sum() > 0]
    if not per_dir:
        return dict.fromkeys(GLCM_NAMES, 0.0)
    return {name: float(np.mean([f[name] for f in per_dir])) for name in GLCM_NAMES}


def _size_family(P: np.ndarray, n_voxels: int, prefix: dict[str, str]) -> dict[str, float]:
    """Shared algebra of the GLRLM / GLSZM / GLDM families (rows = gray level, cols = size)."""
    n = P.sum()
    p = P / n
    i = np.arange(1, P.shape[0] + 1, dtype=np.float64)[:, None]
    j = np.arange(1, P.shape[1] + 1, dtype=np.float64)[None, :]
    pi = P.sum(1)
    pj = P.sum(0)
    mu_i = float((p * i).sum())
    mu_j = float((p * j).sum())
    f = {
        "small": float((P / j**2).sum() / n),
        "large": float((P * j**2).sum() / n),
        "gln": float((pi**2).sum() / n),
        "glnn": float((pi**2).sum() / n**2),
        "sn": float((pj**2).sum() / n),
        "snn": float((pj**2).sum() / n**2),
        "pct": float(n / n_voxels),
        "glv": float((p * (i - mu_i) ** 2).sum()),
        "sv": float((p * (j - mu_j) ** 2).sum()),
        "ent": _entropy(p),
        "lgl": float((P / i**2).sum() / n),
        "hgl": float((P * i**2).sum() / n),
        "slgl": float((P / (i**2 * j**2)).sum() / n),
        "shgl": float((P * i**2 / j**2).sum() / n),
        "llgl": float((P * j**2 / i**2).sum() / n),
        "lhgl": float((P * i**2 * j**2).sum() / n),
    }
    return {name: f[key] for key, name in prefix.items()}


_GLRLM_KEYS = dict(zip(
    ("small", "large", "gln", "glnn", "sn", "snn", "pct", "glv", "sv", "ent",
     "lgl", "hgl", "slgl", "shgl", "llgl", "lhgl"),
    GLRLM_NAMES,
))
_GLSZM_KEYS = dict(zip(_GLRLM_KEYS, GLSZM_NAMES))
_GLDM_KEYS = {
    "small": "SmallDependenceEmphasis",
    "large": "LargeDependenceEmphasis",
    "gln": "GrayLevelNonUniformity",
    "snn": "DependenceNonUniformityNormalized",
    "glv": "GrayLevelVariance",
    "sv": "DependenceVariance",
    "ent": "DependenceEntropy",
    "lgl": "LowGrayLevelEmphasis",
    "hgl": "HighGrayLevelEmphasis",
    "slgl": "SmallDependenceLowGrayLevelEmphasis",
    "shgl": "SmallDependenceHighGrayLevelEmphasis",
    "llgl": "LargeDependenceLowGrayLevelEmphasis",
    "lhgl": "LargeDependenceHighGrayLevelEmphasis",
}


def glrlm_features(m: np.ndarray, n_voxels: int) -> dict[str, float]:
    per_dir = [_size_family(P, n_voxels, _GLRLM_KEYS) for P in m]
    return {name: float(np.mean([f[name] for f in per_dir])) for name in GLRLM_NAMES}


def glszm_features(m: np.ndarray, n_voxels: int) -> dict[str, float]:
    f = _size_family(m, n_voxels, _GLSZM_KEYS)
    return {name: f[name] for name in GLSZM_NAMES}


def gldm_features(m: np.ndarray, n_voxels: int) -> dict[str, float]:
    f = _size_family(m, n_voxels, _GLDM_KEYS)
    return {name: f[name] for name in GLDM_NAMES}


def ngtdm_features(m: np.ndarray) -> dict[str, float]:
    n, s = m[:, 0], m[:, 1]
    nvp = n.sum()
    if nvp == 0:
        return dict.fromkeys(NGTDM_NAMES, 0.0)
    present = n > 0
    p = (n / nvp)[present]
    s = s[present]
    lv = np.flatnonzero(present).astype(np.float64) + 1.0
    ngp = int(present.sum())
    ps = float((p * s).sum())
    s_total = float(s.sum())
    di = lv[:, None] - lv[None, :]
    pp = p[:, None] + p[None, :]
    f = {}
    f["Coarseness"] = _ratio(1.0, ps)
    if ngp > 1:
        f["Contrast"] = float((p[:, None] * p[None, :] * di**2).sum()) / (ngp * (ngp - 1)) * s_total / nvp
    else:
        f["Contrast"] = 0.0
    ip = lv * p
    f["Busyness"] = _ratio(ps, float(np.abs(ip[:, None] - ip[None, :]).sum()))
    weighted = p * s
    f["Complexity"] = float((np.abs(di) * (weighted[:, None] + weighted[None, :]) / pp).sum()) / nvp
    f["Strength"] = _ratio(float((pp * di**2).sum()), s_total)
    return f


def texture_features(g: GrayLevelVolume) -> dict[str, float]:
    """All 74 texture features, keyed ``{family}_{name}``."""
    nv = g.voxel_count
    blocks = {
        "glcm": glcm_features(glcm_matrix(g)),
        "glrlm": glrlm_features(glrlm_matrix(g), nv),
        "glszm": glszm_features(glszm_matrix(g), nv),
        "gldm": gldm_features(gldm_matrix(g), nv),
        "ngtdm": ngtdm_features(ngtdm_matrix(g)),
    }
    return {f"{fam}_{name}": blocks[fam][name] for fam, names in TEXTURE_FAMILIES.items() for name in names}
