"""Glue that turns the naive oracle's output into the package's layout."""
import numpy as np

import texture_oracle as O
from lesionqvt.features.texture import (
    DIRECTIONS,
    GLCM_NAMES,
    GLDM_NAMES,
    GLRLM_NAMES,
    GLSZM_NAMES,
    NGTDM_NAMES,
)

GENERIC = ("small", "large", "gln", "glnn", "sn", "snn", "pct", "glv", "sv", "ent",
           "lgl", "hgl", "slgl", "shgl", "llgl", "lhgl")
GLDM_GENERIC = ("small", "large", "gln", "snn", "glv", "sv", "ent",
                "lgl", "hgl", "slgl", "shgl", "llgl", "lhgl")


def oracle_features(levels):
    ng = int(levels.max())
    nv = int((levels > 0).sum())
    out = {}
    g = O.glcm_features(O.glcm(levels, ng), ng)
    for name in GLCM_NAMES:
        out[f"glcm_{name}"] = 0.0 if g is None else g[name]
    runs = O.glrlm(levels, ng)
    per = [O.size_family(r, nv) for r in runs.values()]
    for key, name in zip(GENERIC, GLRLM_NAMES):
        out[f"glrlm_{name}"] = sum(f[key] for f in per) / len(per)
    z = O.size_family(O.glszm(levels, ng), nv)
    for key, name in zip(GENERIC, GLSZM_NAMES):
        out[f"glszm_{name}"] = z[key]
    d = O.size_family(O.gldm(levels, ng), nv)
    for key, name in zip(GLDM_GENERIC, GLDM_NAMES):
        out[f"gldm_{name}"] = d[key]
    n, s = O.ngtdm(levels, ng)
    t = O.ngtdm_features(n, s)
    for name in NGTDM_NAMES:
        out[f"ngtdm_{name}"] = t[name]
    return out


def dense(counts, ng, width):
    m = np.zeros((ng, width))
    for (i, j), c in counts.items():
        m[i - 1, j - 1] += c
    return m


def oracle_matrices(levels):
    """Oracle matrices in the optimized layout (direction axis ordered as DIRECTIONS)."""
    ng = int(levels.max())
    glcm = O.glcm(levels, ng)
    runs = O.glrlm(levels, ng)
    max_run = max(j for r in runs.values() for (_, j) in r)
    zones = O.glszm(levels, ng)
    n, s = O.ngtdm(levels, ng)
    return {
        "GLCM": np.array([glcm[d] for d in DIRECTIONS]),
        "GLRLM": np.array([dense(runs[d], ng, max_run) for d in DIRECTIONS]),
        "GLSZM": dense(zones, ng, max(j for (_, j) in zones)),
        "GLDM": dense(O.gldm(levels, ng), ng, 27),
        "NGTDM": np.column_stack([n, s]).astype(float),
    }
