"""Curve skeletons and their decomposition into branches."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage as ndi

from ..roi import structure
from ..volume import BinaryMask

DEFAULT_MIN_SPUR = 3
DEFAULT_SMOOTHING = 3.0
# the distance map reaches the nearest background voxel centre, about half a
# voxel past the surface the occupancy crossing finds
RADIUS_BIAS = 0.5

ENDPOINT, REGULAR, JUNCTION, ISOLATED = "endpoint", "regular", "junction", "isolated"

_OFFSETS = np.array(
    [(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1) if (a, b, c) != (0, 0, 0)]
)


_CUBE = np.ones((3, 3, 3), dtype=bool)
_FACE6 = ndi.generate_binary_structure(3, 1)
_N18 = ndi.generate_binary_structure(3, 2)
_FACES = [(0, 1, 1), (2, 1, 1), (1, 0, 1), (1, 2, 1), (1, 1, 0), (1, 1, 2)]
_WEIGHTS = 1 << np.arange(27, dtype=np.int64)
_simple_cache: dict[int, bool] = {}


def _is_simple(nb: np.ndarray) -> bool:
    """26/6 simple-point test on a 3x3x3 neighbourhood (centre ignored)."""
    key = int(nb.ravel() @ _WEIGHTS) & ~(1 << 13)
    hit = _simple_cache.get(key)
    if hit is not None:
        return hit
    fg = nb.copy()
    fg[1, 1, 1] = False
    ok = ndi.label(fg, structure=_CUBE)[1] == 1
    if ok:
        bg = ~nb & _N18
        bg[1, 1, 1] = False
        lab = ndi.label(bg, structure=_FACE6)[0]
        ok = len({lab[f] for f in _FACES} - {0}) == 1
    _simple_cache[key] = ok
    return ok


def _thin(x: np.ndarray) -> np.ndarray:
    # Directional sequential thinning. Voxels with one 26-neighbour at the
    # start of a subiteration are kept as curve ends. A voxel is peeled from
    # side d only while something remains in the 3x3 layer on the opposite
    # side, so structures already one voxel thick along d are left alone
    # instead of being eaten lengthwise from their tips.
    x = np.pad(x, 1)
    changed = True
    while changed:
        changed = False
        for axis in range(3):
            for step in (-1, 1):
                ahead = np.roll(x, -step, axis=axis)
                border = x & ~ahead
                if not border.any():
                    continue
                nbr = ndi.convolve(x.astype(np.int64), _CUBE.astype(np.int64), mode="constant") - 1
                back = [slice(None)] * 3
                back[axis] = 0 if step == 1 else 2
                back = tuple(back)
                for i, j, k in np.argwhere(border & (nbr > 1)):
                    nb = x[i - 1 : i + 2, j - 1 : j + 2, k - 1 : k + 2]
                    if nb[back].any() and _is_simple(nb):
                        x[i, j, k] = False
                        changed = True
    # leftovers: drop simple voxels with 3+ neighbours, which never shortens
    # a one-voxel-wide line from its tip
    changed = True
    while changed:
        changed = False
        for i, j, k in np.argwhere(x):
            nb = x[i - 1 : i + 2, j - 1 : j + 2, k - 1 : k + 2]
            if nb.sum() - 1 >= 3 and _is_simple(nb):
                x[i, j, k] = False
                changed = True
    return x[1:-1, 1:-1, 1:-1]


def skeletonize(m: BinaryMask) -> BinaryMask:
    """Topology-preserving 3D thinning to 1-voxel-wide 26-connected curves."""
    if not m.data.any():
        return m
    idx = np.nonzero(m.data)
    box = tuple(slice(int(i.min()), int(i.max()) + 1) for i in idx)
    out = np.zeros(m.dims, dtype=bool)
    out[box] = _thin(np.array(m.data[box], dtype=bool))
    return m.with_data(out)


@dataclass
class Branch:
    """One skeleton branch.

    ``voxels`` are grid indices in path order; ``path`` the same in mm.
    ``curve`` is the measured 3D curve: the path smoothed and, at free
    ends, extended to the vessel surface. Lengths are taken on ``curve``.
    """

    voxels: np.ndarray
    path: np.ndarray
    curve: np.ndarray
    end_kinds: tuple[str, str]
    closed: bool = False

    @property
    def geodesic_mm(self) -> float:
        return float(np.linalg.norm(np.diff(self.curve, axis=0), axis=1).sum())

    @property
    def chord_mm(self) -> float:
        return float(np.linalg.norm(self.curve[-1] - self.curve[0]))

    @property
    def voxel_count(self) -> int:
        return len(self.voxels) - 1 if self.closed else len(self.voxels)


@dataclass
class SkeletonGraph:
    voxels: np.ndarray
    degree: np.ndarray
    branches: list[Branch] = field(default_factory=list)
    n_endpoints: int = 0
    n_junctions: int = 0
    n_isolated: int = 0
    n_components: int = 0
    n_cycles: int = 0

    def kinds(self) -> list[str]:
        return [_kind(int(d)) for d in self.degree]


def _kind(deg: int) -> str:
    if deg == 0:
        return ISOLATED
    if deg == 1:
        return ENDPOINT
    if deg == 2:
        return REGULAR
    return JUNCTION


def _smooth(points: np.ndarray, sigma: float, closed: bool) -> np.ndarray:
    if sigma <= 0 or len(points) < 3:
        return points.copy()
    if closed:
        ring = points[:-1]
        out = ndi.gaussian_filter1d(ring, sigma, axis=0, mode="wrap")
        return np.vstack([out, out[:1]])
    # point reflection about each end keeps the end fixed and linear trends unbiased
    k = min(len(points) - 1, int(np.ceil(4 * sigma)))
    head = 2 * points[0] - points[1 : k + 1][::-1]
    tail = 2 * points[-1] - points[-k - 1 : -1][::-1]
    ext = np.vstack([head, points, tail])
    out = ndi.gaussian_filter1d(ext, sigma, axis=0, mode="nearest")
    return out[k : k + len(points)]


def _tip_extension(end_mm: np.ndarray, direction: np.ndarray, radii: np.ndarray, spacing: np.ndarray) -> float:
    # march to the vessel surface (interpolated occupancy crosses 1/2) and
    # stop where the remaining run equals the inscribed radius
    step = 0.1 * float(spacing.min())
    reach = 2.0 * float(radii.max()) + 4.0 * float(spacing.max())
    t = np.arange(0.0, reach, step)
    pts = ((end_mm[None, :] + t[:, None] * direction[None, :]) / spacing).T
    inside = ndi.map_coordinates((radii > 0).astype(np.float64), pts, order=1, cval=0.0)
    out = np.flatnonzero(inside < 0.5)
    if out.size == 0:
        return 0.0
    i = int(out[0])
    if i == 0:
        return 0.0
    # linear interpolation of the crossing
    exit_t = t[i - 1] + step * (inside[i - 1] - 0.5) / (inside[i - 1] - inside[i])
    r_end = float(ndi.map_coordinates(radii, pts[:, :1], order=1)[0]) - RADIUS_BIAS * float(spacing.min())
    return max(0.0, exit_t - r_end)


def _extend(curve: np.ndarray, at_start: bool, radii: np.ndarray, spacing: np.ndarray, end_mm: np.ndarray) -> np.ndarray:
    if len(curve) < 2:
        return curve
    pts = curve if not at_start else curve[::-1]
    k = min(3, len(pts) - 1)
    d = pts[-1] - pts[-1 - k]
    n = np.linalg.norm(d)
    if n == 0:
        return curve
    d = d / n
    length = _tip_extension(end_mm, d, radii, spacing)
    if length <= 0:
        return curve
    pts = np.vstack([pts, pts[-1] + d * length])
    return pts if not at_start else pts[::-1]


def _decompose_once(sk: np.ndarray):
    coords = np.argwhere(sk)
    index = {tuple(c): i for i, c in enumerate(coords.tolist())}
    nbrs = []
    for c in coords:
        cand = c + _OFFSETS
        nbrs.append([index[q] for q in map(tuple, cand.tolist()) if q in index])
    deg = np.array([len(n) for n in nbrs], dtype=np.int64)
    n = len(coords)

    # nodes: each endpoint / isolated voxel alone, 26-adjacent junction voxels merged
    node_of = np.full(n, -1, dtype=np.int64)
    n_nodes = 0
    junction_nodes = set()
    for i in range(n):
        if deg[i] == 2 or node_of[i] >= 0:
            continue
        node_of[i] = n_nodes
        if deg[i] >= 3:
            junction_nodes.add(n_nodes)
            q = deque([i])
            while q:
                u = q.popleft()
                for w in nbrs[u]:
                    if deg[w] >= 3 and node_of[w] < 0:
                        node_of[w] = n_nodes
                        q.append(w)
        n_nodes += 1

    visited = np.zeros(n, dtype=bool)
    paths: list[tuple[list[int], bool]] = []
    direct = set()
    for u in range(n):
        if node_of[u] < 0:
            continue
        for w in nbrs[u]:
            if node_of[w] >= 0:
                key = (min(node_of[u], node_of[w]), max(node_of[u], node_of[w]))
                if node_of[u] != node_of[w] and key not in direct:
                    direct.add(key)
                    paths.append(([u, w], False))
                continue
            if visited[w]:
                continue
            path = [u, w]
            visited[w] = True
            prev, cur = u, w
            while node_of[cur] < 0:
                nxt = [q for q in nbrs[cur] if q != prev and not (node_of[q] < 0 and visited[q])]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                path.append(cur)
                if node_of[cur] < 0:
                    visited[cur] = True
            start, end = node_of[path[0]], node_of[path[-1]]
            if start == end and start in junction_nodes and len(path) <= 3:
                continue  # micro-loop inside a thick crossing
            paths.append((path, False))

    n_loops = 0
    for s in range(n):
        if node_of[s] >= 0 or visited[s]:
            continue
        path = [s]
        visited[s] = True
        prev, cur = -1, s
        while True:
            nxt = [q for q in nbrs[cur] if q != prev]
            if not nxt:
                break
            q = nxt[0] if nxt[0] != s or len(path) > 2 else nxt[-1]
            path.append(q)
            if q == s:
                break
            visited[q] = True
            prev, cur = cur, q
        paths.append((path, True))
        n_loops += 1

    return coords, deg, node_of, junction_nodes, n_nodes, n_loops, paths


def branch_decompose(
    skeleton: BinaryMask,
    min_spur: int = DEFAULT_MIN_SPUR,
    radii: np.ndarray | None = None,
    smoothing: float = DEFAULT_SMOOTHING,
) -> SkeletonGraph:
    """Split a skeleton into branches at endpoints and junctions.

    Voxels are classified by their count of 26-neighbours on the skeleton.
    Endpoint-to-junction spurs with fewer than ``min_spur`` voxels (junction
    excluded) are removed once and the classification is redone. ``radii``
    (mm, typically the vessel distance map) lets free branch ends reach the
    vessel surface instead of stopping where thinning eroded the tip.
    """
    sk = np.array(skeleton.data, dtype=bool)
    result = _decompose_once(sk)
    if min_spur > 0:
        coords, deg, node_of, junction_nodes, _, _, paths = result
        pruned = False
        for path, closed in paths:
            if closed:
                continue
            a, b = path[0], path[-1]
            for end, other in ((a, path[:-1]), (b, path[1:])):
                far = b if end == a else a
                if deg[end] == 1 and node_of[far] in junction_nodes and len(other) < min_spur:
                    sk[tuple(coords[other].T)] = False
                    pruned = True
                    break
        if pruned:
            result = _decompose_once(sk)

    coords, deg, node_of, junction_nodes, n_nodes, n_loops, paths = result
    spacing = np.asarray(skeleton.spacing)
    branches = []
    for path, closed in paths:
        vox = coords[path]
        mm = vox * spacing
        curve = _smooth(mm, smoothing, closed)
        kinds = (_kind(int(deg[path[0]])), _kind(int(deg[path[-1]])))
        if closed:
            kinds = (REGULAR, REGULAR)
        elif radii is not None:
            if kinds[0] == ENDPOINT:
                curve = _extend(curve, True, radii, spacing, mm[0])
            if kinds[-1] == ENDPOINT:
                curve = _extend(curve, False, radii, spacing, mm[-1])
        branches.append(Branch(vox, mm, curve, kinds, closed))

    n_components = int(ndi.label(sk, structure=structure(26))[1]) if sk.any() else 0
    vertices = n_nodes + n_loops
    return SkeletonGraph(
        voxels=coords,
        degree=deg,
        branches=branches,
        n_endpoints=int((deg == 1).sum()),
        n_junctions=len(junction_nodes),
        n_isolated=int((deg == 0).sum()),
        n_components=n_components,
        n_cycles=len(branches) - vertices + n_components,
    )
