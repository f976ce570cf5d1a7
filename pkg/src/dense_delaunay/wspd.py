"""Same-level octree pairing into a well-separated pair decomposition.

Points are rescaled so the closest pair is at distance 1.  Level ``l`` of the
octree splits the tight bounding cube of width ``W`` into cells of width
``w = W / 2**l``.  Two nonempty cells of one level are paired when their
separation lies in ``[3 w, 6 w]`` (inclusive).

Two separation measures are available:

``"center-linf"`` (default)
    Chebyshev distance between cell centres.  For a point pair whose largest
    coordinate gap is ``x * w`` the cell index offset along that axis is
    ``floor(x)`` or ``ceil(x)``, so every level with ``3 <= x <= 6`` pairs
    them.  Halving ``w`` doubles ``x``, hence some level always does, and
    every pair at distance >= 5 is covered.
``"gap-l2"``
    Minimum Euclidean distance between the closed cubes.  Cell quantization
    can push a point pair below the band on one level and above it on the
    next, so coverage is not guaranteed.
"""

from collections.abc import Sequence
from dataclasses import dataclass
import itertools
import math

import numpy as np

from .errors import BadParameters, TooFewPoints
from .metrics import as_arrays, closest_pair, diameter

SHORT = 5.0
LOW_BAND = 9
HIGH_BAND = 36


@dataclass(frozen=True)
class Octree:
    origin: np.ndarray
    width: float
    depth: int
    scale: float
    cells: tuple  # per level: (n, 3) integer cell coordinates of each point

    def cell_members(self, level):
        """Map from cell coordinates to sorted point ids."""
        c = self.cells[level]
        keys, inv = np.unique(c, axis=0, return_inverse=True)
        order = np.argsort(inv.ravel(), kind="stable")
        splits = np.cumsum(np.bincount(inv.ravel(), minlength=len(keys)))[:-1]
        groups = np.split(order, splits)
        return {tuple(map(int, k)): g for k, g in zip(keys, groups)}


@dataclass(frozen=True)
class WspdPair:
    level: int
    a: tuple
    b: tuple
    p: np.ndarray
    q: np.ndarray
    cell_separation: float


@dataclass(frozen=True)
class CoverageReport:
    checked: int
    violations: list

    @property
    def ok(self):
        return not self.violations


def _cell_index(xyz, origin, width, level):
    """Cells closed on their upper side, so boundary points go to the smaller cell."""
    k = 1 << level
    w = width / k
    idx = np.ceil((xyz - origin) / w).astype(np.int64) - 1
    return np.clip(idx, 0, k - 1)


def build_octree(points):
    """Octree with ``ceil(log2 spread)`` levels below the root."""
    xyz, _ = as_arrays(points)
    if len(xyz) < 2:
        raise TooFewPoints("an octree needs at least two points")
    d = closest_pair(points)[2]
    scale = 1.0 / d
    xyz = xyz * scale
    spread = diameter(xyz)
    depth = max(0, math.ceil(math.log2(spread) - 1e-12))
    origin = xyz.min(axis=0)
    width = float(np.max(xyz.max(axis=0) - origin))
    cells = tuple(_cell_index(xyz, origin, width, l) for l in range(depth + 1))
    return Octree(origin=origin, width=width, depth=depth, scale=scale, cells=cells)


SEPARATIONS = ("center-linf", "gap-l2")


def _band_offsets(separation):
    """Cell offsets in the band, one per unordered pair, with separation in units of ``w``."""
    out = []
    for d in itertools.product(range(-7, 8), repeat=3):
        if d <= (0, 0, 0):
            continue
        if separation == "center-linf":
            sep = float(max(abs(c) for c in d))
        else:
            g = sum(max(abs(c) - 1, 0) ** 2 for c in d)
            if not LOW_BAND <= g <= HIGH_BAND:
                continue
            sep = math.sqrt(g)
        if 3.0 <= sep <= 6.0:
            out.append((d, sep))
    return out


_OFFSETS = {name: _band_offsets(name) for name in SEPARATIONS}


def _encode(c, k):
    return (c[..., 0] * k + c[..., 1]) * k + c[..., 2]


class PairList(Sequence):
    """Array-backed sequence of :class:`WspdPair` in (level, a, b) order."""

    def __init__(self, octree, level, a, b, separation):
        self.octree = octree
        self.level = level
        self.a = a
        self.b = b
        self.separation = separation
        self._members = {}

    def __len__(self):
        return len(self.level)

    def _cells(self, level):
        if level not in self._members:
            self._members[level] = self.octree.cell_members(level)
        return self._members[level]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        level = int(self.level[i])
        a, b = tuple(map(int, self.a[i])), tuple(map(int, self.b[i]))
        cells = self._cells(level)
        return WspdPair(level=level, a=a, b=b, p=cells[a], q=cells[b],
                        cell_separation=float(self.separation[i]))


def wspd_pairs(octree, separation="center-linf"):
    """Same-level nonempty cell pairs with separation in ``[3 w, 6 w]``."""
    if separation not in SEPARATIONS:
        raise BadParameters(f"separation must be one of {SEPARATIONS}")
    offsets = np.array([o for o, _ in _OFFSETS[separation]], dtype=np.int64)
    units = np.array([u for _, u in _OFFSETS[separation]])
    levels, aa, bb, seps = [], [], [], []
    for level in range(octree.depth + 1):
        k = 1 << level
        keys = np.unique(octree.cells[level], axis=0)
        codes = _encode(keys, k)
        other = keys[:, None, :] + offsets[None, :, :]
        inside = np.all((other >= 0) & (other < k), axis=2)
        oc = _encode(other, k)
        pos = np.minimum(np.searchsorted(codes, oc), len(codes) - 1)
        ci, oi = np.nonzero(inside & (codes[pos] == oc))
        if len(ci) == 0:
            continue
        a, b = keys[ci], other[ci, oi]
        ca, cb = codes[ci], oc[ci, oi]
        swap = cb < ca
        a[swap], b[swap] = b[swap], a[swap].copy()
        lo, hi = np.minimum(ca, cb), np.maximum(ca, cb)
        order = np.lexsort((hi, lo))
        levels.append(np.full(len(order), level))
        aa.append(a[order])
        bb.append(b[order])
        seps.append(units[oi[order]] * (octree.width / k))
    if not levels:
        empty = np.empty((0, 3), dtype=np.int64)
        return PairList(octree, np.empty(0, dtype=np.int64), empty, empty, np.empty(0))
    return PairList(octree, np.concatenate(levels), np.concatenate(aa),
                    np.concatenate(bb), np.concatenate(seps))


def _far_pairs(xyz):
    n = len(xyz)
    i, j = np.triu_indices(n, 1)
    d = xyz[i] - xyz[j]
    far = np.einsum("ij,ij->i", d, d) >= SHORT * SHORT
    return i[far], j[far]


def coverage_check(pairs, points, scale=None):
    """Point pairs at rescaled distance >= 5 not separated by any WSPD pair.

    ``scale`` defaults to the reciprocal closest-pair distance.
    """
    xyz, _ = as_arrays(points)
    n = len(xyz)
    if scale is None:
        scale = 1.0 / closest_pair(points)[2]
    i, j = _far_pairs(xyz * scale)
    covered = np.zeros(len(i), dtype=bool)
    if isinstance(pairs, PairList):
        tree = pairs.octree
        for level in np.unique(pairs.level):
            k = 1 << int(level)
            sel = pairs.level == level
            pc = _encode(tree.cells[level], k)
            cells = np.unique(pc)
            rank = np.searchsorted(cells, pc)
            m = np.int64(len(cells))
            ra = np.searchsorted(cells, _encode(pairs.a[sel], k))
            rb = np.searchsorted(cells, _encode(pairs.b[sel], k))
            keys = np.unique(np.minimum(ra, rb) * m + np.maximum(ra, rb))
            todo = ~covered
            ri, rj = rank[i[todo]], rank[j[todo]]
            covered[todo] = np.isin(np.minimum(ri, rj) * m + np.maximum(ri, rj), keys)
    else:
        codes = []
        for pr in pairs:
            a = np.repeat(pr.p, len(pr.q))
            b = np.tile(pr.q, len(pr.p))
            codes.append(np.minimum(a, b).astype(np.int64) * n + np.maximum(a, b))
        if codes:
            covered = np.isin(i.astype(np.int64) * n + j, np.unique(np.concatenate(codes)))
    bad = [(int(a), int(b)) for a, b in zip(i[~covered], j[~covered])]
    return CoverageReport(checked=len(i), violations=bad)
