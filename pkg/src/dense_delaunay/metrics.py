"""Spread, order-k spread, closest pair and diameter."""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial import QhullError
from scipy.spatial.distance import cdist

from .errors import BadK, DuplicatePoint, TooFewPoints


@dataclass(frozen=True)
class SpreadReport:
    diameter: float
    closest_pair: tuple
    spread: float


@dataclass(frozen=True)
class OrderKReport:
    k: int
    r_hat: float
    bounds: tuple
    delta_k_hat: float


def as_arrays(points):
    """``(xyz, ids)`` for a point sequence or an ``(n, 3+)`` array."""
    if isinstance(points, np.ndarray):
        xyz = np.asarray(points, dtype=float)[:, :3]
        return np.ascontiguousarray(xyz), np.arange(len(xyz))
    pts = list(points)
    xyz = np.array([p.xyz for p in pts], dtype=float).reshape(-1, 3)
    return xyz, np.array([p.id for p in pts], dtype=np.int64)


def _sq_exact(a, b):
    return sum((Fraction(float(x)) - Fraction(float(y))) ** 2 for x, y in zip(a, b))


def diameter(points):
    """Largest pairwise distance, searched over convex-hull vertices."""
    xyz = as_arrays(points)[0]
    if len(xyz) < 2:
        raise TooFewPoints("diameter needs at least two points")
    try:
        cand = xyz[ConvexHull(xyz).vertices]
    except (QhullError, ValueError):
        cand = xyz
    best = 0.0
    for lo in range(0, len(cand), 512):
        best = max(best, float(cdist(cand[lo:lo + 512], cand).max()))
    return best


def closest_pair(points):
    """``(id_a, id_b, distance)`` with ties broken by the lexicographic id pair."""
    xyz, ids = as_arrays(points)
    n = len(xyz)
    if n < 2:
        raise TooFewPoints("closest pair needs at least two points")
    tree = cKDTree(xyz)
    dist, idx = tree.query(xyz, k=2)
    if np.any(dist[:, 1] == 0.0):
        i = int(np.flatnonzero(dist[:, 1] == 0.0)[0])
        j = int(np.flatnonzero(np.all(xyz == xyz[i], axis=1) & (np.arange(n) != i))[0])
        raise DuplicatePoint(min(i, j), max(i, j))
    d = float(dist[:, 1].min())
    cands = tree.query_pairs(d * (1 + 1e-9) + 1e-300, output_type="ndarray")
    best = None
    for a, b in cands:
        sq = _sq_exact(xyz[a], xyz[b])
        pair = tuple(sorted((int(ids[a]), int(ids[b]))))
        key = (sq, pair)
        if best is None or key < best:
            best = key
    sq, (ia, ib) = best
    return ia, ib, math.sqrt(sq)


def spread(points):
    """Diameter over closest-pair distance."""
    xyz, ids = as_arrays(points)
    if len(xyz) < 2:
        raise TooFewPoints("spread needs at least two points")
    cp = closest_pair(points)
    diam = diameter(xyz)
    return SpreadReport(diameter=diam, closest_pair=cp, spread=diam / cp[2])


def order_k_spread(points, k):
    """Order-k spread with balls restricted to input-point centres.

    ``r_hat`` is the least distance from a point to its ``k``-th nearest
    point (itself first).  The optimal k-enclosing radius lies in
    ``[r_hat / 2, r_hat]``.
    """
    xyz, _ = as_arrays(points)
    n = len(xyz)
    if not isinstance(k, (int, np.integer)) or k < 2 or k > n:
        raise BadK(f"k must be an integer in [2, {n}], got {k}")
    dist, _ = cKDTree(xyz).query(xyz, k=int(k))
    r_hat = float(dist[:, int(k) - 1].min())
    diam = diameter(xyz)
    return OrderKReport(k=int(k), r_hat=r_hat, bounds=(r_hat / 2.0, r_hat),
                        delta_k_hat=diam / r_hat if r_hat > 0 else math.inf)
