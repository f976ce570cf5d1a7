"""Delaunay and regular triangulations in 3-space.

Vertex ids are positions in the input sequence.  ``Point3.id`` only sets the
symbolic perturbation priority used to break degenerate predicate results,
so the triangulation is unique for a given input regardless of the seed.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
import logging
import math
import time
import warnings

import numpy as np

from . import _exact, _kernel
from .errors import (BadParameters, DuplicatePoint, EdgeNotFound, GeometryError,
                     SingularTransform, TooLarge, UnlabeledVertex)
from .geom import Point3, WeightedPoint, circumsphere
from .metrics import diameter

log = logging.getLogger(__name__)

BOUNDARY = -1
BRUTE_FORCE_MAX = 40
LOW_DIM_MAX = 400
CLIP_FACTOR = 64.0


@dataclass(frozen=True, eq=False)
class TetMesh:
    """A triangulation.  ``tets`` rows are positively oriented vertex ids.

    ``neighbors[t, i]`` is the tet across the face opposite ``tets[t, i]``,
    or ``BOUNDARY``.  Inputs without four affinely independent points give
    ``dimension < 3``, no tets, and their simplices in ``lower``.
    """

    vertices: tuple
    tets: np.ndarray
    neighbors: np.ndarray
    redundant: frozenset = frozenset()
    dimension: int = 3
    lower: np.ndarray = field(default_factory=lambda: np.empty((0, 1), dtype=np.int64))
    weighted: bool = False
    build_millis: float = 0.0
    xyz: np.ndarray = None
    weights: np.ndarray = None
    priority: np.ndarray = None

    @property
    def n(self):
        return len(self.vertices)

    def simplices(self):
        """Top-dimensional simplices of the complex."""
        return self.tets if self.dimension == 3 else self.lower

    def edges(self):
        return _faces_of(self.simplices(), 2, self.n)

    def triangles(self):
        return _faces_of(self.simplices(), 3, self.n)

    def tet_set(self):
        return {tuple(sorted(map(int, t))) for t in self.tets}

    def same_complex(self, other):
        if self.dimension != other.dimension:
            return False
        if self.dimension == 3:
            return np.array_equal(self.tets, other.tets)
        return np.array_equal(self.lower, other.lower)


@dataclass(frozen=True)
class ComplexityStats:
    n: int
    n_redundant: int
    edges: int
    triangles: int
    tets: int
    max_degree: int
    degree_histogram: dict
    build_millis: float


class EdgeKind(Enum):
    RELAXED = "relaxed"
    TENSE = "tense"


@dataclass(frozen=True)
class EdgeClass:
    kind: EdgeKind
    min_empty_sq_radius: float


# -- helpers ---------------------------------------------------------------

def _faces_of(simplices, size, n):
    """Unique sorted ``size``-subsets of the rows of ``simplices``."""
    if len(simplices) == 0 or simplices.shape[1] < size:
        return np.empty((0, size), dtype=np.int64)
    parts = [simplices[:, list(c)] for c in combinations(range(simplices.shape[1]), size)]
    faces = np.sort(np.concatenate(parts), axis=1)
    return np.unique(faces, axis=0)


def _coerce(points, weighted):
    """Return ``(vertices, xyz, weights, priority)`` for a point sequence."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] not in (3, 4):
            raise BadParameters("point array must have shape (n, 3) or (n, 4)")
        if arr.shape[1] == 4:
            verts = tuple(WeightedPoint(Point3(*r[:3], id=i), r[3]) for i, r in enumerate(arr))
        else:
            verts = tuple(Point3(*r, id=i) for i, r in enumerate(arr))
    else:
        verts = tuple(points)
    if not verts:
        raise BadParameters("need at least one point")
    xyz = np.array([v.xyz for v in verts], dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(xyz)):
        raise BadParameters("coordinates must be finite")
    w = np.zeros(len(verts))
    if weighted:
        w = np.array([getattr(v, "weight", 0.0) for v in verts], dtype=float)
    prio = np.array([v.id for v in verts], dtype=np.int64)
    if len(np.unique(prio)) != len(prio):
        raise BadParameters("point ids must be unique")
    return verts, xyz, w, prio


def _check_duplicates(xyz, w):
    key = np.column_stack([xyz, w])
    _, first, inv, counts = np.unique(key, axis=0, return_index=True,
                                      return_inverse=True, return_counts=True)
    if np.any(counts > 1):
        g = int(np.flatnonzero(counts > 1)[0])
        idx = np.flatnonzero(inv.ravel() == g)
        raise DuplicatePoint(int(idx[0]), int(idx[1]))


def _parity4(perm):
    inv = 0
    for i in range(4):
        for j in range(i + 1, 4):
            inv += perm[..., i] > perm[..., j]
    return inv % 2


def _canonical(tets):
    """Sort each row, restoring positive orientation by a final swap."""
    tets = np.asarray(tets, dtype=np.int64).reshape(-1, 4)
    order = np.argsort(tets, axis=1, kind="stable")
    out = np.take_along_axis(tets, order, axis=1)
    odd = _parity4(order).astype(bool)
    out[odd] = out[odd][:, [0, 1, 3, 2]]
    return out[np.lexsort(out.T[::-1])]


def _compute_neighbors(tets, n):
    """Face adjacency by sorting face keys."""
    t = len(tets)
    nbr = np.full((t, 4), BOUNDARY, dtype=np.int64)
    if t == 0:
        return nbr
    faces = []
    for i in range(4):
        cols = [c for c in range(4) if c != i]
        faces.append(np.sort(tets[:, cols], axis=1))
    f = np.stack(faces, axis=1).reshape(-1, 3)
    m = np.int64(n + 1)
    key = (f[:, 0] * m + f[:, 1]) * m + f[:, 2]
    order = np.argsort(key, kind="stable")
    ks = key[order]
    same = np.flatnonzero(ks[1:] == ks[:-1])
    if np.any(ks[2:] == ks[:-2]):
        raise GeometryError("a triangle is shared by more than two tets")
    a, b = order[same], order[same + 1]
    nbr.reshape(-1)[a] = b // 4
    nbr.reshape(-1)[b] = a // 4
    return nbr


def _seed_order(n, seed):
    return np.random.Generator(np.random.PCG64(int(seed) % (1 << 64))).permutation(n)


def _initial_simplex(ctx, order):
    """Positions of the first affinely independent prefix in ``order``."""
    r = ctx.rows
    picked = [int(order[0])]
    dim = 0
    for idx in order[1:]:
        i = int(idx)
        if dim == 0:
            picked.append(i)
            dim = 1
        elif dim == 1:
            if any(_exact._normal(r[picked[0]], r[picked[1]], r[i])):
                picked.append(i)
                dim = 2
        elif dim == 2:
            if _exact.orient(r[picked[0]], r[picked[1]], r[picked[2]], r[i]) != 0:
                picked.append(i)
                dim = 3
                break
    return picked, dim


# -- low-dimensional inputs --------------------------------------------------

def _lower_complex(ctx, dim, picked, n):
    """Brute-force complex for inputs spanning a point, line or plane."""
    r, pr = ctx.rows, ctx.prio
    if n > LOW_DIM_MAX:
        raise TooLarge(f"degenerate ({dim}-dimensional) input with n={n} > {LOW_DIM_MAX}")
    if dim == 0:
        return np.array([[picked[0]]], dtype=np.int64)
    if dim == 1:
        a, b = r[picked[0]], r[picked[1]]
        axis = max(range(3), key=lambda k: abs(b[k] - a[k]))
        out = []
        for i, j in combinations(range(n), 2):
            if all(_exact.below_line_sos((r[i], r[j], r[k]), (pr[i], pr[j], pr[k]), axis) <= 0
                   for k in range(n) if k != i and k != j):
                out.append((i, j))
        return np.array(out, dtype=np.int64).reshape(-1, 2)
    axes = _exact.projection_axes(r[picked[0]], r[picked[1]], r[picked[2]])
    out = []
    for i, j, k in combinations(range(n), 3):
        o = _exact.orient2(r[i], r[j], r[k], axes)
        if o == 0:
            continue
        ok = True
        for e in range(n):
            if e in (i, j, k):
                continue
            if _exact.incircle_sos((r[i], r[j], r[k], r[e]), (pr[i], pr[j], pr[k], pr[e]), axes) > 0:
                ok = False
                break
        if ok:
            out.append((i, j, k) if o > 0 else (i, k, j))
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def _finish(verts, xyz, w, prio, weighted, tets, lower, dim, t0):
    n = len(verts)
    if dim == 3:
        tets = _canonical(tets)
        used = np.unique(tets)
    else:
        tets = np.empty((0, 4), dtype=np.int64)
        lower = np.sort(lower, axis=1)
        lower = lower[np.lexsort(lower.T[::-1])] if len(lower) else lower
        used = np.unique(lower)
    redundant = frozenset(sorted(set(range(n)) - set(map(int, used)))) if weighted else frozenset()
    return TetMesh(
        vertices=verts,
        tets=tets,
        neighbors=_compute_neighbors(tets, n),
        redundant=redundant,
        dimension=dim,
        lower=lower,
        weighted=weighted,
        build_millis=(time.perf_counter() - t0) * 1000.0,
        xyz=xyz,
        weights=w,
        priority=prio,
    )


def _build(points, seed, weighted):
    t0 = time.perf_counter()
    verts, xyz, w, prio = _coerce(points, weighted)
    _check_duplicates(xyz, w)
    n = len(verts)
    order = _seed_order(n, seed)
    ctx = _exact.ExactContext(xyz, w if weighted else None, prio)
    picked, dim = _initial_simplex(ctx, order)
    if dim < 3:
        lower = _lower_complex(ctx, dim, picked, n)
        return _finish(verts, xyz, w, prio, weighted, None, lower, dim, t0)
    r = ctx.rows
    if _exact.orient(*(r[i] for i in picked)) < 0:
        picked[2], picked[3] = picked[3], picked[2]
    rest = order[~np.isin(order, picked)]
    full = np.concatenate([np.array(picked, dtype=np.int64), rest.astype(np.int64)])
    _exact.activate(ctx)
    try:
        tv, tn, alive, ntet, _, status = _kernel.build(
            np.ascontiguousarray(xyz), np.ascontiguousarray(w), weighted, full,
            np.uint64(int(seed) % (1 << 64)))
    finally:
        _exact.deactivate()
    if status != _kernel.OK:
        raise GeometryError(f"incremental build failed (status {status})")
    tv, alive = tv[:ntet], alive[:ntet]
    finite = alive & np.all(tv != n, axis=1)
    log.debug("built %d tets, %d exact predicate calls", int(finite.sum()), ctx.calls)
    return _finish(verts, xyz, w, prio, weighted, tv[finite], None, 3, t0)


def build_delaunay(points, seed=0):
    """Delaunay triangulation by randomized incremental insertion.

    Weights on ``WeightedPoint`` inputs are ignored.
    """
    return _build(points, seed, weighted=False)


def build_regular(points, seed=0):
    """Regular (weighted Delaunay) triangulation.

    Plain ``Point3`` inputs count as weight zero.  Points whose power cell is
    empty stay in ``vertices`` and are listed in ``redundant``.
    """
    return _build(points, seed, weighted=True)


# -- brute force -------------------------------------------------------------

def _lifted_dets(xyz, w, quads, others):
    """Float lifted determinants with a conservative error bound.

    ``quads`` is ``(m, 4)`` and ``others`` is ``(m,)``; row ``i`` tests point
    ``others[i]`` against tuple ``quads[i]``.
    """
    e = xyz[others]
    rel = xyz[quads] - e[:, None, :]
    hh = np.einsum("kij,kij->ki", rel, rel) - (w[quads] - w[others][:, None])
    m = np.concatenate([rel, hh[..., None]], axis=2)
    det = np.linalg.det(m)
    bound = 1e-10 * np.prod(np.abs(m).max(axis=1), axis=1)
    return det, bound


def verify_delaunay_bruteforce(points, seed=0, weighted=None):
    """All 4-tuples whose (ortho)sphere is empty under the perturbation order.

    ``seed`` is accepted for interface parity; the result does not depend on
    it.  ``weighted`` defaults to whether any input carries a weight.
    """
    t0 = time.perf_counter()
    if weighted is None:
        if isinstance(points, np.ndarray):
            weighted = points.ndim == 2 and points.shape[1] == 4
        else:
            weighted = any(isinstance(p, WeightedPoint) for p in points)
    verts, xyz, w, prio = _coerce(points, weighted)
    n = len(verts)
    if n > BRUTE_FORCE_MAX:
        raise TooLarge(f"brute-force oracle limited to n <= {BRUTE_FORCE_MAX}, got {n}")
    _check_duplicates(xyz, w)
    ctx = _exact.ExactContext(xyz, w if weighted else None, prio)
    r = ctx.rows
    picked, dim = _initial_simplex(ctx, np.arange(n))
    if dim < 3:
        lower = _lower_complex(ctx, dim, picked, n)
        return _finish(verts, xyz, w, prio, weighted, None, lower, dim, t0)

    quads = []
    for q in combinations(range(n), 4):
        o = _exact.orient(*(r[i] for i in q))
        if o > 0:
            quads.append(q)
        elif o < 0:
            quads.append((q[0], q[1], q[3], q[2]))
    quads = np.array(quads, dtype=np.int64).reshape(-1, 4)
    if n == 4:
        return _finish(verts, xyz, w, prio, weighted, quads, None, 3, t0)
    # every (tuple, non-incident point) pair
    qi, k = np.nonzero(np.ones((len(quads), n), dtype=bool))
    incident = np.any(quads[qi] == k[:, None], axis=1)
    qi, k = qi[~incident], k[~incident]
    rejected = np.zeros(len(quads), dtype=bool)
    for lo in range(0, len(qi), 200000):
        sl = slice(lo, lo + 200000)
        det, bound = _lifted_dets(xyz, w, quads[qi[sl]], k[sl])
        rejected[qi[sl][det < -bound]] = True
        for a, b in zip(qi[sl][np.abs(det) <= bound], k[sl][np.abs(det) <= bound]):
            if rejected[a]:
                continue
            q = quads[a]
            if _exact.insphere_sos([r[i] for i in (*q, b)], [prio[i] for i in (*q, b)]) > 0:
                rejected[a] = True
    return _finish(verts, xyz, w, prio, weighted, quads[~rejected], None, 3, t0)


# -- properties --------------------------------------------------------------

def empty_sphere_violations(mesh):
    """Tet/vertex pairs failing the perturbed empty (ortho)sphere test."""
    if mesh.dimension < 3 or len(mesh.tets) == 0:
        return []
    ctx = _exact.ExactContext(mesh.xyz, mesh.weights if mesh.weighted else None, mesh.priority)
    _exact.activate(ctx)
    try:
        bad = _kernel.empty_sphere_violations(
            np.ascontiguousarray(mesh.xyz), np.ascontiguousarray(mesh.weights), mesh.tets)
    finally:
        _exact.deactivate()
    return [(int(a), int(b)) for a, b in bad]


def stats(mesh):
    """Exact counts of the complex, with the counting relations checked."""
    edges = mesh.edges()
    tris = mesh.triangles()
    n_prime = mesh.n - len(mesh.redundant)
    e, f, t = len(edges), len(tris), len(mesh.tets)
    if n_prime - e + f - t != 1:
        raise AssertionError(f"Euler relation fails: {n_prime} - {e} + {f} - {t} != 1")
    if mesh.dimension == 3:
        if f > 2 * e - 2 * n_prime:
            raise AssertionError(f"triangle bound fails: {f} > 2*{e} - 2*{n_prime}")
        if t > e - n_prime:
            raise AssertionError(f"tet bound fails: {t} > {e} - {n_prime}")
    deg = np.bincount(edges.ravel(), minlength=mesh.n) if e else np.zeros(mesh.n, dtype=np.int64)
    values, counts = np.unique(deg, return_counts=True)
    return ComplexityStats(
        n=mesh.n,
        n_redundant=len(mesh.redundant),
        edges=e,
        triangles=f,
        tets=t,
        max_degree=int(deg.max()) if mesh.n else 0,
        degree_histogram={int(v): int(c) for v, c in zip(values, counts)},
        build_millis=mesh.build_millis,
    )


def crossing_edges(mesh, label):
    """Edges whose endpoints carry different labels.

    ``label`` maps vertex id to a side marker (any two distinct values) and
    may be a dict or a sequence indexed by vertex id.
    """
    if isinstance(label, dict):
        missing = [v for v in range(mesh.n) if v not in label]
        if missing:
            raise UnlabeledVertex(f"vertex {missing[0]} has no label")
        lab = [label[v] for v in range(mesh.n)]
    else:
        lab = list(label)
        if len(lab) < mesh.n:
            raise UnlabeledVertex(f"vertex {len(lab)} has no label")
    codes = {v: i for i, v in enumerate(dict.fromkeys(lab))}
    arr = np.array([codes[v] for v in lab[: mesh.n]])
    edges = mesh.edges()
    hit = edges[arr[edges[:, 0]] != arr[edges[:, 1]]]
    return len(hit), [tuple(map(int, e)) for e in hit]


def _clip(poly, a, b, c):
    """Keep the part of ``poly`` with ``a*x + b*y <= c``."""
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def _dist_to_polygon(poly):
    """Distance from the origin to a convex polygon (0 when inside)."""
    pts = np.asarray(poly, dtype=float)
    d = np.roll(pts, -1, axis=0) - pts
    cross = d[:, 0] * -pts[:, 1] - d[:, 1] * -pts[:, 0]
    if len(pts) >= 3 and (np.all(cross >= 0) or np.all(cross <= 0)):
        return 0.0
    dd = np.einsum("ij,ij->i", d, d)
    t = np.clip(np.einsum("ij,ij->i", -pts, d) / np.where(dd == 0, 1.0, dd), 0.0, 1.0)
    return float(np.min(np.linalg.norm(pts + t[:, None] * d, axis=1)))


def classify_edge(mesh, edge, pair_radius):
    """Smallest empty sphere through an edge's endpoints, against ``4 * pair_radius``.

    Its centre ranges over the edge's Voronoi face, which is cut out of the
    bisector plane by the other vertices of the incident simplices.  The face
    is clipped to a square of half-width ``64 * diameter``; a minimum on the
    clipping frame reports an infinite radius.
    """
    if mesh.weighted:
        raise BadParameters("edge classification is defined for unweighted meshes")
    u, v = sorted(map(int, edge))
    edges = mesh.edges()
    if not np.any((edges[:, 0] == u) & (edges[:, 1] == v)):
        raise EdgeNotFound(f"({u}, {v}) is not an edge of the mesh")
    xyz = mesh.xyz
    p, q = xyz[u], xyz[v]
    simp = mesh.simplices()
    inc = simp[np.any(simp == u, axis=1) & np.any(simp == v, axis=1)]
    link = sorted(set(map(int, inc.ravel())) - {u, v})
    half = float(np.sum((q - p) ** 2)) / 4.0
    axis = (q - p) / np.linalg.norm(q - p)
    helper = np.eye(3)[int(np.argmin(np.abs(axis)))]
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    mid = (p + q) / 2.0
    diam = diameter(xyz)
    big = CLIP_FACTOR * max(diam, math.sqrt(4 * half))
    poly = [(-big, -big), (big, -big), (big, big), (-big, big)]
    for s in link:
        g = xyz[s] - p
        rhs = float(xyz[s] @ xyz[s] - p @ p) - 2.0 * float(mid @ g)
        poly = _clip(poly, 2.0 * float(e1 @ g), 2.0 * float(e2 @ g), rhs)
        if not poly:
            break
    if not poly:
        # degenerate (perturbation-only) face: its centres are the circumcentres
        best = min(circumsphere(*(Point3(*xyz[i]) for i in t)).sq_radius for t in inc)
        sq = float(best)
    else:
        dist = _dist_to_polygon(poly)
        if dist >= big * (1 - 1e-9):
            sq = math.inf
        else:
            sq = dist * dist + half
    kind = EdgeKind.RELAXED if sq < 16.0 * pair_radius * pair_radius else EdgeKind.TENSE
    return EdgeClass(kind, sq)


def affine_transport(points, matrix, offset=(0.0, 0.0, 0.0)):
    """Move centres by ``x -> matrix @ x + offset`` keeping lifted heights.

    The new weight is ``|T p|^2 - |p|^2 + w``, so the regular triangulation
    keeps its vertex-id combinatorics.  A warning is issued when a weight is
    not exactly representable.
    """
    A = np.asarray(matrix, dtype=float)
    b = np.asarray(offset, dtype=float)
    if A.shape != (3, 3) or b.shape != (3,):
        raise BadParameters("matrix must be 3x3 and offset length 3")
    F = [[Fraction(float(x)) for x in row] for row in A]
    det = (F[0][0] * (F[1][1] * F[2][2] - F[1][2] * F[2][1])
           - F[0][1] * (F[1][0] * F[2][2] - F[1][2] * F[2][0])
           + F[0][2] * (F[1][0] * F[2][1] - F[1][1] * F[2][0]))
    if det == 0:
        raise SingularTransform("transform is not invertible")
    out = []
    inexact = 0
    for p in points:
        wp = p if isinstance(p, WeightedPoint) else WeightedPoint(p, 0.0)
        x = np.array(wp.xyz)
        y = A @ x + b
        exact_y = [sum((F[i][j] * Fraction(wp.xyz[j]) for j in range(3)), Fraction(float(b[i])))
                   for i in range(3)]
        if any(Fraction(float(y[i])) != exact_y[i] for i in range(3)):
            inexact += 1
        fy = [Fraction(float(c)) for c in y]
        fx = [Fraction(c) for c in wp.xyz]
        wnew = sum(c * c for c in fy) - sum(c * c for c in fx) + Fraction(wp.weight)
        if Fraction(float(wnew)) != wnew:
            inexact += 1
        out.append(WeightedPoint(Point3(*map(float, y), id=wp.id), float(wnew)))
    if inexact:
        warnings.warn(f"affine transport rounded {inexact} values; "
                      "combinatorics may differ from the input", RuntimeWarning, stacklevel=2)
    return out
