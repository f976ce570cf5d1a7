"""Seeded point-set families: lattices, random cubes, helices, segment lattices,
capped cylinders, sphere samples, multiscale unions and k-ply ball systems.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``; that
algorithm name plus the seed is the reproducibility contract.  Jitter is a
symmetric uniform perturbation of every coordinate by at most
``jitter * spacing`` where ``spacing`` is the local sample spacing of the
family, drawn after the noiseless layout is built.
"""

from dataclasses import dataclass, field
import math
from typing import NamedTuple
import warnings

import numpy as np
from scipy.spatial import cKDTree

from .errors import BadParameters
from .geom import Point3, WeightedPoint
from .metrics import closest_pair, diameter
from .triangulation import affine_transport

KINDS = ("GRID", "RANDOM_CUBE", "HELIX", "SEGMENT_LATTICE", "CYLINDER",
         "SPHERE_SAMPLE", "UNION_MULTISCALE", "KPLY_BALLS")
RNG_NAME = "PCG64"
MAX_JITTER = 0.25
PRESET_JITTER = 2.0 ** -20
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class GenSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    jitter: float = 0.0


@dataclass(frozen=True)
class GenMeta:
    kind: str
    n: int
    params: dict
    seed: int
    jitter: float
    spacing: float
    expected_spread: tuple
    spread_measure: str = "spread"
    rescale: float = 1.0
    rng: str = RNG_NAME
    labels: tuple = None
    extra: dict = field(default_factory=dict)


class Generated(NamedTuple):
    points: tuple
    meta: GenMeta


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) % (1 << 64)))


def _int_param(params, name, lo, default=None):
    v = params.get(name, default)
    if v is None:
        raise BadParameters(f"missing parameter {name}")
    if isinstance(v, bool) or int(v) != v:
        raise BadParameters(f"{name} must be an integer, got {v!r}")
    if int(v) < lo:
        raise BadParameters(f"{name} must be >= {lo}, got {v}")
    return int(v)


def _float_param(params, name, default, positive=True):
    v = float(params.get(name, default))
    if not math.isfinite(v) or (positive and v <= 0):
        raise BadParameters(f"{name} must be a positive finite number, got {v!r}")
    return v


def _jittered(xyz, h, jitter, rng):
    """Perturb each coordinate uniformly in ``[-jitter*h, jitter*h]``."""
    if jitter == 0:
        return xyz
    h = np.broadcast_to(np.asarray(h, dtype=float).reshape(-1, 1), (len(xyz), 1))
    return xyz + rng.uniform(-1.0, 1.0, size=xyz.shape) * jitter * h


def _spread_band(base, slack):
    """Spread range reachable when every pair distance moves by at most ``slack``."""
    big, small = diameter(base), closest_pair(base)[2]
    if slack >= small:
        return (0.0, math.inf)
    return ((big - slack) / (small + slack), (big + slack) / (small - slack))


# -- layouts -------------------------------------------------------------------

def _grid(p):
    m = _int_param(p, "m", 2)
    ax = np.arange(1, m + 1, dtype=float)
    xyz = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    return xyz, 1.0, {"m": m}


def _helix(p):
    n = _int_param(p, "n", 4)
    pitch = _float_param(p, "pitch", 1e-3)
    i = np.arange(n)
    th = 2.0 * math.pi * i / n
    xyz = np.column_stack([np.cos(th), np.sin(th), pitch * i / n])
    return xyz, 2.0 * math.sin(math.pi / n), {"n": n, "pitch": pitch}


def _segment_lattice(p):
    n = _int_param(p, "n", 2)
    delta = _int_param(p, "delta", 2)
    if n % delta:
        raise BadParameters(f"n must be a multiple of delta (n={n}, delta={delta})")
    g = math.isqrt(n // delta)
    if g * g != n // delta:
        raise BadParameters(f"sqrt(n/delta) must be an integer (n/delta={n // delta})")
    t = -1.0 + (2.0 * np.arange(delta) + 1.0) / delta
    pts, labels = [], []
    for i in range(1, g + 1):
        for j in range(1, g + 1):
            sg = (-1.0) ** (i + j)
            c = np.array([2.0 * i, 2.0 * j, 0.0])
            pts.append(c + t[:, None] * np.array([sg, sg, 1.0]))
            labels += [(i, j)] * delta
    params = {"n": n, "delta": delta, "transport": bool(p.get("transport", False))}
    return np.concatenate(pts), 2.0 * math.sqrt(3.0) / delta, params, tuple(labels)


def _fib_cap(m, sign, z0):
    """``m`` area-uniform Fibonacci points on a unit hemisphere over height ``z0``."""
    i = np.arange(m) + 0.5
    c = 1.0 - i / m
    rho = np.sqrt(1.0 - c * c)
    th = GOLDEN_ANGLE * np.arange(m)
    return np.column_stack([rho * np.cos(th), rho * np.sin(th), z0 + sign * c])


def _cylinder(p):
    """Tilted rings on the side of a unit cylinder, hemispherical caps on the ends.

    Ring ``r`` at angle ``a`` sits at height ``base_r + tau * cos(a)`` with
    ``tau = tilt / (rings - 1)``, so consecutive rings are nearly cospherical
    in a way that makes every drum between them carry a quadratic number of
    Delaunay edges.  About a third of the points go to the side, the rest to
    the caps at the same area density.
    """
    n = _int_param(p, "n", 32)
    tilt = _float_param(p, "tilt", 0.25)
    if tilt >= 0.5:
        raise BadParameters(f"tilt must be < 0.5, got {tilt}")
    side = n / 3.0
    h = math.sqrt(2.0 * math.pi / side)
    per_ring = max(3, round(2.0 * math.pi / h))
    rings = max(2, round(side / per_ring))
    if per_ring * rings > n - 2:
        raise BadParameters(f"n={n} is too small for a capped cylinder")
    tau = tilt / (rings - 1)
    th = 2.0 * math.pi * np.arange(per_ring) / per_ring
    side_pts = []
    for r in range(rings):
        z = r / (rings - 1) * (1.0 - 2.0 * tau) + tau + tau * np.cos(th)
        side_pts.append(np.column_stack([np.cos(th), np.sin(th), z]))
    rest = n - per_ring * rings
    top = rest // 2
    xyz = np.concatenate(side_pts + [_fib_cap(top, 1.0, 1.0), _fib_cap(rest - top, -1.0, 0.0)])
    params = {"n": n, "tilt": tilt, "rings": rings, "per_ring": per_ring}
    return xyz, 2.0 * math.pi / per_ring, params


def _sphere(p):
    n = _int_param(p, "n", 4)
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(1.0 - z * z)
    th = GOLDEN_ANGLE * i
    xyz = np.column_stack([rho * np.cos(th), rho * np.sin(th), z])
    return xyz, math.sqrt(4.0 * math.pi / n), {"n": n}


def _union(p):
    """``k`` cubic grids of ``m^3`` points with spacings ``ratio**-g``, side by side in x."""
    k = _int_param(p, "k", 1)
    m = _int_param(p, "m", 2)
    ratio = _float_param(p, "ratio", 2.0)
    if ratio <= 1.0:
        raise BadParameters(f"ratio must be > 1, got {ratio}")
    ax = np.arange(m, dtype=float)
    unit = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    parts, hs, labels = [], [], []
    x0 = 0.0
    for g in range(k):
        s = ratio ** -g
        parts.append(unit * s + np.array([x0, 0.0, 0.0]))
        hs += [s] * len(unit)
        labels += [g] * len(unit)
        x0 += (m - 1) * s + 1.0  # gap of one coarsest spacing
    return np.concatenate(parts), np.array(hs), {"k": k, "m": m, "ratio": ratio}, tuple(labels)


def _cube_grid(n):
    side = max(1, round(n ** (1.0 / 3.0)))
    while side ** 3 < n:
        side += 1
    ax = np.arange(side, dtype=float)
    return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)[:n]


# -- balls -----------------------------------------------------------------------

def _ball_arrays(balls):
    if isinstance(balls, tuple) and len(balls) == 2 and isinstance(balls[0], np.ndarray):
        c, r = balls
        return np.asarray(c, dtype=float).reshape(-1, 3), np.asarray(r, dtype=float).ravel()
    bs = list(balls)
    c = np.array([b.xyz for b in bs], dtype=float).reshape(-1, 3)
    r = np.sqrt(np.maximum([getattr(b, "weight", 0.0) for b in bs], 0.0))
    return c, r


PLY_TOL = 1e-9


def _ply_at(tree, c, r, probes, rmax):
    """Max over ``probes`` of the number of closed balls containing the probe."""
    n = len(c)
    k = min(n, 16)
    reach = np.append(r * (1.0 + PLY_TOL) + PLY_TOL, -1.0)
    best = 0
    todo = probes
    while len(todo):
        d, idx = tree.query(todo, k=k, distance_upper_bound=rmax * (1.0 + PLY_TOL) + PLY_TOL)
        d, idx = d.reshape(len(todo), k), idx.reshape(len(todo), k)
        cnt = (d <= reach[idx]).sum(axis=1)
        best = max(best, int(cnt.max()))
        if k == n:
            break
        # probes whose k nearest all contain them may see more balls
        todo = todo[cnt == k]
        k = min(n, 4 * k)
    return best


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _witnesses(c, r, tree, rmax):
    """Lowest points of every ball, of every pairwise sphere circle, and all
    triple sphere intersections.

    The intersection of a family of balls is strictly convex, so its lowest
    point is one of these, and it lies in every ball of the family.
    """
    ez = np.array([0.0, 0.0, 1.0])
    out = [c, c - r[:, None] * ez]
    pairs = tree.query_pairs(2.0 * rmax, output_type="ndarray")
    if len(pairs):
        a, b = pairs[:, 0], pairs[:, 1]
        v = c[b] - c[a]
        d = np.linalg.norm(v, axis=1)
        ok = (d < r[a] + r[b]) & (d > np.abs(r[a] - r[b]))
        a, b, v, d = a[ok], b[ok], v[ok], d[ok]
        pairs = np.column_stack([a, b])
    if len(pairs):
        u = v / d[:, None]
        s = (d * d + r[a] ** 2 - r[b] ** 2) / (2.0 * d)
        mid = c[a] + s[:, None] * u
        rho = np.sqrt(np.maximum(r[a] ** 2 - s * s, 0.0))
        down = ez[None, :] - (u @ ez)[:, None] * u
        flat = np.linalg.norm(down, axis=1) < 1e-12
        down[flat] = (1.0, 0.0, 0.0)  # horizontal circle: every point is lowest
        out.append(mid - rho[:, None] * _unit(down))
        out.append(_triples(c, r, pairs))
    return np.concatenate(out)


def _triples(c, r, pairs):
    adj = [set() for _ in range(len(c))]
    for a, b in pairs:
        adj[a].add(int(b))
        adj[b].add(int(a))
    tri = [(a, b, x) for a, b in pairs for x in adj[a] & adj[b] if x > b]
    if not tri:
        return np.empty((0, 3))
    t = np.array(tri)
    p0, p1, p2 = c[t[:, 0]], c[t[:, 1]], c[t[:, 2]]
    r0, r1, r2 = r[t[:, 0]], r[t[:, 1]], r[t[:, 2]]
    # planes 2 (pj - p0) . x = |pj|^2 - |p0|^2 - rj^2 + r0^2
    e1, e2 = p1 - p0, p2 - p0
    nrm = np.cross(e1, e2)
    nn = np.einsum("ij,ij->i", nrm, nrm)
    good = nn > 1e-18 * np.einsum("ij,ij->i", e1, e1) * np.einsum("ij,ij->i", e2, e2)
    e1, e2, nrm, nn = e1[good], e2[good], nrm[good], nn[good]
    p0, r0, r1, r2 = p0[good], r0[good], r1[good], r2[good]
    h1 = (np.einsum("ij,ij->i", e1, e1) + r0 ** 2 - r1 ** 2) / 2.0
    h2 = (np.einsum("ij,ij->i", e2, e2) + r0 ** 2 - r2 ** 2) / 2.0
    # point q (relative to p0) in span(e1, e2) with e1.q = h1, e2.q = h2
    q = (h1[:, None] * np.cross(e2, nrm) + h2[:, None] * np.cross(nrm, e1)) / nn[:, None]
    lift = r0 ** 2 - np.einsum("ij,ij->i", q, q)
    keep = lift >= 0
    off = np.sqrt(np.maximum(lift, 0.0))[:, None] * _unit(nrm)
    base = p0 + q
    return np.concatenate([(base + off)[keep], (base - off)[keep]])


def measured_ply(balls, probe_resolution=None):
    """Largest number of closed balls sharing a point.

    Probes are the witnesses of :func:`_witnesses`, which make the count
    exact up to a relative tolerance of ``1e-9``, plus an optional grid of
    step ``probe_resolution`` over the bounding box.  Balls are
    ``WeightedPoint`` objects with ``weight = radius**2`` or a
    ``(centres, radii)`` array pair.
    """
    c, r = _ball_arrays(balls)
    if len(c) == 0:
        return 0
    rmax = float(r.max())
    tree = cKDTree(c)
    best = _ply_at(tree, c, r, _witnesses(c, r, tree, rmax), rmax)
    step = float(probe_resolution or 0.0)
    if step > 0 and rmax > 0:
        lo, hi = (c - r[:, None]).min(axis=0), (c + r[:, None]).max(axis=0)
        ys = np.arange(lo[1], hi[1] + step, step)
        zs = np.arange(lo[2], hi[2] + step, step)
        yz = np.stack(np.meshgrid(ys, zs, indexing="ij"), axis=-1).reshape(-1, 2)
        xs = np.arange(lo[0], hi[0] + step, step)
        per = max(1, 200000 // len(yz))
        for i in range(0, len(xs), per):
            x = np.repeat(xs[i:i + per], len(yz))
            slab = np.column_stack([x, np.tile(yz, (len(xs[i:i + per]), 1))])
            best = max(best, _ply_at(tree, c, r, slab, rmax))
    return best


def _kply(p, jitter, rng):
    """Jittered unit-grid centres; radii ``scale * (0.75 + 0.25 u)`` with the
    largest scale on a bisection whose ply is at most ``k``."""
    n = _int_param(p, "n", 2)
    k = _int_param(p, "k", 1)
    xyz = _jittered(_cube_grid(n), 1.0, jitter, rng)
    shape = 0.75 + 0.25 * rng.random(n)
    lo, hi = 0.0, 1.0
    while measured_ply((xyz, hi * shape)) <= k and hi < 64:
        lo, hi = hi, hi * 2.0
    for _ in range(20):
        mid = (lo + hi) / 2.0
        if measured_ply((xyz, mid * shape)) <= k:
            lo = mid
        else:
            hi = mid
    radii = lo * shape
    return xyz, radii, {"n": n, "k": k, "radius_scale": lo}, measured_ply((xyz, radii))


# -- entry point ---------------------------------------------------------------

def _as_points(xyz, weights=None):
    if weights is None:
        return tuple(Point3(*map(float, r), id=i) for i, r in enumerate(xyz))
    return tuple(WeightedPoint(Point3(*map(float, r), id=i), float(w))
                 for i, (r, w) in enumerate(zip(xyz, weights)))


def generate(spec):
    """Build the point set for ``spec``; returns ``(points, meta)``."""
    if spec.kind not in KINDS:
        raise BadParameters(f"kind must be one of {KINDS}, got {spec.kind!r}")
    jitter = float(spec.jitter)
    if not (math.isfinite(jitter) and 0.0 <= jitter < MAX_JITTER):
        raise BadParameters(f"jitter must lie in [0, {MAX_JITTER}), got {spec.jitter!r}")
    p = dict(spec.params)
    rng = _rng(spec.seed)
    labels, weights, extra = None, None, {}
    measure = "spread"

    if spec.kind == "RANDOM_CUBE":
        n = _int_param(p, "n", 2)
        side = _float_param(p, "side", (n / math.log(n)) ** (1.0 / 3.0) if n > 2 else 1.0)
        xyz = rng.random((n, 3)) * side
        h = side / n ** (1.0 / 3.0)
        xyz = _jittered(xyz, h, jitter, rng)
        params = {"n": n, "side": side}
        target = (n / math.log(n)) ** (1.0 / 3.0) if n > 2 else 1.0
        band = (target / 3.0, target * 3.0)
        measure = "delta_k"
        extra["k"] = max(2, math.ceil(math.log(n))) if n > 2 else 2
    elif spec.kind == "KPLY_BALLS":
        xyz, radii, params, ply = _kply(p, jitter, rng)
        h = 1.0
        weights = radii ** 2
        band = _spread_band(_cube_grid(params["n"]), 2.0 * math.sqrt(3.0) * jitter)
        extra["measured_ply"] = ply
    else:
        if spec.kind == "GRID":
            base, h, params = _grid(p)
        elif spec.kind == "HELIX":
            base, h, params = _helix(p)
        elif spec.kind == "SEGMENT_LATTICE":
            base, h, params, labels = _segment_lattice(p)
        elif spec.kind == "CYLINDER":
            base, h, params = _cylinder(p)
        elif spec.kind == "SPHERE_SAMPLE":
            base, h, params = _sphere(p)
        else:
            base, h, params, labels = _union(p)
        xyz = _jittered(base, h, jitter, rng)
        stretch = 1.0
        if spec.kind == "SEGMENT_LATTICE" and params["transport"]:
            stretch = float(params["delta"])
            base = base * np.array([1.0, 1.0, stretch])
        slack = 2.0 * math.sqrt(3.0) * jitter * float(np.max(h)) * stretch
        band = _spread_band(base, slack) if len(base) > 1 else (0.0, math.inf)
        if spec.kind == "GRID" and jitter == 0:
            band = (math.sqrt(3.0) * (params["m"] - 1),) * 2

    points = _as_points(xyz, weights)
    if spec.kind == "SEGMENT_LATTICE" and params["transport"]:
        f = np.diag([1.0, 1.0, float(params["delta"])])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            points = tuple(affine_transport(points, f))
        extra["transport_exact"] = not caught
        xyz = np.array([q.xyz for q in points])
    rescale = 1.0 / closest_pair(xyz)[2] if len(xyz) > 1 else 1.0
    meta = GenMeta(kind=spec.kind, n=len(points), params=params, seed=int(spec.seed),
                   jitter=jitter, spacing=float(np.min(h)), expected_spread=tuple(map(float, band)),
                   spread_measure=measure, rescale=rescale, labels=labels, extra=extra)
    return Generated(points, meta)
