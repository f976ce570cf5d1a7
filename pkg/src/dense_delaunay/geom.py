"""Geometric primitives: exact predicates and approximate constructions.

The four predicates (:func:`orient3d`, :func:`in_sphere`,
:func:`power_in_sphere`, :func:`segment_behind`) never return a wrong sign.
They run a floating-point filter and fall back to exact integer arithmetic
when the filter cannot certify the sign.  The constructions
(:func:`circumsphere`, :func:`orthosphere`) are ordinary floating-point
solves and are never used for combinatorial decisions.

Orthogonality of two balls is taken in the squared form
``|pq|^2 = r(p)^2 + r(q)^2``.
"""

from dataclasses import dataclass
from enum import IntEnum
import math

import numpy as np

from . import _exact
from .errors import DegenerateInput

# Relative error bounds for the filtered float determinants.  Both are more
# than ten times the classical static bounds for these evaluation orders.
ORIENT_ERR = 1e-14
LIFTED_ERR = 1e-13


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float
    id: int = 0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("coordinates must be finite")

    @property
    def xyz(self):
        return (float(self.x), float(self.y), float(self.z))


@dataclass(frozen=True)
class WeightedPoint:
    point: Point3
    weight: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.weight):
            raise ValueError("weight must be finite")

    @property
    def xyz(self):
        return self.point.xyz

    @property
    def id(self):
        return self.point.id


@dataclass(frozen=True)
class Sphere:
    center: Point3
    sq_radius: float


@dataclass(frozen=True)
class Segment:
    a: Point3
    b: Point3

    def __post_init__(self):
        if self.a.xyz == self.b.xyz:
            raise ValueError("segment endpoints coincide")


def _xyz(p):
    if isinstance(p, (Point3, WeightedPoint)):
        return p.xyz
    x, y, z = p
    return (float(x), float(y), float(z))


def _weight(p):
    return float(p.weight) if isinstance(p, WeightedPoint) else 0.0


def _pid(p, default):
    if isinstance(p, (Point3, WeightedPoint)):
        return p.id
    return default


def _orient_float(a, b, c, d):
    u = [b[i] - a[i] for i in range(3)]
    v = [c[i] - a[i] for i in range(3)]
    w = [d[i] - a[i] for i in range(3)]
    det = (u[0] * (v[1] * w[2] - v[2] * w[1])
           - u[1] * (v[0] * w[2] - v[2] * w[0])
           + u[2] * (v[0] * w[1] - v[1] * w[0]))
    perm = (abs(u[0]) * (abs(v[1] * w[2]) + abs(v[2] * w[1]))
            + abs(u[1]) * (abs(v[0] * w[2]) + abs(v[2] * w[0]))
            + abs(u[2]) * (abs(v[0] * w[1]) + abs(v[1] * w[0])))
    return det, ORIENT_ERR * perm


def _orient_sign(a, b, c, d):
    det, err = _orient_float(a, b, c, d)
    if det > err:
        return 1
    if det < -err:
        return -1
    rows = _exact.to_lifted_ints([a, b, c, d])
    return _exact._sgn(_exact.orient(*rows))


def orient3d(a, b, c, d):
    """Sign of the signed volume of tetrahedron ``abcd``.

    POSITIVE for the right-handed unit tetrahedron
    ``(0,0,0), (1,0,0), (0,1,0), (0,0,1)``.
    """
    return Sign(_orient_sign(_xyz(a), _xyz(b), _xyz(c), _xyz(d)))


def _lifted_float(pts, ws):
    e, we = pts[4], ws[4]
    rows = []
    mags = []
    for p, wp in zip(pts[:4], ws[:4]):
        dx, dy, dz = p[0] - e[0], p[1] - e[1], p[2] - e[2]
        sq = dx * dx + dy * dy + dz * dz
        rows.append((dx, dy, dz, sq - (wp - we)))
        mags.append((abs(dx), abs(dy), abs(dz), sq + abs(wp) + abs(we)))

    def lap(r):
        x = [q[0] for q in r]
        y = [q[1] for q in r]
        z = [q[2] for q in r]
        h = [q[3] for q in r]

        def m(u, v, i, j, s):
            return u[i] * v[j] + s * u[j] * v[i]

        return (m(x, y, 0, 1, -1) * m(z, h, 2, 3, -1)
                - m(x, y, 0, 2, -1) * m(z, h, 1, 3, -1)
                + m(x, y, 0, 3, -1) * m(z, h, 1, 2, -1)
                + m(x, y, 1, 2, -1) * m(z, h, 0, 3, -1)
                - m(x, y, 1, 3, -1) * m(z, h, 0, 2, -1)
                + m(x, y, 2, 3, -1) * m(z, h, 0, 1, -1))

    def perm(r):
        x = [q[0] for q in r]
        y = [q[1] for q in r]
        z = [q[2] for q in r]
        h = [q[3] for q in r]

        def m(u, v, i, j):
            return u[i] * v[j] + u[j] * v[i]

        return (m(x, y, 0, 1) * m(z, h, 2, 3) + m(x, y, 0, 2) * m(z, h, 1, 3)
                + m(x, y, 0, 3) * m(z, h, 1, 2) + m(x, y, 1, 2) * m(z, h, 0, 3)
                + m(x, y, 1, 3) * m(z, h, 0, 2) + m(x, y, 2, 3) * m(z, h, 0, 1))

    return lap(rows), LIFTED_ERR * perm(mags)


def _lifted_sign(pts, ws, prio=None):
    det, err = _lifted_float(pts, ws)
    if prio is None:
        if det > err:
            return -1
        if det < -err:
            return 1
        rows = _exact.to_lifted_ints(list(pts), list(ws))
        return _exact.insphere_raw(*rows)
    if det > err:
        return -1
    if det < -err:
        return 1
    rows = _exact.to_lifted_ints(list(pts), list(ws))
    return _exact.insphere_sos(rows, prio)


def in_sphere(a, b, c, d, e):
    """Whether ``e`` is inside the circumsphere of positively oriented ``abcd``.

    Returns ZERO when the five points are cospherical.  For a negatively
    oriented ``abcd`` the sign is reversed.
    """
    pts = tuple(_xyz(p) for p in (a, b, c, d, e))
    return Sign(_lifted_sign(pts, (0.0,) * 5))


def in_sphere_sos(a, b, c, d, e):
    """:func:`in_sphere` with ties broken by symbolic perturbation on ``id``."""
    ps = (a, b, c, d, e)
    pts = tuple(_xyz(p) for p in ps)
    prio = tuple(_pid(p, i) for i, p in enumerate(ps))
    return Sign(_lifted_sign(pts, (0.0,) * 5, prio))


def power_in_sphere(a, b, c, d, e):
    """Conflict test of ball ``e`` against the orthosphere of ``a..d``.

    NEGATIVE iff ``e`` is further than orthogonal from the orthosphere,
    POSITIVE iff it is closer than orthogonal, ZERO when orthogonal.
    Unweighted arguments count as weight zero.
    """
    ps = (a, b, c, d, e)
    pts = tuple(_xyz(p) for p in ps)
    ws = tuple(_weight(p) for p in ps)
    return Sign(_lifted_sign(pts, ws))


def power_in_sphere_sos(a, b, c, d, e):
    ps = (a, b, c, d, e)
    pts = tuple(_xyz(p) for p in ps)
    ws = tuple(_weight(p) for p in ps)
    prio = tuple(_pid(p, i) for i, p in enumerate(ps))
    return Sign(_lifted_sign(pts, ws, prio))


def _solve_center(pts, ws):
    a = np.asarray(pts[0], dtype=float)
    rel = np.asarray(pts[1:], dtype=float) - a
    rhs = 0.5 * (np.einsum("ij,ij->i", rel, rel) - (np.asarray(ws[1:]) - ws[0]))
    c = np.linalg.solve(rel, rhs)
    return a + c, float(c @ c) - ws[0]


def circumsphere(a, b, c, d):
    pts = [_xyz(p) for p in (a, b, c, d)]
    if _orient_sign(*pts) == 0:
        raise DegenerateInput("coplanar points have no circumsphere")
    center, sq = _solve_center(pts, [0.0] * 4)
    return Sphere(Point3(*center), sq)


def orthosphere(a, b, c, d):
    """Sphere orthogonal (squared sense) to the four balls ``a..d``."""
    pts = [_xyz(p) for p in (a, b, c, d)]
    if _orient_sign(*pts) == 0:
        raise DegenerateInput("coplanar centers have no orthosphere")
    center, sq = _solve_center(pts, [_weight(p) for p in (a, b, c, d)])
    return Sphere(Point3(*center), sq)


def power_distance(x, s):
    """``|x - center|^2 - sq_radius``."""
    p = _xyz(x)
    c = s.center.xyz
    return sum((p[i] - c[i]) ** 2 for i in range(3)) - s.sq_radius


# -- segment occlusion ------------------------------------------------------

def _in_segment_2d(p, q, r, ax):
    """r collinear with pq (in projection ``ax``) lies on the closed segment."""
    u, v = ax
    return (min(p[u], q[u]) <= r[u] <= max(p[u], q[u])
            and min(p[v], q[v]) <= r[v] <= max(p[v], q[v]))


def _segments_meet_2d(p, q, r, s, ax):
    o = _exact.orient2
    d1, d2 = o(p, q, r, ax), o(p, q, s, ax)
    d3, d4 = o(r, s, p, ax), o(r, s, q, ax)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
            ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return ((d1 == 0 and _in_segment_2d(p, q, r, ax))
            or (d2 == 0 and _in_segment_2d(p, q, s, ax))
            or (d3 == 0 and _in_segment_2d(r, s, p, ax))
            or (d4 == 0 and _in_segment_2d(r, s, q, ax)))


def _point_in_triangle_2d(a, b, c, p, ax):
    o = _exact.orient2
    s = [o(a, b, p, ax), o(b, c, p, ax), o(c, a, p, ax)]
    return all(v >= 0 for v in s) or all(v <= 0 for v in s)


def _collinear_axes(p, q):
    k = max(range(3), key=lambda i: abs(q[i] - p[i]))
    return k


def _segments_meet_3d(p, q, r, s):
    """Closed segments ``pq`` and ``rs`` intersect (integer rows)."""
    if _exact.orient(p, q, r, s) != 0:
        return False
    for ax in ((0, 1), (1, 2), (2, 0)):
        # a projection that keeps both supporting lines apart from points
        if _exact.orient2(p, q, r, ax) or _exact.orient2(p, q, s, ax) or \
                _exact.orient2(r, s, p, ax) or _exact.orient2(r, s, q, ax):
            return _segments_meet_2d(p, q, r, s, ax)
    # all four points collinear: compare intervals on a varying axis
    k = _collinear_axes(p, q)
    lo1, hi1 = sorted((p[k], q[k]))
    lo2, hi2 = sorted((r[k], s[k]))
    return max(lo1, lo2) <= min(hi1, hi2)


def _segment_hits_triangle(x, a, b, p, q):
    """Closed segment ``pq`` meets closed triangle ``xab`` (integer rows)."""
    axes = _exact.projection_axes(x, a, b)
    if axes is None:
        # degenerate triangle: it is the longest of its three sides
        sides = [(x, a), (a, b), (x, b)]
        return any(_segments_meet_3d(u, v, p, q) for u, v in sides)
    o1 = _exact.orient(x, a, b, p)
    o2 = _exact.orient(x, a, b, q)
    if (o1 > 0 and o2 > 0) or (o1 < 0 and o2 < 0):
        return False
    if o1 == 0 and o2 == 0:
        if _point_in_triangle_2d(x, a, b, p, axes) or \
                _point_in_triangle_2d(x, a, b, q, axes):
            return True
        return any(_segments_meet_2d(u, v, p, q, axes)
                   for u, v in ((x, a), (a, b), (b, x)))
    s = [_exact.orient(p, q, x, a), _exact.orient(p, q, a, b),
         _exact.orient(p, q, b, x)]
    return all(v >= 0 for v in s) or all(v <= 0 for v in s)


def segment_behind(s, t, x):
    """True iff segment ``t`` meets the closed triangle ``conv{x, s}``.

    That is, ``s`` is behind ``t`` as seen from viewpoint ``x``.
    """
    rows = _exact.to_lifted_ints([_xyz(x), s.a.xyz, s.b.xyz, t.a.xyz, t.b.xyz])
    return _segment_hits_triangle(*rows)
