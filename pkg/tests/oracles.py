"""Independent reference computations used by the tests.

Everything here works in exact rationals or by plain enumeration and shares
no code with the package.
"""

from fractions import Fraction
from itertools import combinations
import math

import numpy as np


def F(v):
    return Fraction(float(v))


def det(rows):
    """Exact determinant by fraction-valued Gaussian elimination."""
    m = [[F(x) if not isinstance(x, Fraction) else x for x in r] for r in rows]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        out *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return sign * out


def solve(A, b):
    """Exact solution of a square system, or None when singular."""
    n = len(A)
    m = [[F(x) if not isinstance(x, Fraction) else x for x in row] + [F(v) if not isinstance(v, Fraction) else v]
         for row, v in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * bb for a, bb in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def sgn(v):
    return (v > 0) - (v < 0)


def orient(a, b, c, d):
    a = [F(x) for x in a]
    return sgn(det([[F(p[i]) - a[i] for i in range(3)] for p in (b, c, d)]))


def ortho_center(pts, ws):
    """Exact centre and squared radius of the sphere orthogonal to four balls."""
    p0 = [F(x) for x in pts[0]]
    A, b = [], []
    for p, w in zip(pts[1:], ws[1:]):
        q = [F(x) for x in p]
        A.append([2 * (q[i] - p0[i]) for i in range(3)])
        b.append(sum(x * x for x in q) - sum(x * x for x in p0) - F(w) + F(ws[0]))
    c = solve(A, b)
    if c is None:
        return None, None
    r2 = sum((p0[i] - c[i]) ** 2 for i in range(3)) - F(ws[0])
    return c, r2


def power_sign(pts, ws):
    """Sign of the conflict test: +1 when ball 4 is closer than orthogonal.

    Reversed for negatively oriented first four centres, like the package
    convention.  Returns None for coplanar centres.
    """
    o = orient(*pts[:4])
    if o == 0:
        return None
    c, r2 = ortho_center(pts[:4], ws[:4])
    e = [F(x) for x in pts[4]]
    pw = sum((e[i] - c[i]) ** 2 for i in range(3)) - r2 - F(ws[4])
    return -sgn(pw) * o


def segment_meets_triangle(x, a, b, p, q):
    """Exact parametric test; None when the supporting lines are parallel."""
    x, a, b, p, q = ([F(v) for v in u] for u in (x, a, b, p, q))
    # x + u (a - x) + v (b - x) = p + s (q - p)
    A = [[a[i] - x[i], b[i] - x[i], p[i] - q[i]] for i in range(3)]
    rhs = [p[i] - x[i] for i in range(3)]
    sol = solve(A, rhs)
    if sol is None:
        return None
    u, v, s = sol
    return u >= 0 and v >= 0 and u + v <= 1 and 0 <= s <= 1


def brute_closest_and_diameter(xyz):
    d = np.sqrt(((xyz[:, None, :] - xyz[None, :, :]) ** 2).sum(-1))
    iu = np.triu_indices(len(xyz), 1)
    return float(d[iu].min()), float(d[iu].max())


def min_enclosing_radius(pts):
    """Exact smallest enclosing ball radius of a small set by enumeration."""
    pts = [tuple(map(float, p)) for p in pts]
    if len(pts) == 1:
        return 0.0
    best = math.inf
    for size in (2, 3, 4):
        for sub in combinations(pts, size):
            c = _ball_through(sub)
            if c is None:
                continue
            r = max(math.dist(c, s) for s in sub)
            if r < best and all(math.dist(c, p) <= r * (1 + 1e-12) + 1e-12 for p in pts):
                best = r
    return best


def _ball_through(sub):
    """Centre of the smallest sphere through all points of ``sub``."""
    P = np.array(sub, dtype=float)
    if len(P) == 2:
        return tuple((P[0] + P[1]) / 2)
    base = P[0]
    V = P[1:] - base
    # centre = base + V^T lam with 2 V V^T lam = |V|^2
    G = 2.0 * V @ V.T
    rhs = (V * V).sum(1)
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return None
    return tuple(base + V.T @ lam)


def min_k_enclosing_radius(pts, k):
    """Smallest radius of a ball containing ``k`` of the points.

    The optimal ball is the smallest enclosing ball of its contents, so its
    boundary passes through two, three or four of the points; try them all.
    """
    pts = [tuple(map(float, p)) for p in pts]
    P = np.array(pts)
    best = math.inf
    for size in (2, 3, 4):
        for sub in combinations(pts, size):
            c = _ball_through(sub)
            if c is None:
                continue
            r = max(math.dist(c, s) for s in sub)
            if r >= best:
                continue
            inside = np.sum(np.sqrt(((P - c) ** 2).sum(1)) <= r * (1 + 1e-12))
            if inside >= k:
                best = r
    return best


def as_ints(points):
    """Scale dyadic coordinates to integers by one common power of two."""
    ratios = [float(v).as_integer_ratio() for p in points for v in p]
    den = max(d for _, d in ratios)
    it = iter(n * (den // d) for n, d in ratios)
    return [[next(it) for _ in p] for p in points]


def _det3(u, v, w):
    return (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
            + u[2] * (v[0] * w[1] - v[1] * w[0]))


def orient_int(a, b, c, d):
    a, b, c, d = as_ints([a, b, c, d])
    return sgn(_det3([b[i] - a[i] for i in range(3)], [c[i] - a[i] for i in range(3)],
                     [d[i] - a[i] for i in range(3)]))


def insphere_int(a, b, c, d, e):
    """Sign of the unweighted in-sphere determinant, positive inside for positive ``abcd``."""
    pts = as_ints([a, b, c, d, e])
    e = pts[4]
    rows = []
    for p in pts[:4]:
        r = [p[i] - e[i] for i in range(3)]
        rows.append(r + [r[0] * r[0] + r[1] * r[1] + r[2] * r[2]])
    # cofactor expansion along the lifted column
    total = 0
    for k in range(4):
        minor = [rows[j][:3] for j in range(4) if j != k]
        total += (-1) ** (k + 3) * rows[k][3] * _det3(*minor)
    return -sgn(total)
