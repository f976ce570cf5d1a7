"""Exact integer evaluation of the orientation and lifted in-sphere determinants.

Every binary64 value is a dyadic rational, so a finite set of doubles can be
scaled by one power of two into Python integers.  Coordinates are scaled by
``2**k`` and weights by ``2**(2k)`` so that the lifted height
``|p|^2 - w`` stays integral.

Symbolic perturbation lowers the lifted height of the point with priority
``i`` by ``eps**(i + 1)``.  A vanishing determinant is resolved by the
partial derivative with respect to the most significant perturbed height;
smaller priority values are more significant.
"""

import threading
from fractions import Fraction


def _sgn(v):
    return (v > 0) - (v < 0)


def _den_exp(value):
    """Exponent ``e`` with ``value * 2**e`` integral (doubles only)."""
    den = Fraction(value).denominator
    return den.bit_length() - 1


def scale_exponent(coords, weights=()):
    k = 0
    for v in coords:
        k = max(k, _den_exp(v))
    for v in weights:
        k = max(k, (_den_exp(v) + 1) // 2)
    return k


def to_lifted_ints(points, weights=None):
    """Integer rows ``(X, Y, Z, H)`` for a list of ``(x, y, z)`` doubles."""
    flat = [float(c) for p in points for c in p]
    ws = [float(w) for w in weights] if weights is not None else []
    k = scale_exponent(flat, ws)
    rows = []
    for i, p in enumerate(points):
        X, Y, Z = (int(Fraction(float(c)) * (1 << k)) for c in p)
        H = X * X + Y * Y + Z * Z
        if ws:
            H -= int(Fraction(ws[i]) * (1 << (2 * k)))
        rows.append((X, Y, Z, H))
    return rows


def orient(p, q, r, s):
    """det[q - p; r - p; s - p] on integer rows."""
    ux, uy, uz = q[0] - p[0], q[1] - p[1], q[2] - p[2]
    vx, vy, vz = r[0] - p[0], r[1] - p[1], r[2] - p[2]
    wx, wy, wz = s[0] - p[0], s[1] - p[1], s[2] - p[2]
    return (ux * (vy * wz - vz * wy)
            - uy * (vx * wz - vz * wx)
            + uz * (vx * wy - vy * wx))


def lifted(a, b, c, d, e):
    """det of rows ``(p - e, H_p - H_e)`` for ``p`` in ``a, b, c, d``."""
    rows = [(p[0] - e[0], p[1] - e[1], p[2] - e[2], p[3] - e[3])
            for p in (a, b, c, d)]
    x = [r[0] for r in rows]
    y = [r[1] for r in rows]
    z = [r[2] for r in rows]
    h = [r[3] for r in rows]

    def m(u, v, i, j):
        return u[i] * v[j] - u[j] * v[i]

    return (m(x, y, 0, 1) * m(z, h, 2, 3) - m(x, y, 0, 2) * m(z, h, 1, 3)
            + m(x, y, 0, 3) * m(z, h, 1, 2) + m(x, y, 1, 2) * m(z, h, 0, 3)
            - m(x, y, 1, 3) * m(z, h, 0, 2) + m(x, y, 2, 3) * m(z, h, 0, 1))


def insphere_raw(a, b, c, d, e):
    """+1 inside, -1 outside, 0 on, for positively oriented ``a..d``."""
    return -_sgn(lifted(a, b, c, d, e))


def insphere_sos(rows, prio):
    """Perturbed in-sphere sign; ``rows``/``prio`` ordered ``a, b, c, d, e``."""
    a, b, c, d, e = rows
    v = lifted(a, b, c, d, e)
    if v:
        return -_sgn(v)
    partial = (
        -orient(e, b, c, d),
        orient(e, a, c, d),
        -orient(e, a, b, d),
        orient(e, a, b, c),
        orient(a, b, c, d),
    )
    for slot in sorted(range(5), key=lambda s: prio[s]):
        if partial[slot]:
            return _sgn(partial[slot])
    return 0


def _normal(a, b, c):
    ux, uy, uz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    vx, vy, vz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    return (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


def projection_axes(a, b, c):
    """Two coordinate axes on which triangle ``abc`` projects non-degenerately."""
    n = _normal(a, b, c)
    k = max(range(3), key=lambda i: abs(n[i]))
    if n[k] == 0:
        return None
    return ((k + 1) % 3, (k + 2) % 3)


def orient2(p, q, r, ax):
    u, v = ax
    return (q[u] - p[u]) * (r[v] - p[v]) - (q[v] - p[v]) * (r[u] - p[u])


def incircle_sos(rows, prio, axes=None):
    """Perturbed in-circle sign for four coplanar points ``a, b, c, e``.

    Positive when ``e`` lies inside the circle through ``a, b, c`` in their
    common plane; independent of the orientation of ``a, b, c``.
    """
    a, b, c, e = rows
    if axes is None:
        axes = projection_axes(a, b, c)
    u, v = axes
    o = _sgn(orient2(a, b, c, axes))
    m = [(p[u] - e[u], p[v] - e[v], p[3] - e[3]) for p in (a, b, c)]
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    if det:
        return _sgn(det) * o
    partial = (
        orient2(e, b, c, axes),
        -orient2(e, a, c, axes),
        orient2(e, a, b, axes),
        -orient2(a, b, c, axes),
    )
    for slot in sorted(range(4), key=lambda s: prio[s]):
        if partial[slot]:
            return -_sgn(partial[slot]) * o
    return 0


def below_line_sos(rows, prio, axis):
    """Perturbed test for three collinear points ``i, j, k`` (1D lift).

    Positive when the lifted ``k`` lies strictly below the line through the
    lifted ``i`` and ``j``, i.e. ``k`` conflicts with the edge ``ij``.
    """
    i, j, k = rows
    ti, tj, tk = i[axis], j[axis], k[axis]
    if ti > tj:
        i, j = j, i
        ti, tj = tj, ti
        prio = (prio[1], prio[0], prio[2])
    m = (ti - tk) * (j[3] - k[3]) - (tj - tk) * (i[3] - k[3])
    if m:
        return -_sgn(m)
    partial = (-(tj - tk), ti - tk, tj - ti)
    for slot in sorted(range(3), key=lambda s: prio[s]):
        if partial[slot]:
            return _sgn(partial[slot])
    return 0


class ExactContext:
    """Integer image of a whole point set, shared by one triangulation build."""

    def __init__(self, xyz, weights=None, prio=None):
        pts = [tuple(map(float, p)) for p in xyz]
        self.rows = to_lifted_ints(pts, weights)
        n = len(pts)
        self.prio = list(range(n)) if prio is None else [int(p) for p in prio]
        self.calls = 0

    def orient(self, a, b, c, d):
        self.calls += 1
        r = self.rows
        return _sgn(orient(r[a], r[b], r[c], r[d]))

    def insphere(self, a, b, c, d, e):
        self.calls += 1
        r, p = self.rows, self.prio
        return insphere_sos((r[a], r[b], r[c], r[d], r[e]),
                            (p[a], p[b], p[c], p[d], p[e]))

    def incircle(self, a, b, c, e):
        self.calls += 1
        r, p = self.rows, self.prio
        return incircle_sos((r[a], r[b], r[c], r[e]), (p[a], p[b], p[c], p[e]))


# Thread-local slot read by the compiled kernel's object-mode fallbacks.
_active = threading.local()


def activate(ctx):
    _active.ctx = ctx


def deactivate():
    _active.ctx = None


def kernel_orient(a, b, c, d):
    return _active.ctx.orient(a, b, c, d)


def kernel_insphere(a, b, c, d, e):
    return _active.ctx.insphere(a, b, c, d, e)


def kernel_incircle(a, b, c, e):
    return _active.ctx.incircle(a, b, c, e)
