"""Compiled incremental Bowyer-Watson kernel for 3D Delaunay/regular builds.

Tetrahedra live in flat arrays ``tv`` (vertex ids) and ``tn`` (neighbour tet
ids, entry ``i`` opposite vertex ``i``).  The convex hull is closed by an
infinite vertex with id ``n``.  Finite tets are positively oriented.  An
infinite tet becomes positively oriented when its infinite vertex is replaced
by any point strictly beyond its hull face.

Predicates run a float filter and drop into object mode for an exact
integer evaluation (``_exact``) when the filter cannot decide.
"""

import numpy as np
from numba import njit, objmode

from . import _exact  # noqa: F401  (read by the object-mode fallbacks)

ORIENT_ERR = 1e-14
LIFTED_ERR = 1e-13
# double-double evaluation is good to roughly 1e-30 of the permanent; keep a wide margin
LIFTED_DD_ERR = 1e-26

OK = 0
WALK_FAILED = 1
NO_CONFLICT = 2


# -- double-double arithmetic (error-free transforms) --------------------------------

@njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s1, s2 = _two_sum(ah, bh)
    t1, t2 = _two_sum(al, bl)
    s2 += t1
    s1, s2 = _two_sum(s1, s2)
    s2 += t2
    return _two_sum(s1, s2)


@njit(cache=True, inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _two_sum(p, e)


@njit(cache=True)
def _minor_dd(xa, xal, ya, yal, xb, xbl, yb, ybl):
    """``xa*yb - xb*ya`` in double-double."""
    p, pl = _dd_mul(xa, xal, yb, ybl)
    q, ql = _dd_mul(xb, xbl, ya, yal)
    return _dd_add(p, pl, -q, -ql)


@njit(cache=True)
def _lifted_dd(P, W, a, b, c, d, e):
    """The lifted in-sphere determinant in double-double (high part)."""
    v = (a, b, c, d)
    X = np.empty((4, 3, 2))
    H = np.empty((4, 2))
    for i in range(4):
        q = v[i]
        sh = 0.0
        sl = 0.0
        for k in range(3):
            h, l = _two_sum(P[q, k], -P[e, k])
            X[i, k, 0] = h
            X[i, k, 1] = l
            m, ml = _dd_mul(h, l, h, l)
            sh, sl = _dd_add(sh, sl, m, ml)
        wh, wl = _two_sum(W[q], -W[e])
        sh, sl = _dd_add(sh, sl, -wh, -wl)
        H[i, 0] = sh
        H[i, 1] = sl
    dh = 0.0
    dl = 0.0
    # Laplace expansion over the (x, y) and (z, h) column pairs
    pairs = ((0, 1, 2, 3, 1.0), (0, 2, 1, 3, -1.0), (0, 3, 1, 2, 1.0),
             (1, 2, 0, 3, 1.0), (1, 3, 0, 2, -1.0), (2, 3, 0, 1, 1.0))
    for i, j, k, m, sg in pairs:
        xy, xyl = _minor_dd(X[i, 0, 0], X[i, 0, 1], X[i, 1, 0], X[i, 1, 1],
                            X[j, 0, 0], X[j, 0, 1], X[j, 1, 0], X[j, 1, 1])
        zh, zhl = _minor_dd(X[k, 2, 0], X[k, 2, 1], H[k, 0], H[k, 1],
                            X[m, 2, 0], X[m, 2, 1], H[m, 0], H[m, 1])
        t, tl = _dd_mul(xy, xyl, zh, zhl)
        dh, dl = _dd_add(dh, dl, sg * t, sg * tl)
    return dh + dl


@njit(cache=True)
def _orient(P, a, b, c, d):
    ux = P[b, 0] - P[a, 0]
    uy = P[b, 1] - P[a, 1]
    uz = P[b, 2] - P[a, 2]
    vx = P[c, 0] - P[a, 0]
    vy = P[c, 1] - P[a, 1]
    vz = P[c, 2] - P[a, 2]
    wx = P[d, 0] - P[a, 0]
    wy = P[d, 1] - P[a, 1]
    wz = P[d, 2] - P[a, 2]
    det = ux * (vy * wz - vz * wy) - uy * (vx * wz - vz * wx) + uz * (vx * wy - vy * wx)
    perm = (abs(ux) * (abs(vy * wz) + abs(vz * wy))
            + abs(uy) * (abs(vx * wz) + abs(vz * wx))
            + abs(uz) * (abs(vx * wy) + abs(vy * wx)))
    err = ORIENT_ERR * perm
    if det > err:
        return 1
    if det < -err:
        return -1
    with objmode(s="int64"):
        s = _exact.kernel_orient(a, b, c, d)
    return s


@njit(cache=True)
def _insphere(P, W, a, b, c, d, e):
    """+1 when ``e`` conflicts with positively oriented ``abcd``."""
    ex = P[e, 0]
    ey = P[e, 1]
    ez = P[e, 2]
    we = W[e]
    x0 = P[a, 0] - ex
    y0 = P[a, 1] - ey
    z0 = P[a, 2] - ez
    x1 = P[b, 0] - ex
    y1 = P[b, 1] - ey
    z1 = P[b, 2] - ez
    x2 = P[c, 0] - ex
    y2 = P[c, 1] - ey
    z2 = P[c, 2] - ez
    x3 = P[d, 0] - ex
    y3 = P[d, 1] - ey
    z3 = P[d, 2] - ez
    s0 = x0 * x0 + y0 * y0 + z0 * z0
    s1 = x1 * x1 + y1 * y1 + z1 * z1
    s2 = x2 * x2 + y2 * y2 + z2 * z2
    s3 = x3 * x3 + y3 * y3 + z3 * z3
    h0 = s0 - (W[a] - we)
    h1 = s1 - (W[b] - we)
    h2 = s2 - (W[c] - we)
    h3 = s3 - (W[d] - we)
    det = ((x0 * y1 - x1 * y0) * (z2 * h3 - z3 * h2)
           - (x0 * y2 - x2 * y0) * (z1 * h3 - z3 * h1)
           + (x0 * y3 - x3 * y0) * (z1 * h2 - z2 * h1)
           + (x1 * y2 - x2 * y1) * (z0 * h3 - z3 * h0)
           - (x1 * y3 - x3 * y1) * (z0 * h2 - z2 * h0)
           + (x2 * y3 - x3 * y2) * (z0 * h1 - z1 * h0))
    aw = abs(we)
    x0, y0, z0 = abs(x0), abs(y0), abs(z0)
    x1, y1, z1 = abs(x1), abs(y1), abs(z1)
    x2, y2, z2 = abs(x2), abs(y2), abs(z2)
    x3, y3, z3 = abs(x3), abs(y3), abs(z3)
    h0 = s0 + abs(W[a]) + aw
    h1 = s1 + abs(W[b]) + aw
    h2 = s2 + abs(W[c]) + aw
    h3 = s3 + abs(W[d]) + aw
    perm = ((x0 * y1 + x1 * y0) * (z2 * h3 + z3 * h2)
            + (x0 * y2 + x2 * y0) * (z1 * h3 + z3 * h1)
            + (x0 * y3 + x3 * y0) * (z1 * h2 + z2 * h1)
            + (x1 * y2 + x2 * y1) * (z0 * h3 + z3 * h0)
            + (x1 * y3 + x3 * y1) * (z0 * h2 + z2 * h0)
            + (x2 * y3 + x3 * y2) * (z0 * h1 + z1 * h0))
    err = LIFTED_ERR * perm
    if det > err:
        return -1
    if det < -err:
        return 1
    det = _lifted_dd(P, W, a, b, c, d, e)
    err = LIFTED_DD_ERR * perm
    if det > err:
        return -1
    if det < -err:
        return 1
    with objmode(s="int64"):
        s = _exact.kernel_insphere(a, b, c, d, e)
    return s


@njit(cache=True)
def _incircle(a, b, c, e):
    with objmode(s="int64"):
        s = _exact.kernel_incircle(a, b, c, e)
    return s


@njit(cache=True)
def _inf_slot(tv, t, inf):
    for i in range(4):
        if tv[t, i] == inf:
            return i
    return -1


@njit(cache=True)
def _orient_with(P, tv, t, slot, e):
    """Orientation of tet ``t`` with its vertex at ``slot`` replaced by ``e``."""
    a = e if slot == 0 else tv[t, 0]
    b = e if slot == 1 else tv[t, 1]
    c = e if slot == 2 else tv[t, 2]
    d = e if slot == 3 else tv[t, 3]
    return _orient(P, a, b, c, d)


@njit(cache=True)
def _conflict(P, W, tv, t, e, inf):
    k = _inf_slot(tv, t, inf)
    if k < 0:
        return _insphere(P, W, tv[t, 0], tv[t, 1], tv[t, 2], tv[t, 3], e) > 0
    o = _orient_with(P, tv, t, k, e)
    if o != 0:
        return o > 0
    f0 = tv[t, (k + 1) & 3]
    f1 = tv[t, (k + 2) & 3]
    f2 = tv[t, (k + 3) & 3]
    return _incircle(f0, f1, f2, e) > 0


@njit(cache=True)
def _xorshift(state):
    x = state[0]
    x ^= (x << np.uint64(13)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(7)
    x ^= (x << np.uint64(17)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    state[0] = x
    return x


@njit(cache=True)
def _locate(P, W, tv, tn, alive, ntet, start, e, inf, rng):
    """Remembering stochastic walk.  Returns a conflict or containing tet."""
    t = start
    prev = -1
    limit = 4 * ntet + 1000
    for _ in range(limit):
        k = _inf_slot(tv, t, inf)
        if k >= 0:
            o = _orient_with(P, tv, t, k, e)
            if o > 0:
                return t
            if o == 0 and _conflict(P, W, tv, t, e, inf):
                return t
            prev = t
            t = tn[t, k]
            continue
        r = np.int64(_xorshift(rng) & np.uint64(3))
        moved = False
        for j in range(4):
            i = (r + j) & 3
            nb = tn[t, i]
            if nb == prev:
                continue
            if _orient_with(P, tv, t, i, e) < 0:
                prev = t
                t = nb
                moved = True
                break
        if not moved:
            return t
    # exhaustive fallback; never expected in practice
    for t in range(ntet):
        if not alive[t]:
            continue
        if _inf_slot(tv, t, inf) >= 0:
            if _conflict(P, W, tv, t, e, inf):
                return t
            continue
        inside = True
        for i in range(4):
            if _orient_with(P, tv, t, i, e) < 0:
                inside = False
                break
        if inside:
            return t
    return -1


@njit(cache=True)
def _grow2(a, cap, fill):
    out = np.full((cap, a.shape[1]), fill, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow1(a, cap, fill):
    out = np.full(cap, fill, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _link_initial(tv, tn, count):
    for s in range(count):
        for i in range(4):
            if tn[s, i] >= 0:
                continue
            for t in range(count):
                if t == s:
                    continue
                for j in range(4):
                    shared = 0
                    for a in range(4):
                        if a == i:
                            continue
                        for b in range(4):
                            if b != j and tv[t, b] == tv[s, a]:
                                shared += 1
                    if shared == 3:
                        tn[s, i] = t
                        tn[t, j] = s


@njit(cache=True)
def build(P, W, weighted, order, seed):
    """Insert ``order`` (its first four entries positively oriented).

    Returns ``(tv, tn, alive, ntet, redundant, status)``.
    """
    n = P.shape[0]
    inf = n
    cap = max(64, 8 * n)
    tv = np.full((cap, 4), -1, dtype=np.int64)
    tn = np.full((cap, 4), -1, dtype=np.int64)
    alive = np.zeros(cap, dtype=np.bool_)
    vis = np.zeros(cap, dtype=np.int64)
    conf = np.zeros(cap, dtype=np.bool_)
    free = np.empty(cap, dtype=np.int64)
    nfree = 0
    redundant = np.zeros(n, dtype=np.bool_)
    vmark = np.zeros(n + 1, dtype=np.int64)

    base = (order[0], order[1], order[2], order[3])
    for i in range(4):
        tv[0, i] = base[i]
    for f in range(4):
        t = f + 1
        for i in range(4):
            tv[t, i] = base[i]
        tv[t, f] = inf
        # swap two finite slots so the infinite tet is positive outside
        s0 = (f + 1) & 3
        s1 = (f + 2) & 3
        tmp = tv[t, s0]
        tv[t, s0] = tv[t, s1]
        tv[t, s1] = tmp
    ntet = 5
    alive[:5] = True
    _link_initial(tv, tn, 5)

    rng = np.empty(1, dtype=np.uint64)
    rng[0] = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) | np.uint64(1)

    stack = np.empty(64, dtype=np.int64)
    cl = np.empty(64, dtype=np.int64)
    bd = np.empty((64, 4), dtype=np.int64)
    hsize = 256
    hkey = np.empty(hsize, dtype=np.int64)
    hval = np.empty(hsize, dtype=np.int64)
    hstamp = np.zeros(hsize, dtype=np.int64)
    stamp = 0
    last = 0
    nn = np.int64(n + 1)

    for step in range(4, order.shape[0]):
        e = order[step]
        if not alive[last]:
            last = 0
            while not alive[last]:
                last += 1
        t0 = _locate(P, W, tv, tn, alive, ntet, last, e, inf, rng)
        if t0 < 0:
            return tv, tn, alive, ntet, redundant, WALK_FAILED
        if not _conflict(P, W, tv, t0, e, inf):
            if weighted:
                redundant[e] = True
                continue
            return tv, tn, alive, ntet, redundant, NO_CONFLICT

        stamp += 1
        vis[t0] = stamp
        conf[t0] = True
        stack[0] = t0
        sp = 1
        ncl = 0
        nb = 0
        while sp > 0:
            sp -= 1
            c = stack[sp]
            if ncl >= cl.shape[0]:
                cl = _grow1(cl, 2 * cl.shape[0], 0)
            cl[ncl] = c
            ncl += 1
            for i in range(4):
                nbr = tn[c, i]
                if vis[nbr] != stamp:
                    vis[nbr] = stamp
                    conf[nbr] = _conflict(P, W, tv, nbr, e, inf)
                    if conf[nbr]:
                        if sp >= stack.shape[0]:
                            stack = _grow1(stack, 2 * stack.shape[0], 0)
                        stack[sp] = nbr
                        sp += 1
                        continue
                elif conf[nbr]:
                    continue
                j = 0
                while tn[nbr, j] != c:
                    j += 1
                if nb >= bd.shape[0]:
                    bd = _grow2(bd, 2 * bd.shape[0], 0)
                bd[nb, 0] = c
                bd[nb, 1] = i
                bd[nb, 2] = nbr
                bd[nb, 3] = j
                nb += 1

        if weighted:
            for q in range(nb):
                c = bd[q, 0]
                for i in range(4):
                    if i != bd[q, 1]:
                        vmark[tv[c, i]] = stamp
            for q in range(ncl):
                c = cl[q]
                for i in range(4):
                    v = tv[c, i]
                    if v != inf and vmark[v] != stamp:
                        redundant[v] = True

        while 3 * nb > hsize // 2:
            hsize *= 2
            hkey = np.empty(hsize, dtype=np.int64)
            hval = np.empty(hsize, dtype=np.int64)
            hstamp = np.zeros(hsize, dtype=np.int64)
        mask = hsize - 1

        for q in range(nb):
            c = bd[q, 0]
            I = bd[q, 1]
            N = bd[q, 2]
            J = bd[q, 3]
            if nfree > 0:
                nfree -= 1
                t = free[nfree]
            else:
                if ntet >= tv.shape[0]:
                    newcap = 2 * tv.shape[0]
                    tv = _grow2(tv, newcap, -1)
                    tn = _grow2(tn, newcap, -1)
                    alive = _grow1(alive, newcap, False)
                    vis = _grow1(vis, newcap, 0)
                    conf = _grow1(conf, newcap, False)
                    free = _grow1(free, newcap, 0)
                t = ntet
                ntet += 1
            for i in range(4):
                tv[t, i] = tv[c, i]
            tv[t, I] = e
            alive[t] = True
            vis[t] = 0
            conf[t] = False
            tn[t, I] = N
            tn[N, J] = t
            for j in range(4):
                if j == I:
                    continue
                u = -1
                w = -1
                for s in range(4):
                    if s != I and s != j:
                        if u < 0:
                            u = tv[t, s]
                        else:
                            w = tv[t, s]
                if u > w:
                    u, w = w, u
                key = u * nn + w
                hpos = (key * np.int64(0x9E3779B1)) & mask
                while True:
                    if hstamp[hpos] != stamp:
                        hstamp[hpos] = stamp
                        hkey[hpos] = key
                        hval[hpos] = t * 4 + j
                        break
                    if hkey[hpos] == key:
                        other = hval[hpos]
                        t2 = other // 4
                        j2 = other % 4
                        tn[t, j] = t2
                        tn[t2, j2] = t
                        break
                    hpos = (hpos + 1) & mask
            last = t

        for q in range(ncl):
            c = cl[q]
            alive[c] = False
            conf[c] = False
            if nfree >= free.shape[0]:
                free = _grow1(free, 2 * free.shape[0], 0)
            free[nfree] = c
            nfree += 1

    return tv, tn, alive, ntet, redundant, OK


@njit(cache=True)
def empty_sphere_violations(P, W, tets):
    """``(tet, vertex)`` pairs where a non-incident point conflicts."""
    out = [(np.int64(0), np.int64(0)) for _ in range(0)]
    n = P.shape[0]
    for t in range(tets.shape[0]):
        a = tets[t, 0]
        b = tets[t, 1]
        c = tets[t, 2]
        d = tets[t, 3]
        for e in range(n):
            if e == a or e == b or e == c or e == d:
                continue
            if _insphere(P, W, a, b, c, d, e) > 0:
                out.append((np.int64(t), np.int64(e)))
    return out
