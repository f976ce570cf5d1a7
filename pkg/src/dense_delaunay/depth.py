"""Depth orders of triangulations and screws of segment triples.

Arc convention: an arc ``(s, t)`` means ``s`` is directly behind ``t`` as
seen from the viewpoint, i.e. ``t`` meets ``conv{x, s}``.

For tetrahedra the arcs join facet-adjacent tets only: ``s`` is behind ``t``
when the viewpoint lies strictly on ``t``'s side of their shared facet.  Any
segment from the viewpoint to a point of ``s`` that first crosses ``t``
walks through a chain of such arcs, because the tets tile a convex region,
so the full occlusion relation lies in the transitive closure of this
digraph and one is acyclic when the other is.

Sorting tets by increasing power distance from the viewpoint to their
circumspheres (orthospheres for regular meshes) lists them front to back.
The radical plane of two adjacent tets' spheres is the plane of their shared
facet, and the apex of each tet lies outside the other's sphere, so the
power distance to ``t``'s sphere is the smaller one on ``t``'s side.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
import heapq

import numpy as np

from .errors import BadParameters
from .geom import ORIENT_ERR, Point3, Segment, _segments_meet_3d, segment_behind
from . import _exact

# smaller power distance means nearer to the viewpoint
NEAR_FIRST = True
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class BehindDigraph:
    nodes: tuple
    arcs: tuple
    viewpoint: Point3

    def successors(self):
        out = {v: [] for v in self.nodes}
        for s, t in self.arcs:
            out[s].append(t)
        return out


class DepthOrder(Sequence):
    """Tet ids front to back, with ids of power-distance ties recorded."""

    def __init__(self, order, power, ties):
        self.order = tuple(int(i) for i in order)
        self.power = power
        self.ties = ties

    def __len__(self):
        return len(self.order)

    def __getitem__(self, i):
        return self.order[i]

    def __repr__(self):
        return f"DepthOrder({list(self.order)!r}, ties={len(self.ties)})"


def _point(x):
    if isinstance(x, Point3):
        return np.array(x.xyz)
    return np.asarray(x, dtype=float).reshape(3)


# -- vectorized orientation with a static filter --------------------------------

def _orient_many(a, b, c, d):
    """Signs of det[b-a, c-a, d-a]; 0 marks results the filter cannot certify."""
    u, v, w = b - a, c - a, d - a
    det = (u[..., 0] * (v[..., 1] * w[..., 2] - v[..., 2] * w[..., 1])
           - u[..., 1] * (v[..., 0] * w[..., 2] - v[..., 2] * w[..., 0])
           + u[..., 2] * (v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]))
    au, av, aw = np.abs(u), np.abs(v), np.abs(w)
    perm = (au[..., 0] * (av[..., 1] * aw[..., 2] + av[..., 2] * aw[..., 1])
            + au[..., 1] * (av[..., 0] * aw[..., 2] + av[..., 2] * aw[..., 0])
            + au[..., 2] * (av[..., 0] * aw[..., 1] + av[..., 1] * aw[..., 0]))
    err = ORIENT_ERR * perm
    return np.where(det > err, 1, np.where(det < -err, -1, 0))


def _sphere_centers(xyz, w, tets):
    """Centres and squared radii of the spheres orthogonal to each tet's balls."""
    p = xyz[tets]
    pw = w[tets]
    A = 2.0 * (p[:, 1:] - p[:, :1])
    sq = np.einsum("tij,tij->ti", p, p) - pw
    rhs = sq[:, 1:] - sq[:, :1]
    c = np.linalg.solve(A, rhs[..., None])[..., 0]
    rad = np.einsum("ti,ti->t", p[:, 0] - c, p[:, 0] - c) - pw[:, 0]
    return c, rad


def power_distances(mesh, viewpoint):
    """Power distance from ``viewpoint`` to every tet's empty sphere."""
    x = _point(viewpoint)
    w = mesh.weights if mesh.weighted else np.zeros(mesh.n)
    c, rad = _sphere_centers(mesh.xyz, w, mesh.tets)
    return np.einsum("ti,ti->t", x - c, x - c) - rad


def _kahn_by_id(nodes, arcs):
    """Topological order of ``nodes`` (front first), smallest id when free."""
    block = {v: 0 for v in nodes}
    after = {v: [] for v in nodes}
    for s, t in arcs:
        # t is in front of s
        block[s] += 1
        after[t].append(s)
    ready = [v for v in nodes if block[v] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        v = heapq.heappop(ready)
        out.append(v)
        for s in after[v]:
            block[s] -= 1
            if block[s] == 0:
                heapq.heappush(ready, s)
    if len(out) != len(nodes):
        out += sorted(set(nodes) - set(out))
    return out


def depth_sort(mesh, viewpoint):
    """Tets by increasing power distance (front to back).

    Tets whose power distances tie (cospherical inputs) are ordered by the
    behind arcs among them, then by tet id.  The tied pairs are kept in
    ``ties``.
    """
    if len(mesh.tets) == 0:
        return DepthOrder([], np.empty(0), ())
    pw = power_distances(mesh, viewpoint)
    key = pw if NEAR_FIRST else -pw
    order = np.lexsort((np.arange(len(pw)), key))
    sp = pw[order]
    scale = np.maximum(np.abs(sp[:-1]), np.abs(sp[1:])) + 1.0
    tied = np.abs(np.diff(sp)) <= TIE_RTOL * scale
    ties = tuple((int(order[i]), int(order[i + 1])) for i in np.flatnonzero(tied))
    if ties:
        arcs = tet_digraph(mesh, viewpoint).arcs
        order = order.copy()
        start = 0
        for i in range(1, len(order) + 1):
            if i < len(order) and tied[i - 1]:
                continue
            if i - start > 1:
                run = set(map(int, order[start:i]))
                inner = [(s, t) for s, t in arcs if s in run and t in run]
                order[start:i] = _kahn_by_id(sorted(run), inner)
            start = i
    return DepthOrder(order, pw, ties)


# -- digraphs ----------------------------------------------------------------------

def tet_digraph(mesh, viewpoint):
    """Behind digraph on facet-adjacent tets (see module notes)."""
    x = _point(viewpoint)
    tets, nb = mesh.tets, mesh.neighbors
    nodes = tuple(range(len(tets)))
    if len(tets) == 0:
        return BehindDigraph(nodes, (), Point3(*x))
    t_idx, slot = np.nonzero(nb > np.arange(len(tets))[:, None])
    s_idx = nb[t_idx, slot]
    # shared facet: the three vertices of t other than tets[t, slot]
    keep = np.array([[j for j in range(4) if j != i] for i in range(4)])
    face = tets[t_idx[:, None], keep[slot]]
    apex = tets[t_idx, slot]
    P = mesh.xyz
    fa, fb, fc = P[face[:, 0]], P[face[:, 1]], P[face[:, 2]]
    side_x = _orient_many(fa, fb, fc, np.broadcast_to(x, fa.shape))
    side_t = _orient_many(fa, fb, fc, P[apex])
    unsure = np.flatnonzero((side_x == 0) | (side_t == 0))
    if len(unsure):
        side_x, side_t = side_x.copy(), side_t.copy()
        for i in unsure:
            rows = _exact.to_lifted_ints([fa[i], fb[i], fc[i], x, P[apex[i]]])
            side_x[i] = _exact._sgn(_exact.orient(*rows[:3], rows[3]))
            side_t[i] = _exact._sgn(_exact.orient(*rows[:3], rows[4]))
    arcs = []
    for t, s, sx, st in zip(t_idx, s_idx, side_x, side_t):
        if sx == 0:
            continue  # viewpoint on the facet plane: no strict occlusion
        if sx == st:
            arcs.append((int(s), int(t)))  # viewpoint on t's side
        else:
            arcs.append((int(t), int(s)))
    return BehindDigraph(nodes, tuple(sorted(arcs)), Point3(*x))


def _behind_matrix(x, a, b, skip):
    """``M[i, j]`` true iff segment j meets the triangle ``x, a[i], b[i]``.

    Pairs masked by ``skip`` are left false.
    """
    m = len(a)
    X = np.broadcast_to(x, (m, m, 3))
    A, B = np.broadcast_to(a[:, None], (m, m, 3)), np.broadcast_to(b[:, None], (m, m, 3))
    P, Q = np.broadcast_to(a[None, :], (m, m, 3)), np.broadcast_to(b[None, :], (m, m, 3))
    o1, o2 = _orient_many(X, A, B, P), _orient_many(X, A, B, Q)
    s1, s2, s3 = _orient_many(P, Q, X, A), _orient_many(P, Q, A, B), _orient_many(P, Q, B, X)
    unsure = (o1 == 0) | (o2 == 0) | (s1 == 0) | (s2 == 0) | (s3 == 0)
    straddle = o1 * o2 < 0
    same = ((s1 > 0) & (s2 > 0) & (s3 > 0)) | ((s1 < 0) & (s2 < 0) & (s3 < 0))
    live = ~skip
    np.fill_diagonal(live, False)
    hit = straddle & same & live
    unsure &= live
    xp = Point3(*map(float, x))
    for i, j in zip(*np.nonzero(unsure)):
        hit[i, j] = segment_behind(Segment(Point3(*a[i]), Point3(*b[i])),
                                   Segment(Point3(*a[j]), Point3(*b[j])), xp)
    return hit


def segment_digraph(segments, viewpoint, skip=None):
    """Behind digraph of segments given as an ``(m, 2, 3)`` array.

    ``skip`` is an optional boolean ``(m, m)`` mask of pairs to ignore, such
    as segments sharing an endpoint, which touch every triangle through it.
    """
    x = _point(viewpoint)
    seg = np.asarray(segments, dtype=float).reshape(-1, 2, 3)
    if skip is None:
        skip = np.zeros((len(seg), len(seg)), dtype=bool)
    hit = _behind_matrix(x, seg[:, 0], seg[:, 1], skip)
    i, j = np.nonzero(hit)
    return BehindDigraph(tuple(range(len(seg))), tuple(zip(i.tolist(), j.tolist())), Point3(*x))


def edge_digraph(mesh, viewpoint):
    """Behind digraph on the mesh edges; edges with a common endpoint get no arc."""
    edges = mesh.edges()
    seg = mesh.xyz[edges]
    share = np.zeros((len(edges), len(edges)), dtype=bool)
    for k in range(2):
        for l in range(2):
            share |= edges[:, k][:, None] == edges[:, l][None, :]
    return segment_digraph(seg, viewpoint, skip=share)


def verify_acyclic(digraph):
    """``(True, None)`` or ``(False, cycle)`` with ``cycle[i]`` behind ``cycle[i+1]``."""
    preds = {v: [] for v in digraph.nodes}
    for s, t in digraph.arcs:
        preds.setdefault(t, []).append(s)
        preds.setdefault(s, [])
    try:
        tuple(TopologicalSorter(preds).static_order())
    except CycleError as err:
        # graphlib reports the cycle along predecessor links, closed at the end
        cycle = list(err.args[1])[:-1]
        arcs = set(digraph.arcs)
        if len(cycle) > 1 and (cycle[0], cycle[1]) not in arcs:
            cycle.reverse()
        return False, cycle
    return True, None


def is_linear_extension(order, digraph):
    """No arc points from a later (farther) element to an earlier one."""
    pos = {v: i for i, v in enumerate(order)}
    return all(pos[t] < pos[s] for s, t in digraph.arcs)


# -- screws --------------------------------------------------------------------------

def _disjoint(s, t):
    rows = _exact.to_lifted_ints([s.a.xyz, s.b.xyz, t.a.xyz, t.b.xyz])
    return not _segments_meet_3d(*rows)


def detect_screw(s1, s2, s3, candidates):
    """First candidate viewpoint that sees the three segments in a depth cycle.

    Only the given candidates are tried, so ``None`` does not prove that the
    segments are not a screw.  Intersecting segments always give ``None``.
    """
    segs = (s1, s2, s3)
    if not all(_disjoint(segs[i], segs[j]) for i, j in ((0, 1), (0, 2), (1, 2))):
        return None
    for x in candidates:
        b = {(i, j): segment_behind(segs[i], segs[j], x)
             for i in range(3) for j in range(3) if i != j}
        if (b[0, 1] and b[1, 2] and b[2, 0]) or (b[0, 2] and b[2, 1] and b[1, 0]):
            return x
    return None


def screw_cube_vertices(width):
    """Vertices of the axis-aligned cube of the given width centred at the origin."""
    if width <= 0:
        raise BadParameters("width must be positive")
    h = width / 2.0
    return [Point3(sx * h, sy * h, sz * h)
            for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
