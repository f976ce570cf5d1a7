import itertools
import math

import numpy as np
import pytest

from dense_delaunay import (DegenerateInput, Point3, Segment, Sign, Sphere, WeightedPoint,
                            circumsphere, in_sphere, in_sphere_sos, orient3d, orthosphere,
                            power_distance, power_in_sphere, power_in_sphere_sos,
                            segment_behind)

import oracles as O

UNIT = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
CUBE4 = [(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (1.0, 0.0, 1.0), (0.0, 1.0, 1.0)]


def W(p, w=0.0, id=0):
    return WeightedPoint(Point3(*p, id=id), w)


# -- orient3d -------------------------------------------------------------------

def test_orient_examples():
    assert orient3d(*UNIT) is Sign.POSITIVE
    assert orient3d((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)) is Sign.ZERO
    for i, j in itertools.combinations(range(4), 2):
        p = list(UNIT)
        p[i], p[j] = p[j], p[i]
        assert orient3d(*p) is Sign.NEGATIVE


def test_orient_accepts_points_and_tuples():
    pts = [Point3(*p, id=i) for i, p in enumerate(UNIT)]
    assert orient3d(*pts) == orient3d(*UNIT)


def _near_degenerate(rng, count):
    """Coplanar or cospherical configurations nudged by +-2^-40."""
    eps = 2.0 ** -40
    for _ in range(count):
        a, b, c = (rng.integers(-8, 9, 3) / 4.0 for _ in range(3))
        u, v = rng.integers(-4, 5, 2) / 4.0
        d = a + u * (b - a) + v * (c - a)
        d = d + rng.integers(-1, 2, 3) * eps
        yield tuple(map(tuple, (a, b, c, d)))


@pytest.mark.slow
def test_orient_near_degenerate_matches_exact():
    rng = np.random.default_rng(11)
    zeros = 0
    for a, b, c, d in _near_degenerate(rng, 100_000):
        want = O.orient_int(a, b, c, d)
        zeros += want == 0
        assert int(orient3d(a, b, c, d)) == want
    assert zeros > 1000  # exactly degenerate cases really occur


@pytest.mark.slow
def test_in_sphere_near_degenerate_matches_exact():
    rng = np.random.default_rng(12)
    eps = 2.0 ** -40
    # integer points on spheres x^2+y^2+z^2 = r^2 from Pythagorean quadruples
    sphere_pts = [p for p in itertools.product(range(-9, 10), repeat=3)
                  if p[0] ** 2 + p[1] ** 2 + p[2] ** 2 in (81, 49, 9)]
    by_r = {}
    for p in sphere_pts:
        by_r.setdefault(p[0] ** 2 + p[1] ** 2 + p[2] ** 2, []).append(p)
    groups = [g for g in by_r.values() if len(g) >= 5]
    zeros = 0
    for _ in range(100_000):
        g = groups[rng.integers(len(groups))]
        idx = rng.choice(len(g), 5, replace=False)
        pts = [np.array(g[i], dtype=float) for i in idx]
        pts[4] = pts[4] + rng.integers(-1, 2, 3) * eps
        pts = [tuple(p) for p in pts]
        want = O.insphere_int(*pts)
        zeros += want == 0
        got = int(in_sphere(*pts))
        if O.orient_int(*pts[:4]) == 0:
            # a flat tetrahedron: only the vanishing cases are meaningful
            continue
        assert got == want
    assert zeros > 1000



def test_double_double_stage_matches_exact():
    # points a relative 1e-12..1e-17 off a common sphere, where the plain float filter gives up
    from dense_delaunay._kernel import LIFTED_DD_ERR, _lifted_dd
    rng = np.random.default_rng(13)
    decided = 0
    for _ in range(3000):
        p = rng.normal(size=(5, 3))
        p /= np.linalg.norm(p, axis=1)[:, None]
        p[4] *= 1 + 10.0 ** -rng.uniform(12, 17) * rng.choice([-1, 1])
        p = p * rng.uniform(0.1, 100) + rng.normal(size=3) * rng.uniform(0, 1e3)
        pts = [tuple(q) for q in p]
        o = O.orient_int(*pts[:4])
        want = O.insphere_int(*pts)
        if o == 0 or want == 0:
            continue
        got = _lifted_dd(p, np.zeros(5), 0, 1, 2, 3, 4)
        d = p[:4] - p[4]
        bound = LIFTED_DD_ERR * 100 * (np.abs(d).max() ** 5 + 1)
        if abs(got) > bound:
            decided += 1
            assert -np.sign(got) == want
    assert decided > 1000

def test_antisymmetry_and_even_permutations():
    rng = np.random.default_rng(3)
    even = [p for p in itertools.permutations(range(4))
            if sum(p[i] > p[j] for i in range(4) for j in range(i + 1, 4)) % 2 == 0]
    for _ in range(100):
        pts = [tuple(rng.random(3)) for _ in range(5)]
        o = orient3d(*pts[:4])
        for i, j in itertools.combinations(range(4), 2):
            q = list(pts[:4])
            q[i], q[j] = q[j], q[i]
            assert orient3d(*q) == -o
        s = in_sphere(*pts)
        for p in even:
            assert in_sphere(*[pts[k] for k in p], pts[4]) == s


def test_translation_invariance():
    rng = np.random.default_rng(4)
    for _ in range(200):
        pts = [rng.integers(-20, 20, 3) / 8.0 for _ in range(5)]
        shift = rng.integers(-50, 50, 3) / 2.0
        moved = [tuple(p + shift) for p in pts]
        pts = [tuple(p) for p in pts]
        ws = list(rng.integers(0, 10, 5) / 4.0)
        assert orient3d(*pts[:4]) == orient3d(*moved[:4])
        assert in_sphere(*pts) == in_sphere(*moved)
        assert (power_in_sphere(*(W(p, w) for p, w in zip(pts, ws)))
                == power_in_sphere(*(W(p, w) for p, w in zip(moved, ws))))


# -- in_sphere ----------------------------------------------------------------------

def test_in_sphere_examples():
    assert in_sphere(*UNIT, (0.5, 0.5, 0.5)) is Sign.POSITIVE
    assert in_sphere(*UNIT, (100.0, 100.0, 100.0)) is Sign.NEGATIVE
    assert in_sphere(*CUBE4, (1.0, 0.0, 0.0)) is Sign.ZERO


def test_in_sphere_flips_with_orientation():
    flipped = [UNIT[1], UNIT[0], UNIT[2], UNIT[3]]
    assert in_sphere(*flipped, (0.5, 0.5, 0.5)) is Sign.NEGATIVE


def test_sos_resolves_cube_cospherical():
    pts = [Point3(*p, id=i) for i, p in enumerate(CUBE4 + [(1.0, 0.0, 0.0)])]
    assert in_sphere(*pts) is Sign.ZERO
    s = in_sphere_sos(*pts)
    assert s is not Sign.ZERO
    # a consistent perturbation: relabelling ids can change the sign but never to zero
    relabel = [Point3(*p.xyz, id=10 - p.id) for p in pts]
    assert in_sphere_sos(*relabel) is not Sign.ZERO


# -- power_in_sphere ------------------------------------------------------------------

def test_power_in_sphere_weight_zero_reduction():
    cases = [UNIT + [(0.5, 0.5, 0.5)], UNIT + [(100.0, 100.0, 100.0)], CUBE4 + [(1.0, 0.0, 0.0)]]
    rng = np.random.default_rng(5)
    cases += [[tuple(rng.random(3)) for _ in range(5)] for _ in range(200)]
    for pts in cases:
        assert power_in_sphere(*(W(p) for p in pts)) == in_sphere(*pts)
        assert power_in_sphere(*pts) == in_sphere(*pts)


def test_power_in_sphere_orthogonal_ball_is_zero():
    # orthosphere of the unit tetrahedron: centre (1/2,1/2,1/2), squared radius 3/4;
    # a ball at (2,2,2) is orthogonal when its weight is 27/4 - 3/4 = 6
    balls = [W(p) for p in UNIT]
    assert power_in_sphere(*balls, W((2.0, 2.0, 2.0), 6.0)) is Sign.ZERO
    assert power_in_sphere(*balls, W((2.0, 2.0, 2.0), 6.5)) is Sign.POSITIVE
    assert power_in_sphere(*balls, W((2.0, 2.0, 2.0), 5.5)) is Sign.NEGATIVE


def test_power_in_sphere_circumcentre_ball_is_inside():
    # a ball at the circumcentre with the circumradius overlaps the sphere
    # by more than orthogonally
    s = circumsphere(*UNIT)
    assert power_in_sphere(*(W(p) for p in UNIT), W(s.center.xyz, s.sq_radius)) is Sign.POSITIVE


def test_power_in_sphere_random_against_lifted_oracle():
    rng = np.random.default_rng(6)
    for _ in range(200):
        pts = [tuple(rng.integers(-64, 64, 3) / 16.0) for _ in range(5)]
        ws = list(rng.integers(0, 64, 5) / 16.0)
        want = O.power_sign(pts, ws)
        if want is None:
            continue
        assert int(power_in_sphere(*(W(p, w) for p, w in zip(pts, ws)))) == want
        if not any(ws):
            assert O.insphere_int(*pts) == want


def test_power_in_sphere_sos_nonzero():
    balls = [W(p, 0.0, i) for i, p in enumerate(UNIT)]
    assert power_in_sphere_sos(*balls, W((2.0, 2.0, 2.0), 6.0, 4)) is not Sign.ZERO


# -- constructions ------------------------------------------------------------------

def test_circumsphere_examples():
    s = circumsphere(*CUBE4)
    assert s.center.xyz == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)
    assert s.sq_radius == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(DegenerateInput):
        circumsphere((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0))


def test_circumsphere_random_against_exact_solve():
    rng = np.random.default_rng(7)
    for _ in range(100):
        pts = [tuple(rng.normal(size=3)) for _ in range(4)]
        s = circumsphere(*pts)
        c, r2 = O.ortho_center(pts, [0.0] * 4)
        want = np.array([float(v) for v in c])
        got = np.array(s.center.xyz)
        assert np.linalg.norm(got - want) <= 1e-9 * max(1.0, np.linalg.norm(want))
        assert s.sq_radius == pytest.approx(float(r2), rel=1e-9)


def test_orthosphere_examples():
    assert orthosphere(*(W(p) for p in CUBE4)) == circumsphere(*CUBE4)
    s = orthosphere(*(W(p, 0.2) for p in CUBE4))
    assert s.center.xyz == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)
    assert s.sq_radius == pytest.approx(0.55, abs=1e-15)
    # negative squared radius is allowed
    assert orthosphere(*(W(p, 1.0) for p in CUBE4)).sq_radius == pytest.approx(-0.25)


def test_orthosphere_residuals():
    rng = np.random.default_rng(8)
    for _ in range(100):
        pts = [rng.normal(size=3) for _ in range(4)]
        ws = rng.random(4)
        s = orthosphere(*(W(tuple(p), w) for p, w in zip(pts, ws)))
        c = np.array(s.center.xyz)
        scale = max(1.0, float(np.abs(c).max()) ** 2)
        for p, w in zip(pts, ws):
            assert abs(float((c - p) @ (c - p)) - s.sq_radius - w) <= 1e-9 * scale


def test_power_distance_examples():
    unit = Sphere(Point3(0.0, 0.0, 0.0), 1.0)
    assert power_distance((2.0, 0.0, 0.0), unit) == 3.0
    assert power_distance((0.0, 1.0, 0.0), unit) == 0.0
    assert power_distance(Point3(0.0, 0.0, 0.0), unit) == -1.0


# -- segment_behind -----------------------------------------------------------------

def _seg(a, b):
    return Segment(Point3(*a), Point3(*b))


def test_segment_behind_examples():
    x = Point3(0.0, 0.0, 10.0)
    s = _seg((-1, 0, 0), (1, 0, 0))
    assert segment_behind(s, _seg((0, -1, 5), (0, 1, 5)), x)
    assert not segment_behind(s, _seg((0, -1, -5), (0, 1, -5)), x)
    # the relation is not symmetric
    assert not segment_behind(_seg((0, -1, 5), (0, 1, 5)), s, x)


def test_segment_rejects_zero_length():
    with pytest.raises(ValueError):
        _seg((1, 1, 1), (1, 1, 1))


def test_segment_behind_random_against_parametric_oracle():
    rng = np.random.default_rng(9)
    hits = checked = 0
    for _ in range(1000):
        x = rng.normal(size=3) * 4 + (0, 0, 6)
        a, b = rng.normal(size=(2, 3))
        p, q = rng.normal(size=(2, 3)) * 1.5 + (0, 0, 3)
        want = O.segment_meets_triangle(x, a, b, p, q)
        if want is None:
            continue
        got = segment_behind(_seg(a, b), _seg(p, q), tuple(x))
        assert got == want
        checked += 1
        hits += want
    assert checked > 950 and 50 < hits < checked - 50


def test_segment_behind_touching_counts():
    # t passes exactly through the viewpoint-to-endpoint edge of the triangle
    x = Point3(0.0, 0.0, 4.0)
    s = _seg((0, 0, 0), (2, 0, 0))
    assert segment_behind(s, _seg((0, -1, 2), (0, 1, 2)), x)
    assert not segment_behind(s, _seg((-1e-9, -1, 2), (-1e-9, 1, 2)), x)


def test_predicate_values_are_immutable():
    p = Point3(1.0, 2.0, 3.0)
    with pytest.raises(Exception):
        p.x = 5.0
    with pytest.raises(ValueError):
        Point3(math.nan, 0.0, 0.0)
