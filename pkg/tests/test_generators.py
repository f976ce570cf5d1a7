import math

import numpy as np
import pytest

from dense_delaunay import (BadParameters, GenSpec, WeightedPoint, build_delaunay, generate,
                            measured_ply, spread, verify_delaunay_bruteforce)
from dense_delaunay.generators import KINDS, PRESET_JITTER

PRESETS = {
    "GRID": {"m": 5},
    "RANDOM_CUBE": {"n": 300},
    "HELIX": {"n": 40},
    "SEGMENT_LATTICE": {"n": 64, "delta": 4},
    "CYLINDER": {"n": 300},
    "SPHERE_SAMPLE": {"n": 200},
    "UNION_MULTISCALE": {"k": 3, "m": 3},
    "KPLY_BALLS": {"n": 64, "k": 2},
}
COUNTS = {"GRID": 125, "UNION_MULTISCALE": 81}


def xyz_of(points):
    return np.array([p.xyz for p in points])


@pytest.mark.parametrize("kind", KINDS)
def test_count_and_determinism(kind):
    spec = GenSpec(kind, PRESETS[kind], seed=5, jitter=0.01)
    a, meta = generate(spec)
    b, _ = generate(spec)
    assert len(a) == meta.n == COUNTS.get(kind, PRESETS[kind].get("n"))
    assert xyz_of(a).tobytes() == xyz_of(b).tobytes()
    assert [p.id for p in a] == list(range(len(a)))
    assert meta.rng == "PCG64" and meta.seed == 5
    lo, hi = meta.expected_spread
    if meta.spread_measure == "spread":
        assert lo <= spread(a).spread <= hi


@pytest.mark.parametrize("kind", ["GRID", "RANDOM_CUBE", "HELIX"])
def test_seed_changes_jittered_output(kind):
    a, _ = generate(GenSpec(kind, PRESETS[kind], seed=1, jitter=0.1))
    b, _ = generate(GenSpec(kind, PRESETS[kind], seed=2, jitter=0.1))
    assert xyz_of(a).tobytes() != xyz_of(b).tobytes()


def test_grid_exact():
    p, meta = generate(GenSpec("GRID", {"m": 3}))
    xyz = xyz_of(p)
    assert len(p) == 27 and xyz.min() == 1.0 and xyz.max() == 3.0
    assert spread(p).spread == pytest.approx(2 * math.sqrt(3), abs=1e-15)
    assert meta.expected_spread == (math.sqrt(3) * 2,) * 2


def test_grid_jitter_stays_within_quarter_spacing():
    p, _ = generate(GenSpec("GRID", {"m": 6}, seed=3, jitter=0.2))
    base = xyz_of(generate(GenSpec("GRID", {"m": 6}))[0])
    assert np.abs(xyz_of(p) - base).max() <= 0.2
    tiny, _ = generate(GenSpec("GRID", {"m": 4}, jitter=PRESET_JITTER))
    assert 0 < np.abs(xyz_of(tiny) - xyz_of(generate(GenSpec("GRID", {"m": 4}))[0])).max() <= 2.0 ** -20


def test_helix_layout():
    p, meta = generate(GenSpec("HELIX", {"n": 8, "pitch": 1e-3}))
    xyz = xyz_of(p)
    i = np.arange(8)
    assert np.allclose(xyz[:, 0], np.cos(2 * np.pi * i / 8), atol=1e-15)
    assert np.allclose(xyz[:, 2], 1e-3 * i / 8, atol=0)
    assert len(verify_delaunay_bruteforce(p).edges()) == 28


def test_segment_lattice_formula():
    p, meta = generate(GenSpec("SEGMENT_LATTICE", {"n": 16, "delta": 4}))
    xyz = xyz_of(p)
    assert len(p) == 16 and sorted(set(meta.labels)) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    for (i, j) in set(meta.labels):
        s = (-1) ** (i + j)
        c = np.array([2 * i, 2 * j, 0.0])
        e = np.array([s, s, 1.0])
        # four points evenly spaced strictly inside the segment c - e .. c + e
        want = [c + (-1 + (2 * k + 1) / 4) * e for k in range(4)]
        got = xyz[[q for q, lab in enumerate(meta.labels) if lab == (i, j)]]
        assert np.array_equal(got, np.array(want))
    first = xyz[:4]
    assert np.all(np.abs(first - np.array([2.0, 2.0, 0.0])) <= 1.0)


def test_segment_lattice_validation():
    with pytest.raises(BadParameters, match="sqrt"):
        generate(GenSpec("SEGMENT_LATTICE", {"n": 24, "delta": 4}))
    with pytest.raises(BadParameters, match="multiple"):
        generate(GenSpec("SEGMENT_LATTICE", {"n": 17, "delta": 4}))


@pytest.mark.parametrize("n,delta", [(64, 4), (256, 16), (128, 8), (1024, 16)])
def test_segment_transport_spread(n, delta):
    p, meta = generate(GenSpec("SEGMENT_LATTICE", {"n": n, "delta": delta, "transport": True}))
    assert all(isinstance(q, WeightedPoint) for q in p)
    assert meta.extra["transport_exact"]
    assert spread(p).spread <= 8 * delta
    lo, hi = meta.expected_spread
    assert lo <= spread(p).spread <= hi


def test_transported_balls_overlap_more_with_delta():
    plies = []
    for n, delta in [(16, 4), (64, 16), (256, 64)]:
        p, _ = generate(GenSpec("SEGMENT_LATTICE", {"n": n, "delta": delta, "transport": True}))
        plies.append(measured_ply(p))
    assert plies == sorted(plies) and plies[-1] > plies[0]


def test_random_cube_defaults():
    p, meta = generate(GenSpec("RANDOM_CUBE", {"n": 1000}, seed=2))
    side = (1000 / math.log(1000)) ** (1 / 3)
    assert meta.params["side"] == pytest.approx(side)
    assert xyz_of(p).min() >= 0 and xyz_of(p).max() <= side
    assert meta.spread_measure == "delta_k" and meta.extra["k"] == 7


def test_random_cube_stream_is_pcg64():
    p, _ = generate(GenSpec("RANDOM_CUBE", {"n": 10, "side": 1.0}, seed=42))
    want = np.random.Generator(np.random.PCG64(42)).random((10, 3))
    assert np.array_equal(xyz_of(p), want)


def test_cylinder_layout():
    p, meta = generate(GenSpec("CYLINDER", {"n": 900}))
    xyz = xyz_of(p)
    rings, per = meta.params["rings"], meta.params["per_ring"]
    side = xyz[: rings * per]
    assert np.allclose(np.hypot(side[:, 0], side[:, 1]), 1.0)
    assert side[:, 2].min() >= 0 and side[:, 2].max() <= 1
    caps = xyz[rings * per:]
    up = caps[caps[:, 2] > 0.5]
    down = caps[caps[:, 2] <= 0.5]
    assert np.allclose(np.linalg.norm(up - (0, 0, 1), axis=1), 1.0)
    assert np.allclose(np.linalg.norm(down - (0, 0, 0), axis=1), 1.0)
    # about a third of the points on the side
    assert 0.25 < rings * per / 900 < 0.42
    with pytest.raises(BadParameters):
        generate(GenSpec("CYLINDER", {"n": 300, "tilt": 0.5}))


def test_sphere_sample_on_unit_sphere():
    p, _ = generate(GenSpec("SPHERE_SAMPLE", {"n": 500}))
    assert np.allclose(np.linalg.norm(xyz_of(p), axis=1), 1.0)


def test_union_grids_disjoint_with_distinct_spacings():
    p, meta = generate(GenSpec("UNION_MULTISCALE", {"k": 3, "m": 4}))
    xyz = xyz_of(p)
    spacings, boxes = set(), []
    for g in range(3):
        part = xyz[np.array(meta.labels) == g]
        assert len(part) == 64
        d = np.sqrt(((part[:, None] - part[None]) ** 2).sum(-1))
        spacings.add(round(float(d[d > 0].min()), 12))
        boxes.append((part[:, 0].min(), part[:, 0].max()))
    assert len(spacings) == 3
    assert all(b[1] < c[0] for b, c in zip(boxes, boxes[1:]))


def test_kply_small_exact():
    p, meta = generate(GenSpec("KPLY_BALLS", {"n": 100, "k": 3}, seed=1, jitter=0.1))
    assert meta.extra["measured_ply"] <= 3
    assert measured_ply(p) == meta.extra["measured_ply"]
    # a dense probe grid never finds more than the witnesses
    assert measured_ply(p, probe_resolution=0.05) == meta.extra["measured_ply"]
    # the radii are as large as possible: a 1% increase breaks the bound
    c = xyz_of(p)
    r = np.sqrt([q.weight for q in p])
    assert measured_ply((c, r * 1.01)) > 3


def test_kply_independent_probe():
    p, meta = generate(GenSpec("KPLY_BALLS", {"n": 27, "k": 2}, seed=4, jitter=0.1))
    c = xyz_of(p)
    r = np.sqrt([q.weight for q in p])
    rng = np.random.default_rng(0)
    probes = rng.uniform(c.min(0) - 1, c.max(0) + 1, size=(200_000, 3))
    cnt = ((((probes[:, None] - c[None]) ** 2).sum(-1)) <= r ** 2).sum(1)
    assert cnt.max() <= meta.extra["measured_ply"] <= 2


def test_measured_ply_examples():
    c = np.array([[0.0, 0, 0], [3, 0, 0], [0, 3, 0]])
    assert measured_ply((c, np.ones(3))) == 1
    assert measured_ply((np.zeros((2, 3)), np.ones(2))) == 2
    # equilateral side 1.7: circumradius 0.981 so unit balls share a point,
    # balls of radius 0.9 only meet pairwise
    c = np.array([[0.0, 0, 0], [1.7, 0, 0], [0.85, 1.7 * math.sqrt(3) / 2, 0]])
    assert measured_ply((c, np.ones(3))) == 3
    assert measured_ply((c, np.full(3, 0.9))) == 2


@pytest.mark.parametrize("bad", [
    GenSpec("NOPE", {}),
    GenSpec("GRID", {}),
    GenSpec("GRID", {"m": 2.5}),
    GenSpec("GRID", {"m": 1}),
    GenSpec("GRID", {"m": 3}, jitter=0.25),
    GenSpec("GRID", {"m": 3}, jitter=-0.1),
    GenSpec("HELIX", {"n": 8, "pitch": 0}),
    GenSpec("UNION_MULTISCALE", {"k": 2, "m": 3, "ratio": 1.0}),
])
def test_bad_parameters(bad):
    with pytest.raises(BadParameters):
        generate(bad)


def test_helix_is_complete_graph_small():
    for n in (8, 12, 16):
        p, _ = generate(GenSpec("HELIX", {"n": n}))
        assert len(build_delaunay(p).edges()) == n * (n - 1) // 2
