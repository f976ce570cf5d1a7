"""Scenario runner, exponent fits and CSV output."""

import csv
from dataclasses import dataclass, field
import itertools
import math
import statistics

import numpy as np

from .errors import (BadGrid, GeometryError, InsufficientData, NonPositiveValue,
                     UnknownScenario)
from .generators import GenSpec, PRESET_JITTER, generate
from .metrics import order_k_spread, spread
from .triangulation import build_delaunay, build_regular, crossing_edges, stats

CSV_COLUMNS = ("scenario", "kind", "n", "k", "spread", "delta_k", "edges", "triangles",
               "tets", "max_degree", "build_millis", "seed", "rescale")
TIMING_REPEATS = 7


@dataclass
class RunRecord:
    scenario: str
    kind: str
    gen: dict
    n: int = None
    k: int = None
    spread: float = None
    delta_k: float = None
    edges: int = None
    triangles: int = None
    tets: int = None
    max_degree: int = None
    build_millis: float = None
    seed: int = 0
    rescale: float = None
    error: str = None
    extra: dict = field(default_factory=dict)

    def csv_row(self):
        return [_cell(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual_rms: float
    count: int


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- scenarios -----------------------------------------------------------------

def _median_build(points, seed, weighted, repeats):
    build = build_regular if weighted else build_delaunay
    mesh = build(points, seed=seed)
    times = [mesh.build_millis]
    for _ in range(repeats - 1):
        times.append(build(points, seed=seed).build_millis)
    return mesh, statistics.median(times)


def _fill(rec, points, meta, seed, timing, weighted=False, repeats=1):
    mesh, millis = _median_build(points, seed, weighted, repeats if timing else 1)
    st = stats(mesh)
    rec.n = len(points)
    rec.edges, rec.triangles, rec.tets = st.edges, st.triangles, st.tets
    rec.max_degree = st.max_degree
    rec.build_millis = millis if timing else None
    rec.rescale = meta.rescale
    if meta.spread_measure == "spread":
        rec.spread = spread(points).spread
    return mesh, st


def _interior_degree(mesh, lo, hi):
    edges = mesh.edges()
    deg = np.bincount(edges.ravel(), minlength=mesh.n)
    inside = np.all((mesh.xyz >= lo) & (mesh.xyz <= hi), axis=1)
    return float(deg[inside].mean()) if inside.any() else math.nan


def _segment_pairs(meta):
    g = math.isqrt(meta.params["n"] // meta.params["delta"])
    out = []
    for i in range(1, g + 1):
        for j in range(1, g + 1):
            if i < g:
                out.append(((i, j), (i + 1, j)))
            if j < g:
                out.append(((i, j), (i, j + 1)))
    return out


def _run_segment(rec, p, seed, timing):
    spec = GenSpec("SEGMENT_LATTICE", {"n": p["n"], "delta": p["delta"]}, seed, p["jitter"])
    points, meta = generate(spec)
    rec.gen = _echo(spec)
    mesh, _ = _fill(rec, points, meta, seed, timing)
    lab = meta.labels
    edges = mesh.edges()
    el = [(lab[a], lab[b]) for a, b in edges]
    counts = {}
    for a, b in el:
        if a != b:
            key = tuple(sorted((a, b)))
            counts[key] = counts.get(key, 0) + 1
    adj = [counts.get(tuple(sorted(pr)), 0) for pr in _segment_pairs(meta)]
    rec.extra["adjacent_pairs"] = len(adj)
    rec.extra["min_adjacent_edges"] = min(adj) if adj else 0
    rec.extra["bichromatic_edges"] = crossing_edges(mesh, list(lab))[0]
    moved, mmeta = generate(GenSpec("SEGMENT_LATTICE", {**spec.params, "transport": True},
                                    seed, p["jitter"]))
    reg = build_regular(moved, seed=seed)
    rec.extra["transport_identical"] = bool(reg.same_complex(mesh))
    rec.extra["transport_exact"] = mmeta.extra.get("transport_exact")
    rec.extra["transported_spread"] = spread(moved).spread


def _echo(spec):
    return {"kind": spec.kind, "params": dict(spec.params), "seed": spec.seed,
            "jitter": spec.jitter}


def _simple(kind, weighted=False, repeats=1, setup=None, after=None):
    def run(rec, p, seed, timing):
        params, jitter = setup(p)
        spec = GenSpec(kind, params, seed, jitter)
        points, meta = generate(spec)
        rec.gen = _echo(spec)
        mesh, _ = _fill(rec, points, meta, seed, timing, weighted, repeats)
        if after:
            after(rec, p, points, meta, mesh)
    return run


def _order_k_after(rec, p, points, meta, mesh):
    rep = order_k_spread(points, meta.extra["k"])
    rec.k, rec.delta_k = rep.k, rep.delta_k_hat
    rec.extra["target"] = (rec.n / math.log(rec.n)) ** (1.0 / 3.0)


def _meijering_after(rec, p, points, meta, mesh):
    s = meta.params["side"]
    rec.extra["interior_degree"] = _interior_degree(mesh, 0.25 * s, 0.75 * s)


def _kply_after(rec, p, points, meta, mesh):
    rec.k = p["k"]
    rec.spread = spread(points).spread
    rec.extra["measured_ply"] = meta.extra["measured_ply"]
    rec.extra["redundant"] = len(mesh.redundant)


def _union_after(rec, p, points, meta, mesh):
    rec.k = p["k"]


# name -> (kind, required keys, defaults, runner)
SCENARIOS = {
    "dense-scaling": ("GRID", ("m",), {"jitter": PRESET_JITTER},
                      _simple("GRID", setup=lambda p: ({"m": p["m"]}, p["jitter"]))),
    "order-k-random": ("RANDOM_CUBE", ("n",), {"jitter": 0.0},
                       _simple("RANDOM_CUBE", setup=lambda p: ({"n": p["n"]}, p["jitter"]),
                               after=_order_k_after)),
    "meijering-degree": ("RANDOM_CUBE", ("n",), {"side": 1.0, "jitter": 0.0},
                         _simple("RANDOM_CUBE",
                                 setup=lambda p: ({"n": p["n"], "side": p["side"]}, p["jitter"]),
                                 after=_meijering_after)),
    "helix-quadratic": ("HELIX", ("n",), {"pitch": 1e-3, "jitter": 0.0},
                        _simple("HELIX", setup=lambda p: ({"n": p["n"], "pitch": p["pitch"]},
                                                          p["jitter"]))),
    "segment-lattice": ("SEGMENT_LATTICE", ("n", "delta"), {"jitter": PRESET_JITTER},
                        _run_segment),
    "cylinder-three-halves": ("CYLINDER", ("n",), {"tilt": 0.25, "jitter": 0.0},
                              _simple("CYLINDER",
                                      setup=lambda p: ({"n": p["n"], "tilt": p["tilt"]},
                                                       p["jitter"]))),
    "union-multiscale": ("UNION_MULTISCALE", ("k",), {"m": 4, "ratio": 2.0,
                                                      "jitter": PRESET_JITTER},
                         _simple("UNION_MULTISCALE",
                                 setup=lambda p: ({"k": p["k"], "m": p["m"],
                                                   "ratio": p["ratio"]}, p["jitter"]),
                                 after=_union_after)),
    "kply-regular": ("KPLY_BALLS", ("n", "k"), {"jitter": 0.1},
                     _simple("KPLY_BALLS", weighted=True,
                             setup=lambda p: ({"n": p["n"], "k": p["k"]}, p["jitter"]),
                             after=_kply_after)),
    "incremental-timing": ("GRID", ("m",), {"jitter": PRESET_JITTER},
                           _simple("GRID", repeats=TIMING_REPEATS,
                                   setup=lambda p: ({"m": p["m"]}, p["jitter"]))),
}
ALWAYS_TIMED = ("incremental-timing",)


def _expand(name, grid):
    kind, required, defaults, _ = SCENARIOS[name]
    if not grid:
        raise BadGrid("parameter grid is empty")
    allowed = set(required) | set(defaults)
    unknown = sorted(set(grid) - allowed)
    if unknown:
        raise BadGrid(f"unknown grid keys for {name}: {unknown}; allowed {sorted(allowed)}")
    missing = [k for k in required if k not in grid]
    if missing:
        raise BadGrid(f"{name} needs grid keys {missing}")
    keys = list(grid)
    values = []
    for k in keys:
        v = grid[k]
        v = list(v) if isinstance(v, (list, tuple, range)) else [v]
        if not v:
            raise BadGrid(f"grid key {k} has no values")
        values.append(v)
    for combo in itertools.product(*values):
        yield {**defaults, **dict(zip(keys, combo))}


def run_scenario(name, grid, seeds=(0,), timing=False):
    """One :class:`RunRecord` per (grid point, seed), in grid order.

    Build times are recorded only when ``timing`` is set (or for the timing
    scenario), so untimed runs are byte-reproducible.  A row that raises a
    geometry error keeps the message in ``error`` and the run continues.
    """
    if name not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    kind, _, _, runner = SCENARIOS[name]
    seeds = list(seeds)
    if not seeds:
        raise BadGrid("need at least one seed")
    timed = timing or name in ALWAYS_TIMED
    rows = []
    for p in _expand(name, grid):
        for seed in seeds:
            rec = RunRecord(scenario=name, kind=kind, gen={"params": p}, seed=int(seed))
            try:
                runner(rec, p, int(seed), timed)
            except GeometryError as err:
                rec.error = f"{type(err).__name__}: {err}"
            rows.append(rec)
    return rows


def parse_grid(text):
    """``"m=4,6,8;jitter=0"`` -> ``{"m": [4, 6, 8], "jitter": [0]}``."""
    grid = {}
    for part in filter(None, (s.strip() for s in text.split(";"))):
        if "=" not in part:
            raise BadGrid(f"grid entry {part!r} is not key=values")
        key, vals = part.split("=", 1)
        items = [v.strip() for v in vals.split(",") if v.strip()]
        if not items:
            raise BadGrid(f"grid key {key.strip()} has no values")
        parsed = []
        for v in items:
            try:
                parsed.append(int(v))
            except ValueError:
                try:
                    parsed.append(float(v))
                except ValueError:
                    raise BadGrid(f"grid value {v!r} is not a number") from None
        grid[key.strip()] = parsed
    if not grid:
        raise BadGrid("parameter grid is empty")
    return grid


# -- fits and output -------------------------------------------------------------

def _value(row, name):
    if isinstance(row, dict):
        return row.get(name)
    if hasattr(row, name):
        return getattr(row, name)
    return row.extra.get(name)


def fit_exponent(rows, x_field, y_field):
    """Least-squares line through ``(log x, log y)``."""
    rows = list(rows)
    if len(rows) < 3:
        raise InsufficientData(f"need at least 3 rows, got {len(rows)}")
    xs, ys = [], []
    for r in rows:
        x, y = _value(r, x_field), _value(r, y_field)
        if x is None or y is None or not (x > 0 and y > 0):
            raise NonPositiveValue(f"{x_field}={x!r}, {y_field}={y!r} must be positive")
        xs.append(math.log(x))
        ys.append(math.log(y))
    X = np.column_stack([np.asarray(xs), np.ones(len(xs))])
    (slope, icept), *_ = np.linalg.lstsq(X, np.asarray(ys), rcond=None)
    res = np.asarray(ys) - X @ np.array([slope, icept])
    return FitResult(float(slope), float(icept), float(np.sqrt(np.mean(res ** 2))), len(rows))


def emit_csv(rows, path):
    rows = list(rows)
    if not rows:
        raise InsufficientData("no rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.csv_row())
