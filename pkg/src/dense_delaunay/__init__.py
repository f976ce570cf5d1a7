"""Delaunay and regular triangulations of dense point sets in 3-space."""

from .errors import (BadGrid, BadK, BadParameters, DegenerateInput, DuplicatePoint,
                     EdgeNotFound, GeometryError, InsufficientData, NonPositiveValue,
                     ParseError, PrecisionError, SingularTransform, TooFewPoints, TooLarge,
                     UnknownScenario, UnlabeledVertex)
from .geom import (Point3, Segment, Sign, Sphere, WeightedPoint, circumsphere, in_sphere,
                   in_sphere_sos, orient3d, orthosphere, power_distance, power_in_sphere,
                   power_in_sphere_sos, segment_behind)
from .triangulation import (ComplexityStats, EdgeClass, EdgeKind, TetMesh, affine_transport,
                            build_delaunay, build_regular, classify_edge, crossing_edges,
                            empty_sphere_violations, stats, verify_delaunay_bruteforce)
from .metrics import closest_pair, diameter, order_k_spread, spread
from .wspd import build_octree, coverage_check, wspd_pairs
from .generators import GenSpec, generate, measured_ply
from .depth import BehindDigraph, depth_sort, detect_screw, verify_acyclic
from .experiments import RunRecord, FitResult, emit_csv, fit_exponent, run_scenario
from .pointio import read_points, write_points

__version__ = "0.1.0"
