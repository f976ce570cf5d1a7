"""Plain-text point files.

One point per line as whitespace-separated decimals ``x y z`` or
``x y z w``; lines starting with ``#`` and blank lines are skipped.  A
literal is accepted when it names a double without loss: either it equals
that double exactly, or it is the shortest decimal that reads back as it.
Anything longer would be silently rounded, so it raises
:class:`PrecisionError`.  Writing uses the shortest round-trip form, so
write/read is the identity on doubles.
"""

from decimal import Decimal, InvalidOperation
from fractions import Fraction
import math

from .errors import ParseError, PrecisionError
from .geom import Point3, WeightedPoint


def parse_literal(text, line=None):
    try:
        dec = Decimal(text)
    except InvalidOperation:
        raise ParseError(f"not a decimal number: {text!r}", line) from None
    if not dec.is_finite():
        raise ParseError(f"non-finite value: {text!r}", line)
    value = float(dec)
    if not math.isfinite(value):
        raise PrecisionError(f"{text!r} overflows a double", line)
    if Fraction(value) != Fraction(dec) and Decimal(repr(value)) != dec:
        raise PrecisionError(f"{text!r} needs more than 53 significand bits", line)
    return value


def read_points(path):
    """Points of a file, ids numbered by order; weighted when lines have four fields."""
    points = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            fields = s.split()
            if len(fields) not in (3, 4):
                raise ParseError(f"expected 3 or 4 fields, found {len(fields)}", lineno)
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(f"expected {width} fields like earlier lines, found {len(fields)}",
                                 lineno)
            vals = [parse_literal(f, lineno) for f in fields]
            p = Point3(*vals[:3], id=len(points))
            points.append(WeightedPoint(p, vals[3]) if width == 4 else p)
    return tuple(points)


def format_points(points):
    lines = []
    for p in points:
        fields = [repr(float(c)) for c in p.xyz]
        if isinstance(p, WeightedPoint):
            fields.append(repr(float(p.weight)))
        lines.append(" ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


def write_points(path, points, comment=None):
    text = format_points(points)
    if comment:
        text = "".join(f"# {c}\n" for c in str(comment).splitlines()) + text
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
