"""Parametric pen-stroke templates for the supported characters.

Each character is a sequence of strokes (2-D polylines in a nominal unit
box, with per-stroke writing durations).  The templates are a deliberately
simple surrogate for real handwriting: they only need to produce plausible,
mutually distinguishable wrist-rotation dynamics, not faithful letterforms.
Curved glyph parts are polyline-sampled arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UnknownSymbol

# Answer options are A..D; the attack writes these characters for them.
ANSWER_OPTIONS = ("A", "B", "C", "D")
DEFINITIVE_ALPHABET = ("A", "B", "C", "E")
EXTENDED_ALPHABET = ("A", "B", "C", "D", "E", "H", "I", "J", "K", "m",
                     "O", "q", "S", "W", "X", "y", "Z", "8")
SYMBOL_TO_OPTION = {"A": "A", "B": "B", "C": "C", "E": "D"}
OPTION_TO_SYMBOL = {v: k for k, v in SYMBOL_TO_OPTION.items()}

# Pen-up travel between strokes, part of a template's writing time.
HOP_DURATION = 0.12


@dataclass(frozen=True)
class Stroke:
    points: tuple
    duration: float

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a stroke needs at least two points")
        if self.duration <= 0:
            raise ValueError("stroke duration must be positive")


@dataclass(frozen=True)
class StrokeTemplate:
    symbol: str
    strokes: tuple

    def __post_init__(self):
        if not self.strokes:
            raise ValueError("template needs at least one stroke")
        if not 0.5 <= self.total_duration <= 4.0:
            raise ValueError(
                f"total duration {self.total_duration:.3f}s for {self.symbol!r} "
                "outside [0.5, 4.0]")

    @property
    def total_duration(self) -> float:
        """Writing time including pen-up hops between strokes."""
        return (sum(s.duration for s in self.strokes)
                + HOP_DURATION * (len(self.strokes) - 1))


def _arc(cx, cy, rx, ry, deg0, deg1, n=14):
    """Polyline sample of an elliptical arc (degrees, CCW positive)."""
    pts = []
    for i in range(n + 1):
        a = math.radians(deg0 + (deg1 - deg0) * i / n)
        pts.append((cx + rx * math.cos(a), cy + ry * math.sin(a)))
    return tuple(pts)


def _line(*pts):
    return tuple(pts)


def _template(symbol, *strokes):
    return StrokeTemplate(symbol, tuple(Stroke(tuple(p), d) for p, d in strokes))


STROKE_TEMPLATES = {
    t.symbol: t
    for t in (
        # The four attack symbols share one writing duration (1.15 s) so the
        # classifier has to read gesture shape, not segment length.
        _template("A",
                  (_line((0.0, 0.0), (0.4, 1.0), (0.8, 0.0)), 0.72),
                  (_line((0.15, 0.40), (0.65, 0.40)), 0.31)),
        _template("B",
                  (_line((0.0, 0.0), (0.0, 1.0)), 0.21),
                  (_arc(0.0, 0.75, 0.46, 0.25, 90, -90), 0.35),
                  (_arc(0.0, 0.25, 0.50, 0.25, 90, -90), 0.35)),
        _template("C",
                  (_arc(0.52, 0.5, 0.46, 0.48, 55, 305), 1.15)),
        _template("D",
                  (_line((0.0, 0.0), (0.0, 1.0)), 0.37),
                  (_arc(0.0, 0.5, 0.58, 0.50, 90, -90), 0.66)),
        _template("E",
                  (_line((0.0, 1.0), (0.0, 0.0)), 0.25),
                  (_line((0.0, 1.0), (0.60, 1.0)), 0.18),
                  (_line((0.0, 0.5), (0.52, 0.5)), 0.16),
                  (_line((0.0, 0.0), (0.60, 0.0)), 0.20)),
        _template("H",
                  (_line((0.0, 1.0), (0.0, 0.0)), 0.32),
                  (_line((0.72, 1.0), (0.72, 0.0)), 0.32),
                  (_line((0.0, 0.52), (0.72, 0.52)), 0.24)),
        _template("I",
                  (_line((0.5, 1.0), (0.5, 0.0)), 0.80)),
        _template("J",
                  (_line((0.25, 1.0), (0.85, 1.0)), 0.20),
                  (_line((0.6, 1.0), (0.6, 0.34)) + _arc(0.38, 0.34, 0.22, 0.30, 0, -160)[1:], 0.52)),
        _template("K",
                  (_line((0.0, 1.0), (0.0, 0.0)), 0.32),
                  (_line((0.60, 1.0), (0.02, 0.46)), 0.28),
                  (_line((0.16, 0.56), (0.66, 0.0)), 0.28)),
        _template("m",
                  (_line((0.0, 0.0), (0.0, 0.55))
                   + _arc(0.16, 0.40, 0.16, 0.16, 180, 0)[1:]
                   + _line((0.32, 0.40), (0.32, 0.0))[1:], 0.55),
                  (_arc(0.48, 0.40, 0.16, 0.16, 180, 0) + _line((0.64, 0.40), (0.64, 0.0))[1:], 0.42)),
        _template("O",
                  (_arc(0.5, 0.5, 0.44, 0.48, 90, 450), 1.00)),
        _template("q",
                  (_arc(0.62, 0.62, 0.30, 0.30, 0, 360), 0.55),
                  (_line((0.62, 0.62), (0.62, -0.35)), 0.30)),
        _template("S",
                  (_arc(0.48, 0.74, 0.30, 0.25, 55, 255)
                   + _arc(0.48, 0.26, 0.30, 0.25, 75, -125)[1:], 0.92)),
        _template("W",
                  (_line((0.0, 1.0), (0.22, 0.0), (0.44, 0.72), (0.66, 0.0), (0.88, 1.0)), 1.05)),
        _template("X",
                  (_line((0.0, 1.0), (0.70, 0.0)), 0.46),
                  (_line((0.70, 1.0), (0.0, 0.0)), 0.48)),
        _template("y",
                  (_line((0.0, 1.0), (0.36, 0.46)), 0.36),
                  (_line((0.72, 1.0), (0.0, -0.42)), 0.52)),
        _template("Z",
                  (_line((0.0, 1.0), (0.74, 1.0), (0.0, 0.0), (0.74, 0.0)), 0.82)),
        _template("8",
                  (_arc(0.5, 0.74, 0.27, 0.25, 90, 450)
                   + _arc(0.5, 0.26, 0.30, 0.27, 90, -270)[1:], 1.05)),
    )
}


def template_for(symbol: str) -> StrokeTemplate:
    try:
        return STROKE_TEMPLATES[symbol]
    except KeyError:
        raise UnknownSymbol(
            f"{symbol!r} has no stroke template (supported: "
            f"{sorted(STROKE_TEMPLATES)})") from None
