"""Answer delivery to the beneficiary: haptic and visual codecs.

The haptic codec turns each answer into a cluster of 1..4 vibrations (A=1
.. D=4); clusters are separated by a minimum quiet interval so the wearer
can tell a new answer from the next vibration of the current one.  A linear
audibility model bounds how far the vibration can be heard.

The visual codec drives a watch face disguised as an analog clock: twelve
large dots (one per question of the current page) colored by answer, and an
inner ring of twelve small page-counter dots with exactly one highlighted.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._rng import generator
from .errors import AmplitudeOutOfRange, MalformedCluster, UnknownOption
from .protocol import AnswerMessage

OPTIONS = ("A", "B", "C", "D")
OPTION_VIBES = {"A": 1, "B": 2, "C": 3, "D": 4}
PENDING = "Pending"
SLOT_COLORS = {"A": "red", "B": "green", "C": "blue", "D": "yellow",
               PENDING: "purple"}
SLOTS_PER_PAGE = 12

# Audibility: distance grows linearly with amplitude; the wrist coefficient
# is anchored at 0.5 m for 70 units.  On a table the case resonates; only
# the ordering (table > wrist) is established, the factor is configurable.
WRIST_METERS_PER_UNIT = 0.5 / 70.0
TABLE_FACTOR_DEFAULT = 1.5
MAX_AMPLITUDE = 250.0


@dataclass(frozen=True)
class HapticParams:
    """Vibration timing: pulse length, intra-cluster gap, min cluster gap."""

    t1_vibe_ms: float = 200.0
    t2_gap_s: float = 1.0
    t3_min_s: float = 45.0
    amplitude: float = 70.0

    def __post_init__(self):
        if not self.t3_min_s > self.t2_gap_s:
            raise ValueError("inter-cluster gap must exceed the intra-cluster gap")
        if not 0.0 < self.amplitude <= MAX_AMPLITUDE:
            raise AmplitudeOutOfRange(
                f"amplitude must be in (0, {MAX_AMPLITUDE:g}], got {self.amplitude!r}")


@dataclass(frozen=True)
class VibrationEvent:
    start_t: float
    duration_ms: float
    amplitude: float

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ValueError("vibration duration must be positive")

    @property
    def end_t(self) -> float:
        return self.start_t + self.duration_ms / 1000.0


@dataclass(frozen=True)
class VibrationSchedule:
    events: tuple

    def __post_init__(self):
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.start_t <= prev.start_t:
                raise ValueError("event start times must be strictly increasing")
            if cur.start_t < prev.end_t:
                raise ValueError("events must not overlap")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["start_t", "duration_ms", "amplitude"])
        for e in self.events:
            w.writerow([f"{e.start_t:.9f}", f"{e.duration_ms:.9f}",
                        f"{e.amplitude:.9f}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "VibrationSchedule":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["start_t", "duration_ms", "amplitude"]:
            raise ValueError("unrecognized schedule header")
        return cls(tuple(VibrationEvent(float(a), float(b), float(c))
                         for a, b, c in rows[1:]))


def _check_option(option: str) -> str:
    if option not in OPTION_VIBES:
        raise UnknownOption(f"option must be one of {OPTIONS}, got {option!r}")
    return option


def encode_haptic(messages, params: HapticParams = HapticParams()) -> VibrationSchedule:
    """One vibration cluster per message, in order.

    The i-th message becomes k = 1..4 vibrations; a cluster starts at its
    message timestamp, but never sooner than t3_min after the previous
    cluster ended.
    """
    events = []
    prev_end = None
    prev_ts = None
    for msg in messages:
        k = OPTION_VIBES[_check_option(msg.option)]
        if prev_ts is not None and msg.timestamp < prev_ts:
            raise ValueError("message timestamps must be non-decreasing")
        prev_ts = msg.timestamp
        start = msg.timestamp
        if prev_end is not None:
            start = max(start, prev_end + params.t3_min_s)
        for i in range(k):
            t = start + i * (params.t1_vibe_ms / 1000.0 + params.t2_gap_s)
            events.append(VibrationEvent(t, params.t1_vibe_ms, params.amplitude))
        prev_end = events[-1].end_t
    return VibrationSchedule(tuple(events))


def decode_haptic(schedule: VibrationSchedule, split_gap_s: float = 10.0) -> list:
    """Recover the option sequence from a vibration schedule.

    Events are grouped into clusters wherever the quiet gap between one
    vibration's end and the next one's start exceeds ``split_gap_s``.
    """
    events = sorted(schedule.events, key=lambda e: e.start_t)
    if not events:
        return []
    options = []
    size = 1
    for prev, cur in zip(events, events[1:]):
        if cur.start_t - prev.end_t > split_gap_s:
            options.append(_cluster_option(size))
            size = 1
        else:
            size += 1
    options.append(_cluster_option(size))
    return options


def _cluster_option(size: int) -> str:
    if not 1 <= size <= 4:
        raise MalformedCluster(f"cluster of {size} vibrations has no option mapping")
    return OPTIONS[size - 1]


def apply_timing_jitter(schedule: VibrationSchedule, sigma_s: float,
                        seed: int) -> VibrationSchedule:
    """Perturb event starts with Gaussian jitter (delivery-delay model).

    Events are re-sorted afterwards and nudged apart by 1 ms where jitter
    made them collide, since a single motor cannot overlap its own pulses.
    """
    rng = generator(seed, "haptic-jitter")
    starts = np.array([e.start_t for e in schedule.events])
    starts = starts + rng.normal(0.0, sigma_s, starts.size)
    order = np.argsort(starts, kind="stable")
    events = []
    prev_end = -math.inf
    for idx in order:
        e = schedule.events[int(idx)]
        start = max(float(starts[idx]), prev_end + 1e-3)
        e = replace(e, start_t=start)
        events.append(e)
        prev_end = e.end_t
    return VibrationSchedule(tuple(events))


def audible_distance(amplitude: float, placement: str,
                     table_factor: float = TABLE_FACTOR_DEFAULT) -> float:
    """Distance (m) at which a third party can hear the vibration."""
    if not 0.0 < amplitude <= MAX_AMPLITUDE:
        raise AmplitudeOutOfRange(
            f"amplitude must be in (0, {MAX_AMPLITUDE:g}], got {amplitude!r}")
    if placement == "wrist":
        k = WRIST_METERS_PER_UNIT
    elif placement == "table":
        k = WRIST_METERS_PER_UNIT * table_factor
    else:
        raise ValueError(f"placement must be 'wrist' or 'table', got {placement!r}")
    return k * amplitude


def detectability_check(params: HapticParams, placement: str,
                        proctor_distance_m: float,
                        table_factor: float = TABLE_FACTOR_DEFAULT) -> str:
    """'safe' iff the vibration is inaudible at the proctor's distance.

    The boundary counts as unsafe: the wearer must sit strictly farther
    than the audible distance.
    """
    if proctor_distance_m <= 0:
        raise ValueError("proctor distance must be positive")
    d = audible_distance(params.amplitude, placement, table_factor)
    return "safe" if d < proctor_distance_m else "unsafe"


# --- visual clock-face codec -------------------------------------------------

@dataclass(frozen=True)
class ClockState:
    """One page of 12 answer slots plus the page-counter position."""

    page_index: int
    slots: tuple  # 12 entries of A/B/C/D/Pending

    def __post_init__(self):
        if self.page_index < 1:
            raise ValueError("page index starts at 1")
        if len(self.slots) != SLOTS_PER_PAGE:
            raise ValueError(f"need exactly {SLOTS_PER_PAGE} slots")
        for s in self.slots:
            if s != PENDING and s not in OPTION_VIBES:
                raise UnknownOption(f"slot value {s!r} is not an option or Pending")

    def to_json(self) -> str:
        return json.dumps({"schema_version": 1, "page_index": self.page_index,
                           "slots": list(self.slots)})

    @classmethod
    def from_json(cls, text: str) -> "ClockState":
        doc = json.loads(text)
        return cls(doc["page_index"], tuple(doc["slots"]))


def page_of(question_no: int) -> int:
    return (question_no - 1) // SLOTS_PER_PAGE + 1


def slot_of(question_no: int) -> int:
    """1-based slot (clock numeral) of a question on its page."""
    return (question_no - 1) % SLOTS_PER_PAGE + 1


def apply_answer(history, question_no: int, option: str) -> ClockState:
    """Clock state of the page containing ``question_no`` after recording
    the new answer on top of the history (latest answer per question wins)."""
    if question_no < 1:
        raise ValueError("question numbers start at 1")
    _check_option(option)
    page = page_of(question_no)
    slots = [PENDING] * SLOTS_PER_PAGE
    entries = sorted(history, key=lambda m: m.timestamp)
    for msg in entries:
        if page_of(msg.question_no) == page:
            slots[slot_of(msg.question_no) - 1] = _check_option(msg.option)
    slots[slot_of(question_no) - 1] = option
    return ClockState(page_index=page, slots=tuple(slots))


def decode_clock(state: ClockState) -> list:
    """Answer messages for the answered slots of a page (timestamps are not
    represented on the face and decode as 0)."""
    out = []
    for i, slot in enumerate(state.slots):
        if slot != PENDING:
            qno = (state.page_index - 1) * SLOTS_PER_PAGE + i + 1
            out.append(AnswerMessage(question_no=qno, option=slot, timestamp=0.0))
    return out


# --- SVG rendering -----------------------------------------------------------

_SVG_SIZE = 240.0
_FACE_RADIUS = 112.0
_BIG_DOT_RADIUS = 14.0
_BIG_RING_RADIUS = 92.0
_SMALL_DOT_RADIUS = 4.5
_SMALL_RING_RADIUS = 62.0
_PAGE_ACTIVE = "#555555"
_PAGE_INACTIVE = "#cccccc"


def _dot_center(numeral: int, ring_radius: float) -> tuple:
    angle = math.radians(numeral * 30.0)
    cx = _SVG_SIZE / 2 + ring_radius * math.sin(angle)
    cy = _SVG_SIZE / 2 - ring_radius * math.cos(angle)
    return cx, cy


def render_clock_svg(state: ClockState) -> str:
    """Deterministic SVG of the obfuscated watch face.

    Slot i sits at clock numeral i; small inner dots count pages with
    exactly the active page darkened.  Fixed hour/minute hands complete the
    clock disguise.
    """
    c = _SVG_SIZE / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE:.0f}" '
        f'height="{_SVG_SIZE:.0f}" viewBox="0 0 {_SVG_SIZE:.0f} {_SVG_SIZE:.0f}">',
        f'<rect width="{_SVG_SIZE:.0f}" height="{_SVG_SIZE:.0f}" fill="white"/>',
        f'<circle cx="{c:.3f}" cy="{c:.3f}" r="{_FACE_RADIUS:.3f}" '
        'fill="none" stroke="#333333" stroke-width="3"/>',
        f'<line x1="{c:.3f}" y1="{c:.3f}" x2="{c:.3f}" y2="{c - 46:.3f}" '
        'stroke="#333333" stroke-width="5" stroke-linecap="round"/>',
        f'<line x1="{c:.3f}" y1="{c:.3f}" x2="{c + 38:.3f}" y2="{c - 14:.3f}" '
        'stroke="#333333" stroke-width="3" stroke-linecap="round"/>',
    ]
    for i, slot in enumerate(state.slots, start=1):
        cx, cy = _dot_center(i, _BIG_RING_RADIUS)
        parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" '
                     f'r="{_BIG_DOT_RADIUS:.1f}" fill="{SLOT_COLORS[slot]}"/>')
    page_dot = (state.page_index - 1) % SLOTS_PER_PAGE + 1
    for i in range(1, SLOTS_PER_PAGE + 1):
        cx, cy = _dot_center(i, _SMALL_RING_RADIUS)
        fill = _PAGE_ACTIVE if i == page_dot else _PAGE_INACTIVE
        parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" '
                     f'r="{_SMALL_DOT_RADIUS:.1f}" fill="{fill}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
