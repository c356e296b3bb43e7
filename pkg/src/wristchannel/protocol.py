"""Pause detection and session segmentation.

A session trace decodes through two stages: threshold-based still-run
detection (a sample is "still" when every axis lies within +/-th), then a
small state machine that recognizes runs whose duration falls in the
opening or closing window and cuts out the gesture between them.  Runs
outside both windows are ignored; runs strictly between the windows are
ambiguous and handled per policy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AmbiguousRun, EmptyCalibration, UnterminatedSymbol
from .signal import GyroTrace, ProtocolParams

MIN_RUN_SECONDS = 0.5  # micro-stills below this never count as runs
THRESHOLD_MARGIN = 1.1
THRESHOLD_FLOOR = 1e-6  # rad/s, for degenerate all-zero calibration data
CALIBRATION_PERCENTILE = 99.0


@dataclass(frozen=True)
class DetectorConfig:
    """Per-writer decoding parameters.

    ``axis_mode`` selects whether the still test applies to all three axes
    simultaneously (default) or to the x axis alone.
    """

    th: float
    opening_window: tuple
    closing_window: tuple
    ambiguous_policy: str = "error"  # error | ignore
    axis_mode: str = "all"  # all | x

    def __post_init__(self):
        if self.th <= 0:
            raise ValueError("threshold must be positive")
        if self.ambiguous_policy not in ("error", "ignore"):
            raise ValueError(f"unknown ambiguous policy {self.ambiguous_policy!r}")
        if self.axis_mode not in ("all", "x"):
            raise ValueError(f"unknown axis mode {self.axis_mode!r}")
        if not self.closing_window[1] < self.opening_window[0]:
            raise ValueError("closing window must lie entirely below opening window")

    @classmethod
    def from_params(cls, th: float, params: ProtocolParams, **kw) -> "DetectorConfig":
        return cls(th=th, opening_window=params.opening_window,
                   closing_window=params.closing_window, **kw)


@dataclass(frozen=True)
class StillRun:
    start_t: float
    end_t: float

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass(frozen=True)
class PauseEvent:
    kind: str  # opening | closing
    start_t: float
    end_t: float

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass(frozen=True)
class AnswerSegment:
    index: int  # 1-based answer ordinal
    trace_slice: GyroTrace
    start_t: float
    end_t: float


@dataclass(frozen=True)
class AnswerMessage:
    question_no: int
    option: str  # A | B | C | D
    timestamp: float

    def __post_init__(self):
        if self.question_no < 1:
            raise ValueError("question numbers start at 1")
        if self.option not in ("A", "B", "C", "D"):
            raise ValueError(f"option must be one of A-D, got {self.option!r}")


def calibrate_threshold(training_pauses) -> float:
    """Still threshold from a training set of pause recordings.

    1.1x the pooled 99th percentile of |angular velocity| over all axes and
    traces, floored at 1e-6 rad/s for degenerate all-zero data.
    """
    pools = [np.abs(tr.xyz).ravel() for tr in training_pauses if len(tr)]
    if not pools:
        raise EmptyCalibration("need at least one non-empty pause trace")
    th = THRESHOLD_MARGIN * float(np.percentile(np.concatenate(pools),
                                                CALIBRATION_PERCENTILE))
    return max(th, THRESHOLD_FLOOR)


def _still_mask(trace: GyroTrace, th: float, axis_mode: str) -> np.ndarray:
    if axis_mode == "x":
        return (np.abs(trace.x) <= th).astype(np.uint8)
    return np.all(np.abs(trace.xyz) <= th, axis=1).astype(np.uint8)


def detect_still_runs(trace: GyroTrace, th: float,
                      axis_mode: str = "all") -> list:
    """Maximal still runs at least MIN_RUN_SECONDS long."""
    if th <= 0:
        raise ValueError("threshold must be positive")
    if len(trace) == 0:
        return []
    rate = trace.sample_rate_hz
    min_len = int(math.ceil(MIN_RUN_SECONDS * rate - 1e-9))
    bounds = kernels.still_run_bounds(_still_mask(trace, th, axis_mode), min_len)
    t0 = float(trace.t[0])
    return [StillRun(t0 + s / rate, t0 + e / rate) for s, e in bounds]


def _in_window(duration: float, window) -> bool:
    return window[0] <= duration <= window[1]


def segment_session(trace: GyroTrace, config: DetectorConfig):
    """Decode a session trace into (answer segments, pause events).

    State machine over still runs: an opening-window run starts a capture;
    the next closing-window run ends it and emits the segment between the
    two pauses.  A run whose duration falls strictly between the windows
    during capture triggers the ambiguous policy; all other runs are
    ignored.
    """
    runs = detect_still_runs(trace, config.th, config.axis_mode)
    rate = trace.sample_rate_hz
    t0 = float(trace.t[0])
    segments = []
    pauses = []
    capture_start = None  # time where the current opening pause ended
    opening = None
    for run in runs:
        dur = run.duration
        if capture_start is None:
            if _in_window(dur, config.opening_window):
                opening = PauseEvent("opening", run.start_t, run.end_t)
                pauses.append(opening)
                capture_start = run.end_t
            continue
        if _in_window(dur, config.closing_window):
            pauses.append(PauseEvent("closing", run.start_t, run.end_t))
            i = int(round((capture_start - t0) * rate))
            j = int(round((run.start_t - t0) * rate))
            segments.append(AnswerSegment(
                index=len(segments) + 1,
                trace_slice=trace.slice_samples(i, j),
                start_t=capture_start,
                end_t=run.start_t,
            ))
            capture_start = None
            opening = None
        elif config.closing_window[1] < dur < config.opening_window[0]:
            if config.ambiguous_policy == "error":
                raise AmbiguousRun(
                    f"still run of {dur:.2f}s at t={run.start_t:.2f}s falls between "
                    "the closing and opening windows")
            # ignore: stays in capture
    if capture_start is not None:
        raise UnterminatedSymbol(
            f"trace ended while capturing the answer after the opening pause "
            f"at t={opening.start_t:.2f}s")
    return segments, pauses


def reorder_messages(messages) -> list:
    """Realign answers by question number; duplicate questions keep the
    latest timestamp."""
    ordered = sorted(messages, key=lambda m: (m.question_no, m.timestamp))
    out = []
    for msg in ordered:
        if out and out[-1].question_no == msg.question_no:
            out[-1] = msg
        else:
            out.append(msg)
    return out


# --- file interfaces -------------------------------------------------------

def segment_report_json(segments, pauses) -> str:
    return json.dumps(
        {
            "schema_version": 1,
            "pauses": [
                {"kind": p.kind, "start_t": round(p.start_t, 9),
                 "end_t": round(p.end_t, 9)}
                for p in pauses
            ],
            "segments": [
                {"index": s.index, "start_t": round(s.start_t, 9),
                 "end_t": round(s.end_t, 9)}
                for s in segments
            ],
        },
        indent=2,
    )


def messages_to_jsonl(messages) -> str:
    return "".join(
        json.dumps({"question_no": m.question_no, "option": m.option,
                    "timestamp": round(m.timestamp, 9)}) + "\n"
        for m in messages)


def messages_from_jsonl(text: str) -> list:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        out.append(AnswerMessage(doc["question_no"], doc["option"], doc["timestamp"]))
    return out
