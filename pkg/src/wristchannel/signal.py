"""Raw sensor types and synthetic gesture/session generation.

Angular-velocity traces stand in for smartwatch gyroscope recordings of a
person writing answer characters between timed still-hand pauses.  The
stroke-to-gyro mapping: pen direction along the template polyline is
resampled at the sensor rate, lightly low-pass filtered, and differentiated
to give the wrist-rotation (z) axis; x and y are fixed coupling fractions
of z.  Straight strokes get a gentle direction bow so they still rotate the
wrist.  Each stroke ramps in and out with a 50 ms raised cosine.

All generation is purely seed-driven: identical inputs give bit-identical
traces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._rng import generator
from .errors import EmptyAlphabet, InvalidDuration
from .strokes import (ANSWER_OPTIONS, DEFINITIVE_ALPHABET, EXTENDED_ALPHABET,
                      HOP_DURATION, OPTION_TO_SYMBOL, SYMBOL_TO_OPTION,
                      StrokeTemplate, template_for)

__all__ = [
    "ANSWER_OPTIONS", "DEFINITIVE_ALPHABET", "EXTENDED_ALPHABET",
    "OPTION_TO_SYMBOL", "SYMBOL_TO_OPTION", "StrokeTemplate",
    "GyroSample", "GyroTrace", "MercenaryProfile", "ProtocolParams",
    "SessionScript", "FillerPolicy", "Annotation", "AnnotatedSession",
    "synth_symbol", "synth_pause", "synth_session", "synth_training_set",
    "default_profiles", "concat_traces",
]

DEFAULT_SAMPLE_RATE = 60.0
_SPACING_TOL = 1e-9 + 1e-12  # CSV round-trips land exactly on 1e-9
_STROKE_RAMP = 0.05  # s, raised-cosine on/off per stroke
_THETA_SMOOTH = 0.15  # s, Hann low-pass on pen direction
_STROKE_BOW = 0.35  # rad, direction bow on each stroke
_XY_COUPLING = (0.4, 0.25)
# Still tremor is clipped at 2.5 sigma: resting micro-tremor is bounded, and
# the clip keeps every tremor sample below the 1.1 * P99 calibrated
# threshold, which pause detection relies on.
_TREMOR_CLIP_SIGMA = 2.5


@dataclass(frozen=True)
class GyroSample:
    """One timestamped 3-axis angular-velocity measurement (rad/s)."""

    t: float
    x: float
    y: float
    z: float


class GyroTrace:
    """Uniformly sampled 3-axis angular-velocity series.

    ``xyz`` has shape (n, 3); ``t`` holds seconds since session start and
    must sit on the 1/sample_rate_hz grid.
    """

    __slots__ = ("sample_rate_hz", "t", "xyz")

    def __init__(self, sample_rate_hz: float, t, xyz, validate: bool = True):
        self.sample_rate_hz = float(sample_rate_hz)
        self.t = np.asarray(t, dtype=np.float64)
        self.xyz = np.asarray(xyz, dtype=np.float64)
        if validate:
            self._validate()

    @classmethod
    def from_xyz(cls, sample_rate_hz: float, xyz, start_index: int = 0) -> "GyroTrace":
        xyz = np.asarray(xyz, dtype=np.float64)
        t = (start_index + np.arange(xyz.shape[0])) / float(sample_rate_hz)
        return cls(sample_rate_hz, t, xyz)

    def _validate(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        if self.xyz.ndim != 2 or self.xyz.shape[1] != 3:
            raise ValueError(f"xyz must have shape (n, 3), got {self.xyz.shape}")
        if self.t.shape != (self.xyz.shape[0],):
            raise ValueError("t and xyz lengths differ")
        if self.t.size == 0:
            return
        if not np.all(np.isfinite(self.t)) or self.t[0] < 0:
            raise ValueError("timestamps must be finite and non-negative")
        if not np.all(np.isfinite(self.xyz)):
            raise ValueError("angular velocities must be finite")
        if self.t.size > 1:
            dt = np.diff(self.t)
            if np.any(dt <= 0):
                raise ValueError("timestamps must be strictly increasing")
            if np.max(np.abs(dt - 1.0 / self.sample_rate_hz)) > _SPACING_TOL:
                raise ValueError("inter-sample spacing off the 1/rate grid")

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> GyroSample:
        return GyroSample(float(self.t[i]), *(float(v) for v in self.xyz[i]))

    @property
    def x(self) -> np.ndarray:
        return self.xyz[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xyz[:, 1]

    @property
    def z(self) -> np.ndarray:
        return self.xyz[:, 2]

    @property
    def duration(self) -> float:
        """Covered time span; each sample owns [t, t + 1/rate)."""
        return self.t.size / self.sample_rate_hz

    def slice_samples(self, i: int, j: int) -> "GyroTrace":
        return GyroTrace(self.sample_rate_hz, self.t[i:j], self.xyz[i:j], validate=False)

    def to_csv(self, path):
        with open(str(path), "w") as fh:
            fh.write("t,x,y,z\n")
            for ti, (xi, yi, zi) in zip(self.t, self.xyz):
                fh.write(f"{ti:.9f},{xi:.9f},{yi:.9f},{zi:.9f}\n")

    @classmethod
    def from_csv(cls, path) -> "GyroTrace":
        data = np.loadtxt(str(path), delimiter=",", skiprows=1, ndmin=2)
        t = data[:, 0]
        if t.size < 2:
            raise ValueError("trace file needs at least two samples to infer the rate")
        rate = 1.0 / float(np.mean(np.diff(t)))
        if abs(rate - round(rate)) < 1e-3:
            rate = float(round(rate))
        return cls(rate, t, data[:, 1:4])


def concat_traces(traces) -> GyroTrace:
    """Join consecutive blocks onto one fresh time grid starting at 0."""
    traces = list(traces)
    if not traces:
        raise ValueError("nothing to concatenate")
    rate = traces[0].sample_rate_hz
    xyz = np.concatenate([tr.xyz for tr in traces], axis=0)
    return GyroTrace.from_xyz(rate, xyz)


@dataclass(frozen=True)
class MercenaryProfile:
    """Per-writer rendering parameters for the synthetic data generator."""

    id: int
    amplitude_scale: float = 1.0
    duration_scale: float = 1.0
    gesture_noise_sigma: float = 0.0
    still_tremor_sigma: float = 0.0
    pause_jitter_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.amplitude_scale <= 0 or self.duration_scale <= 0:
            raise ValueError("scales must be positive")
        if min(self.gesture_noise_sigma, self.still_tremor_sigma,
               self.pause_jitter_sigma) < 0:
            raise ValueError("noise levels must be non-negative")


@dataclass(frozen=True)
class ProtocolParams:
    """Timing of the pause protocol (opening t1, closing t2, tolerance eps)."""

    t1: float = 12.0
    t2: float = 5.0
    eps: float = 2.0
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not self.t1 - self.eps > self.t2 + self.eps:
            raise ValueError("opening and closing windows must be disjoint")

    @property
    def opening_window(self) -> tuple:
        return (self.t1 - self.eps, self.t1 + self.eps)

    @property
    def closing_window(self) -> tuple:
        return (self.t2 - self.eps, self.t2 + self.eps)


@dataclass(frozen=True)
class FillerPolicy:
    """Free movement between answers: motion bursts with short micro-stills."""

    total_min: float = 5.0
    total_max: float = 40.0
    burst_min: float = 0.5
    burst_max: float = 3.0
    still_min: float = 0.4
    burst_rms_min: float = 0.5
    burst_rms_max: float = 1.2


@dataclass(frozen=True)
class SessionScript:
    """Ordered (question_no, symbol) answers plus the filler policy."""

    answers: tuple
    filler: FillerPolicy = FillerPolicy()

    def __post_init__(self):
        qnos = [q for q, _ in self.answers]
        if any(q2 <= q1 for q1, q2 in zip(qnos, qnos[1:])):
            raise ValueError("question numbers must be strictly increasing")
        if any(q < 1 for q in qnos):
            raise ValueError("question numbers start at 1")

    @classmethod
    def sequential(cls, symbols, filler: FillerPolicy = FillerPolicy()) -> "SessionScript":
        return cls(tuple((i + 1, s) for i, s in enumerate(symbols)), filler)


@dataclass(frozen=True)
class Annotation:
    kind: str  # opening_pause | symbol | closing_pause | filler
    start_t: float
    end_t: float
    symbol: str | None = None
    question_no: int | None = None


@dataclass
class AnnotatedSession:
    """Session trace plus the ground-truth segment layout."""

    trace: GyroTrace
    annotations: list
    profile_id: int | None = None

    def __post_init__(self):
        prev_end = float(self.trace.t[0]) if len(self.trace) else 0.0
        for ann in self.annotations:
            if not math.isclose(ann.start_t, prev_end, abs_tol=1e-9):
                raise ValueError("annotations must tile the trace without gaps")
            if ann.end_t <= ann.start_t:
                raise ValueError("annotation must have positive duration")
            prev_end = ann.end_t
        if self.annotations and not math.isclose(
                prev_end, self.trace.duration, abs_tol=1e-9):
            raise ValueError("annotations must cover the whole trace")

    def truth_pauses(self, kind: str):
        return [a for a in self.annotations if a.kind == kind]

    def truth_symbols(self):
        return [a for a in self.annotations if a.kind == "symbol"]

    def annotations_json(self) -> str:
        return json.dumps(
            {
                "schema_version": 1,
                "sample_rate_hz": self.trace.sample_rate_hz,
                "profile_id": self.profile_id,
                "annotations": [
                    {
                        "kind": a.kind,
                        "start_t": round(a.start_t, 9),
                        "end_t": round(a.end_t, 9),
                        "symbol": a.symbol,
                        "question_no": a.question_no,
                    }
                    for a in self.annotations
                ],
            },
            indent=2,
        )

    @classmethod
    def annotations_from_json(cls, text: str) -> list:
        doc = json.loads(text)
        return [Annotation(a["kind"], a["start_t"], a["end_t"],
                           a.get("symbol"), a.get("question_no"))
                for a in doc["annotations"]]


# --- deterministic gesture rendering --------------------------------------

def _polyline_angles(points: np.ndarray, n_samples: int) -> np.ndarray:
    """Pen direction at n equally spaced arc-length midpoints."""
    pts = np.asarray(points, dtype=np.float64)
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    keep = seg_len > 1e-12
    if not np.any(keep):
        return np.zeros(n_samples)
    seg = seg[keep]
    seg_len = seg_len[keep]
    angles = np.unwrap(np.arctan2(seg[:, 1], seg[:, 0]))
    cum = np.cumsum(seg_len)
    s = (np.arange(n_samples) + 0.5) / n_samples * cum[-1]
    idx = np.minimum(np.searchsorted(cum, s), seg_len.size - 1)
    return angles[idx]


def _ramp_envelope(n: int, ramp_samples: int) -> np.ndarray:
    env = np.ones(n)
    k = min(ramp_samples, n // 2)
    if k > 0:
        edge = 0.5 * (1.0 - np.cos(math.pi * (np.arange(k) + 0.5) / k))
        env[:k] *= edge
        env[n - k:] *= edge[::-1]
    return env


def _hann_smooth(x: np.ndarray, window: int) -> np.ndarray:
    if window < 3 or x.size < 3:
        return x
    w = np.hanning(window + 2)[1:-1]
    w /= w.sum()
    padded = np.pad(x, (window // 2, window - 1 - window // 2), mode="edge")
    return np.convolve(padded, w, mode="valid")


def _leg_sample_counts(durations, rate: float) -> list:
    bounds = np.rint(np.cumsum([0.0] + list(durations)) * rate).astype(int)
    return [max(1, int(b - a)) for a, b in zip(bounds[:-1], bounds[1:])]


def _symbol_xyz(template: StrokeTemplate, profile: MercenaryProfile) -> np.ndarray:
    """Deterministic (noise-free, amplitude 1) xyz rendering of a template."""
    rate = DEFAULT_SAMPLE_RATE
    legs = []  # (points, duration, is_stroke)
    for i, stroke in enumerate(template.strokes):
        if i > 0:
            prev_end = template.strokes[i - 1].points[-1]
            legs.append(((prev_end, stroke.points[0]), HOP_DURATION, False))
        legs.append((stroke.points, stroke.duration, True))
    counts = _leg_sample_counts(
        [d * profile.duration_scale for _, d, _ in legs], rate)
    theta_parts = []
    for (pts, _, is_stroke), ns in zip(legs, counts):
        th = _polyline_angles(np.asarray(pts), ns)
        if is_stroke:
            th = th + _STROKE_BOW * np.sin(math.pi * (np.arange(ns) + 0.5) / ns)
        theta_parts.append(th)
    theta = np.unwrap(np.concatenate(theta_parts))
    window = int(round(_THETA_SMOOTH * rate)) | 1
    theta = _hann_smooth(theta, window)
    omega = np.gradient(theta) * rate
    env = np.ones(omega.size)
    ramp = max(1, int(round(_STROKE_RAMP * rate)))
    pos = 0
    for ns in counts:
        env[pos:pos + ns] *= _ramp_envelope(ns, ramp)
        pos += ns
    z = omega * env
    return np.stack([_XY_COUPLING[0] * z, _XY_COUPLING[1] * z, z], axis=1)


def _gesture_noise(sigma: float, n: int, rng) -> np.ndarray:
    """Zero-mean Gaussian motor noise, band-limited to the gesture band.

    Smoothing to the same low-pass band as the rendered strokes makes the
    noise perturb gesture shape rather than just adding a separable white
    floor, so the noise level maps smoothly onto classification difficulty.
    Renormalized so the per-sample standard deviation stays sigma.
    """
    raw = rng.normal(0.0, 1.0, (n, 3))
    window = int(round(_THETA_SMOOTH * DEFAULT_SAMPLE_RATE)) | 1
    w = np.hanning(window + 2)[1:-1]
    w /= w.sum()
    gain = sigma / math.sqrt(float(np.sum(w * w)))
    out = np.empty_like(raw)
    for k in range(3):
        out[:, k] = _hann_smooth(raw[:, k], window)
    return gain * out


def synth_symbol(profile: MercenaryProfile, symbol: str, seed: int) -> GyroTrace:
    """One synthetic character gesture.

    Deterministic for fixed (profile, symbol, seed); the deterministic part
    scales linearly with amplitude_scale, with additive zero-mean Gaussian
    noise of per-sample sigma gesture_noise_sigma on each axis.
    """
    template = template_for(symbol)
    base = _symbol_xyz(template, profile)
    xyz = profile.amplitude_scale * base
    if profile.gesture_noise_sigma > 0:
        rng = generator(profile.seed, "symbol", symbol, seed)
        xyz = xyz + _gesture_noise(profile.gesture_noise_sigma, xyz.shape[0], rng)
    return GyroTrace.from_xyz(DEFAULT_SAMPLE_RATE, xyz)


def synth_pause(profile: MercenaryProfile, duration: float, seed: int) -> GyroTrace:
    """A still-hand interval: i.i.d. tremor noise on each axis."""
    if not duration > 0:
        raise InvalidDuration(f"pause duration must be positive, got {duration!r}")
    n = max(1, int(round(duration * DEFAULT_SAMPLE_RATE)))
    if profile.still_tremor_sigma > 0:
        rng = generator(profile.seed, "pause", seed)
        xyz = _tremor(profile.still_tremor_sigma, n, rng)
    else:
        xyz = np.zeros((n, 3))
    return GyroTrace.from_xyz(DEFAULT_SAMPLE_RATE, xyz)


def _tremor(sigma: float, n: int, rng) -> np.ndarray:
    clip = _TREMOR_CLIP_SIGMA * sigma
    return np.clip(rng.normal(0.0, sigma, (n, 3)), -clip, clip)


def _still_xyz(profile: MercenaryProfile, n: int, rng) -> np.ndarray:
    if profile.still_tremor_sigma > 0:
        return _tremor(profile.still_tremor_sigma, n, rng)
    return np.zeros((n, 3))


def _burst_xyz(profile: MercenaryProfile, n: int, rms: float, rng) -> np.ndarray:
    """Smooth random movement well above still tremor."""
    raw = rng.normal(0.0, 1.0, (n, 3))
    window = max(5, int(round(0.25 * DEFAULT_SAMPLE_RATE)) | 1)
    out = np.empty_like(raw)
    for k in range(3):
        out[:, k] = _hann_smooth(raw[:, k], window)
    scale = rms / np.maximum(np.sqrt(np.mean(out ** 2, axis=0)), 1e-12)
    out *= scale
    ramp = max(1, int(round(_STROKE_RAMP * DEFAULT_SAMPLE_RATE)))
    out *= _ramp_envelope(n, ramp)[:, None]
    return out


def _filler_blocks(profile: MercenaryProfile, policy: FillerPolicy,
                   still_cap: float, rng) -> list:
    """Alternating burst/still blocks, starting and ending with a burst."""
    total = rng.uniform(policy.total_min, policy.total_max)
    blocks = []
    acc = 0.0
    while True:
        rem = total - acc
        if rem <= policy.burst_max + policy.still_min + policy.burst_min:
            blocks.append(("burst", max(rem, policy.burst_min)))
            break
        b = rng.uniform(policy.burst_min,
                        min(policy.burst_max, rem - policy.still_min - policy.burst_min))
        blocks.append(("burst", b))
        acc += b
        s_hi = min(still_cap, total - acc - policy.burst_min)
        if s_hi > policy.still_min:
            s = rng.uniform(policy.still_min, s_hi)
            blocks.append(("still", s))
            acc += s
    out = []
    for kind, dur in blocks:
        n = max(1, int(round(dur * DEFAULT_SAMPLE_RATE)))
        if kind == "burst":
            rms = rng.uniform(policy.burst_rms_min, policy.burst_rms_max) \
                * profile.amplitude_scale
            out.append(_burst_xyz(profile, n, rms, rng))
        else:
            out.append(_still_xyz(profile, n, rng))
    return out


def _jittered(nominal: float, eps: float, sigma: float, rng) -> float:
    jitter = rng.normal(0.0, sigma) if sigma > 0 else 0.0
    return nominal + float(np.clip(jitter, -0.9 * eps, 0.9 * eps))


def synth_session(profile: MercenaryProfile, script: SessionScript,
                  params: ProtocolParams) -> AnnotatedSession:
    """Full protocol session: (opening pause, symbol, closing pause, filler)*.

    Pause durations are jittered within +/-0.9*eps of their nominals;
    filler micro-stills are capped below t2 - eps so free movement can
    never fake a pause.
    """
    if not script.answers:
        raise ValueError("script must contain at least one answer")
    rate = params.sample_rate_hz
    if rate != DEFAULT_SAMPLE_RATE:
        raise ValueError("only the 60 Hz profile generator is implemented")
    still_cap = params.t2 - params.eps - 0.5
    blocks = []  # (kind, xyz, symbol, question_no)
    for qno, symbol in script.answers:
        rng = generator(profile.seed, "session", qno)
        d_open = _jittered(params.t1, params.eps, profile.pause_jitter_sigma, rng)
        n_open = int(round(d_open * rate))
        blocks.append(("opening_pause", _still_xyz(profile, n_open, rng), None, qno))
        sym = synth_symbol(profile, symbol, seed=-qno)
        blocks.append(("symbol", sym.xyz, symbol, qno))
        d_close = _jittered(params.t2, params.eps, profile.pause_jitter_sigma, rng)
        n_close = int(round(d_close * rate))
        blocks.append(("closing_pause", _still_xyz(profile, n_close, rng), None, qno))
        filler = np.concatenate(
            _filler_blocks(profile, script.filler, still_cap, rng), axis=0)
        blocks.append(("filler", filler, None, None))
    xyz = np.concatenate([b[1] for b in blocks], axis=0)
    trace = GyroTrace.from_xyz(rate, xyz)
    annotations = []
    pos = 0
    for kind, bxyz, symbol, qno in blocks:
        n = bxyz.shape[0]
        annotations.append(Annotation(kind, pos / rate, (pos + n) / rate, symbol, qno))
        pos += n
    return AnnotatedSession(trace, annotations, profile_id=profile.id)


def synth_training_set(profile: MercenaryProfile, symbols, n_per_symbol: int = 30):
    """Cleanly delimited training gestures: {symbol: [trace, ...]}."""
    symbols = list(symbols)
    if not symbols:
        raise EmptyAlphabet("training set needs at least one symbol")
    if n_per_symbol < 1:
        raise ValueError("n_per_symbol must be >= 1")
    return {s: [synth_symbol(profile, s, seed=i) for i in range(n_per_symbol)]
            for s in symbols}


# --- default writer population --------------------------------------------

# Per-writer motor-noise factor relative to gesture amplitude, tuned so the
# shipped end-to-end pipeline lands in the intended accuracy band (see
# tests/test_acceptance.py).
_PRESET_NOISE_REL = (7.0, 5.9, 6.5, 6.2, 5.6, 6.4, 6.2, 7.0,
                     6.0, 6.2, 6.0, 6.8, 6.6, 6.2, 6.1)


def default_profiles(n: int = 15) -> list:
    """The shipped population of synthetic writers."""
    profiles = []
    for i in range(n):
        frac = i / max(n - 1, 1)
        amplitude = 0.7 + 0.6 * ((i * 7) % n) / max(n - 1, 1)
        profiles.append(MercenaryProfile(
            id=i + 1,
            amplitude_scale=amplitude,
            duration_scale=0.8 + 0.4 * ((i * 11) % n) / max(n - 1, 1),
            gesture_noise_sigma=round(amplitude * _PRESET_NOISE_REL[i % n], 4),
            still_tremor_sigma=0.008 + 0.012 * frac,
            pause_jitter_sigma=0.25 + 0.35 * frac,
            seed=0x5EED_0000 + i,
        ))
    return profiles
