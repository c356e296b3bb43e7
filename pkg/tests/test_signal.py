"""Synthetic gesture generator contracts."""

import numpy as np
import pytest

from wristchannel import signal as sig
from wristchannel.errors import EmptyAlphabet, InvalidDuration, UnknownSymbol
from wristchannel.strokes import STROKE_TEMPLATES, template_for

ZERO_NOISE = sig.MercenaryProfile(id=99, seed=123)
DEFAULT = sig.default_profiles()[0]
PARAMS = sig.ProtocolParams()


class TestGyroTrace:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            sig.GyroTrace(60.0, [0.0, 0.5], np.zeros((2, 3)))
        tr = sig.GyroTrace.from_xyz(60.0, np.zeros((10, 3)))
        assert len(tr) == 10
        assert tr.duration == pytest.approx(10 / 60)

    def test_sample_access(self):
        tr = sig.GyroTrace.from_xyz(60.0, np.arange(9, dtype=float).reshape(3, 3))
        s = tr[1]
        assert (s.t, s.x, s.y, s.z) == (pytest.approx(1 / 60), 3.0, 4.0, 5.0)

    def test_csv_round_trip(self, tmp_path):
        tr = sig.synth_symbol(DEFAULT, "A", 0)
        path = tmp_path / "trace.csv"
        tr.to_csv(path)
        back = sig.GyroTrace.from_csv(path)
        assert back.sample_rate_hz == 60.0
        assert np.allclose(back.xyz, tr.xyz, atol=1e-9)
        # re-emitting the parsed file reproduces it byte for byte
        path2 = tmp_path / "trace2.csv"
        back.to_csv(path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_finite_required(self):
        xyz = np.zeros((10, 3))
        xyz[3, 1] = np.nan
        with pytest.raises(ValueError):
            sig.GyroTrace.from_xyz(60.0, xyz)


class TestTemplates:
    def test_duration_bounds(self):
        for name, tpl in STROKE_TEMPLATES.items():
            assert 0.5 <= tpl.total_duration <= 4.0, name

    def test_alphabets_covered(self):
        for s in sig.EXTENDED_ALPHABET:
            assert template_for(s) is not None
        assert set(sig.DEFINITIVE_ALPHABET) <= set(sig.EXTENDED_ALPHABET)

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            template_for("?")


class TestSynthSymbol:
    def test_deterministic(self):
        a = sig.synth_symbol(ZERO_NOISE, "A", 7)
        b = sig.synth_symbol(ZERO_NOISE, "A", 7)
        assert np.array_equal(a.xyz, b.xyz)

    def test_noise_changes_with_seed(self):
        a = sig.synth_symbol(DEFAULT, "A", 0)
        b = sig.synth_symbol(DEFAULT, "A", 1)
        assert not np.array_equal(a.xyz, b.xyz)

    def test_amplitude_scaling_exact(self):
        from dataclasses import replace
        doubled = replace(ZERO_NOISE, amplitude_scale=2.0)
        a = sig.synth_symbol(ZERO_NOISE, "A", 7)
        b = sig.synth_symbol(doubled, "A", 7)
        assert np.array_equal(b.xyz, 2.0 * a.xyz)

    def test_duration_follows_template(self):
        for symbol in sig.DEFINITIVE_ALPHABET:
            tr = sig.synth_symbol(ZERO_NOISE, symbol, 0)
            want = template_for(symbol).total_duration
            assert tr.duration == pytest.approx(want, abs=2 / 60)

    def test_peak_well_above_tremor(self):
        tr = sig.synth_symbol(DEFAULT, "B", 3)
        assert np.abs(tr.xyz).max() > 5 * DEFAULT.still_tremor_sigma

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            sig.synth_symbol(DEFAULT, "?", 0)


class TestSynthPause:
    def test_zero_tremor_all_zero(self):
        tr = sig.synth_pause(ZERO_NOISE, 12.0, 5)
        assert len(tr) == 720
        assert np.all(tr.xyz == 0.0)

    def test_tremor_bounded(self):
        tr = sig.synth_pause(DEFAULT, 5.0, 1)
        assert len(tr) == 300
        assert np.abs(tr.xyz).max() <= 2.5 * DEFAULT.still_tremor_sigma + 1e-12

    def test_invalid_duration(self):
        with pytest.raises(InvalidDuration):
            sig.synth_pause(DEFAULT, 0.0, 0)


@pytest.fixture(scope="module")
def session():
    script = sig.SessionScript.sequential(["A", "B", "C", "E", "A"])
    return sig.synth_session(DEFAULT, script, PARAMS)


class TestSynthSession:
    def test_annotation_counts(self, session):
        kinds = [a.kind for a in session.annotations]
        assert kinds.count("opening_pause") == 5
        assert kinds.count("closing_pause") == 5
        assert kinds.count("symbol") == 5

    def test_annotations_cover_trace(self, session):
        anns = session.annotations
        assert anns[0].start_t == 0.0
        for prev, cur in zip(anns, anns[1:]):
            assert cur.start_t == pytest.approx(prev.end_t, abs=1e-9)
        assert anns[-1].end_t == pytest.approx(session.trace.duration, abs=1e-9)

    def test_pause_durations_within_windows(self, session):
        for ann in session.truth_pauses("opening_pause"):
            assert 10.0 <= ann.end_t - ann.start_t <= 14.0
        for ann in session.truth_pauses("closing_pause"):
            assert 3.0 <= ann.end_t - ann.start_t <= 7.0

    def test_zero_jitter_exact_nominal(self):
        script = sig.SessionScript.sequential(["A"])
        sess = sig.synth_session(ZERO_NOISE, script, PARAMS)
        opening = sess.truth_pauses("opening_pause")[0]
        assert opening.end_t - opening.start_t == pytest.approx(12.0, abs=1e-9)

    def test_filler_never_fakes_a_pause(self, session):
        # no still run of >= t2 - eps inside filler, by construction
        th = 1.1 * 2.5 * DEFAULT.still_tremor_sigma
        rate = session.trace.sample_rate_hz
        for ann in session.annotations:
            if ann.kind != "filler":
                continue
            i = int(round(ann.start_t * rate))
            j = int(round(ann.end_t * rate))
            still = np.all(np.abs(session.trace.xyz[i:j]) <= th, axis=1)
            longest = 0
            run = 0
            for v in still:
                run = run + 1 if v else 0
                longest = max(longest, run)
            assert longest / rate < PARAMS.t2 - PARAMS.eps

    def test_deterministic(self):
        script = sig.SessionScript.sequential(["A", "B"])
        a = sig.synth_session(DEFAULT, script, PARAMS)
        b = sig.synth_session(DEFAULT, script, PARAMS)
        assert np.array_equal(a.trace.xyz, b.trace.xyz)

    def test_annotation_json_round_trip(self, session):
        text = session.annotations_json()
        back = sig.AnnotatedSession.annotations_from_json(text)
        assert len(back) == len(session.annotations)
        assert back[0].kind == session.annotations[0].kind
        sym = [a for a in back if a.kind == "symbol"][0]
        assert sym.symbol == "A" and sym.question_no == 1

    def test_empty_script_rejected(self):
        with pytest.raises(ValueError):
            sig.synth_session(DEFAULT, sig.SessionScript(()), PARAMS)


class TestSeparability:
    def test_still_below_symbol_activity(self):
        # max |component| during stills < 95th percentile during symbols
        for prof in sig.default_profiles()[:3]:
            script = sig.SessionScript.sequential(["A", "B", "C", "E"])
            sess = sig.synth_session(prof, script, PARAMS)
            rate = sess.trace.sample_rate_hz
            still_max = 0.0
            sym_p95 = []
            for ann in sess.annotations:
                i = int(round(ann.start_t * rate))
                j = int(round(ann.end_t * rate))
                block = np.abs(sess.trace.xyz[i:j])
                if ann.kind in ("opening_pause", "closing_pause"):
                    still_max = max(still_max, float(block.max()))
                elif ann.kind == "symbol":
                    sym_p95.append(float(np.percentile(block, 95)))
            assert still_max < min(sym_p95)


class TestTrainingSet:
    def test_counts(self):
        train = sig.synth_training_set(DEFAULT, sig.DEFINITIVE_ALPHABET, 30)
        assert sum(len(v) for v in train.values()) == 120

    def test_single(self):
        train = sig.synth_training_set(DEFAULT, ["A"], 1)
        assert list(train) == ["A"] and len(train["A"]) == 1

    def test_distinct_for_nonzero_noise(self):
        train = sig.synth_training_set(DEFAULT, ["A"], 8)
        traces = train["A"]
        for i in range(len(traces)):
            for j in range(i + 1, len(traces)):
                assert not np.array_equal(traces[i].xyz, traces[j].xyz)

    def test_empty_alphabet(self):
        with pytest.raises(EmptyAlphabet):
            sig.synth_training_set(DEFAULT, [], 30)


class TestScript:
    def test_question_numbers_strictly_increasing(self):
        with pytest.raises(ValueError):
            sig.SessionScript(((2, "A"), (2, "B")))
        with pytest.raises(ValueError):
            sig.SessionScript(((0, "A"),))

    def test_protocol_params_validation(self):
        with pytest.raises(ValueError):
            sig.ProtocolParams(t1=8.0, t2=5.0, eps=2.0)  # windows overlap
        with pytest.raises(ValueError):
            sig.ProtocolParams(eps=0.0)


def test_default_profiles_valid():
    profiles = sig.default_profiles()
    assert len(profiles) == 15
    assert len({p.seed for p in profiles}) == 15
    for p in profiles:
        assert 0.7 - 1e-9 <= p.amplitude_scale <= 1.3 + 1e-9
        assert 0.8 - 1e-9 <= p.duration_scale <= 1.2 + 1e-9
        assert p.pause_jitter_sigma <= PARAMS.eps / 3
