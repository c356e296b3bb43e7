"""Shared fixtures: the full 15-writer pipeline run, computed once."""

import numpy as np
import pytest

from wristchannel import features, learn, protocol, signal


def run_profile(prof, answers=50, train_per_symbol=30):
    """Calibrate -> segment -> extract -> train -> classify for one writer."""
    params = signal.ProtocolParams()
    symbols = (list(signal.DEFINITIVE_ALPHABET) * ((answers + 3) // 4))[:answers]
    script = signal.SessionScript.sequential(symbols)
    session = signal.synth_session(prof, script, params)

    calib = [signal.synth_pause(prof, 12.0 if i % 2 == 0 else 5.0, seed=1000 + i)
             for i in range(10)]
    th = protocol.calibrate_threshold(calib)
    config = protocol.DetectorConfig.from_params(th, params)
    segments, pauses = protocol.segment_session(session.trace, config)

    train = signal.synth_training_set(prof, signal.DEFINITIVE_ALPHABET,
                                      train_per_symbol)
    rows, labels = [], []
    for sym, traces in train.items():
        for tr in traces:
            rows.append(features.extract(tr).values)
            labels.append(sym)
    train_ds = learn.Dataset(np.asarray(rows), labels)

    seg_rows = np.asarray([features.extract(s.trace_slice).values
                           for s in segments])
    truth = [a.symbol for a in session.truth_symbols()]
    test_ds = learn.Dataset(seg_rows, truth[:len(segments)]) if len(segments) else None

    logreg = learn.train_logreg(train_ds)
    forest = learn.train_forest(train_ds, seed=prof.seed)
    logreg_acc, logreg_cm = learn.evaluate(logreg, test_ds)
    forest_acc, forest_cm = learn.evaluate(forest, test_ds)
    return {
        "profile": prof,
        "session": session,
        "threshold": th,
        "segments": segments,
        "pauses": pauses,
        "train_ds": train_ds,
        "test_ds": test_ds,
        "logreg": logreg,
        "logreg_acc": logreg_acc,
        "logreg_cm": logreg_cm,
        "forest_acc": forest_acc,
        "forest_cm": forest_cm,
    }


@pytest.fixture(scope="session")
def default_pipeline():
    """Full end-to-end run for every shipped writer profile."""
    return [run_profile(prof) for prof in signal.default_profiles()]
