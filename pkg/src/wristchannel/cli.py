"""Command-line orchestration of the full toolkit.

Subcommands:
  synth     write synthetic per-writer session traces + annotations + training sets
  pipeline  end-to-end run: calibrate, segment, classify, deliver, score, model
  theory    closed-form model quantities, surfaces and the Monte Carlo check
  channel   haptic/clock codec utilities on files

A single JSON config drives the experiment commands; flags override config
keys.  Every command is deterministic given --seed.  Exit codes: 0 success,
1 stage failure, 2 invalid configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import features, learn, protocol, signal, theory
from . import channel as haptics
from .errors import InvalidOptions, InvalidParams, WristChannelError

REPORT_SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    """One reproducible experiment description."""

    n_profiles: int = 15
    profile_list: tuple = ()  # explicit writer profiles; overrides n_profiles
    answers: int = 50
    train_per_symbol: int = 30
    calibration_pauses: int = 10
    alphabet: tuple = signal.DEFINITIVE_ALPHABET
    classifier: str = "logreg"  # logreg | forest | both
    channel: str = "haptic"  # haptic | clock
    seed: int = 1
    t1: float = 12.0
    t2: float = 5.0
    eps: float = 2.0
    pass_mark: int | None = None  # defaults to ceil(0.7 * answers)
    theory_p: float = 1.0
    theory_m: int = 4
    theory_theta: float = 0.25
    forest_trees: int = 60
    logreg_l2: float = 1e-3
    haptic: "haptics.HapticParams" = field(default_factory=lambda: haptics.HapticParams())

    @classmethod
    def load(cls, path=None, overrides=None) -> "ExperimentConfig":
        cfg = cls()
        doc = {}
        if path:
            doc = json.loads(Path(path).read_text())
        doc.update(overrides or {})
        haptic_doc = doc.pop("haptic", None)
        profiles_doc = doc.pop("profiles", None)
        if isinstance(profiles_doc, int):
            doc["n_profiles"] = profiles_doc
        elif profiles_doc is not None:
            doc["profile_list"] = tuple(
                signal.MercenaryProfile(**entry) for entry in profiles_doc)
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            if key == "alphabet":
                value = tuple(value)
            setattr(cfg, key, value)
        if haptic_doc:
            cfg.haptic = haptics.HapticParams(**haptic_doc)
        cfg.validate()
        return cfg

    def validate(self):
        if self.classifier not in ("logreg", "forest", "both"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.channel not in ("haptic", "clock"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.pass_mark is None:
            self.pass_mark = -(-7 * self.answers // 10)
        if not 1 <= self.pass_mark <= self.answers:
            raise ValueError("pass mark must be within 1..answers")
        for s in self.alphabet:
            if s not in signal.SYMBOL_TO_OPTION:
                raise ValueError(f"symbol {s!r} has no answer-option mapping")
        self.protocol_params()  # window validation

    def protocol_params(self) -> signal.ProtocolParams:
        return signal.ProtocolParams(t1=self.t1, t2=self.t2, eps=self.eps)

    def profiles(self) -> list:
        base = self.profile_list or signal.default_profiles(self.n_profiles)
        return [replace(p, seed=p.seed ^ (self.seed * 0x9E37)) for p in base]

    def script(self) -> signal.SessionScript:
        symbols = [self.alphabet[i % len(self.alphabet)]
                   for i in range(self.answers)]
        return signal.SessionScript.sequential(symbols)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- synth -------------------------------------------------------------------

def cmd_synth(cfg: ExperimentConfig, out_dir: Path) -> dict:
    params = cfg.protocol_params()
    script = cfg.script()
    manifest = {"schema_version": REPORT_SCHEMA_VERSION, "profiles": []}
    for prof in cfg.profiles():
        pdir = out_dir / f"profile_{prof.id:02d}"
        sess = signal.synth_session(prof, script, params)
        (pdir / "training").mkdir(parents=True, exist_ok=True)
        sess.trace.to_csv(pdir / "session.csv")
        _write(pdir / "annotations.json", sess.annotations_json())
        train = signal.synth_training_set(prof, cfg.alphabet, cfg.train_per_symbol)
        for sym, traces in train.items():
            for i, tr in enumerate(traces):
                tr.to_csv(pdir / "training" / f"{sym}_{i:02d}.csv")
        manifest["profiles"].append({
            "id": prof.id,
            "session": f"profile_{prof.id:02d}/session.csv",
            "annotations": f"profile_{prof.id:02d}/annotations.json",
            "training_traces": cfg.train_per_symbol * len(cfg.alphabet),
        })
    _write(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


# --- pipeline ----------------------------------------------------------------

def _features_from_training(train) -> learn.Dataset:
    rows, labels = [], []
    for sym, traces in train.items():
        for tr in traces:
            rows.append(features.extract(tr).values)
            labels.append(sym)
    return learn.Dataset(np.asarray(rows), labels)


class StageError(WristChannelError):
    """A pipeline stage failed; the message names the stage."""


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except WristChannelError as exc:
        raise StageError(f"stage '{name}': {exc}") from exc


def _run_profile_pipeline(prof, cfg: ExperimentConfig):
    params = cfg.protocol_params()
    script = cfg.script()
    sess = _stage("synth", signal.synth_session, prof, script, params)

    calib = [signal.synth_pause(prof, cfg.t1 if i % 2 == 0 else cfg.t2, seed=1000 + i)
             for i in range(cfg.calibration_pauses)]
    th = _stage("calibrate", protocol.calibrate_threshold, calib)
    config = protocol.DetectorConfig.from_params(th, params)
    segments, pauses = _stage("segment", protocol.segment_session,
                              sess.trace, config)

    expected_pauses = 2 * len(script.answers)
    pause_rate = len(pauses) / expected_pauses

    train = _stage("synth", signal.synth_training_set, prof, cfg.alphabet,
                   cfg.train_per_symbol)
    train_ds = _stage("extract", _features_from_training, train)
    seg_rows = np.asarray([_stage("extract", features.extract, s.trace_slice).values
                           for s in segments])
    truth_symbols = [a.symbol for a in sess.truth_symbols()]
    test_ds = learn.Dataset(seg_rows, truth_symbols[:len(segments)])

    models = {}
    if cfg.classifier in ("logreg", "both"):
        models["logreg"] = _stage("train", learn.train_logreg, train_ds,
                                  l2_lambda=cfg.logreg_l2)
    if cfg.classifier in ("forest", "both"):
        models["forest"] = _stage("train", learn.train_forest, train_ds,
                                  n_trees=cfg.forest_trees, seed=prof.seed)
    per_model = {}
    primary = "logreg" if "logreg" in models else "forest"
    for name, model in models.items():
        accuracy, confusion = learn.evaluate(model, test_ds)
        per_model[name] = {"accuracy": accuracy, "confusion": confusion}

    best = models[primary]
    predicted = learn.predict_batch(best, seg_rows)
    messages = [
        protocol.AnswerMessage(question_no=seg.index,
                               option=signal.SYMBOL_TO_OPTION[sym],
                               timestamp=seg.end_t)
        for seg, sym in zip(segments, predicted)
    ]
    delivered = _stage("deliver", _deliver, messages, cfg)
    truth_options = [signal.SYMBOL_TO_OPTION[s] for s in truth_symbols]
    score = sum(1 for (q, opt) in delivered
                if 1 <= q <= len(truth_options) and truth_options[q - 1] == opt)
    return {
        "profile": prof,
        "pause_rate": pause_rate,
        "n_segments": len(segments),
        "per_model": per_model,
        "primary": primary,
        "exam_score": score,
        "delivered": len(delivered),
    }


def _deliver(messages, cfg: ExperimentConfig) -> list:
    """Encode then decode through the configured channel; returns
    (question_no, option) pairs as the beneficiary would read them."""
    messages = protocol.reorder_messages(messages)
    if cfg.channel == "haptic":
        sched = haptics.encode_haptic(messages, cfg.haptic)
        options = haptics.decode_haptic(sched)
        return [(i + 1, opt) for i, opt in enumerate(options)]
    pages = {}
    history = []
    for msg in messages:
        state = haptics.apply_answer(history, msg.question_no, msg.option)
        history.append(msg)
        pages[state.page_index] = state
    out = []
    for page in sorted(pages):
        out.extend((m.question_no, m.option) for m in haptics.decode_clock(pages[page]))
    return out


def cmd_pipeline(cfg: ExperimentConfig, out_dir: Path) -> dict:
    results = [_run_profile_pipeline(prof, cfg) for prof in cfg.profiles()]
    per_profile = []
    confusions = {}
    for res in results:
        model_stats = {}
        for name, stats in res["per_model"].items():
            model_stats[name] = {"accuracy": stats["accuracy"]}
            confusions.setdefault(name, []).append(stats["confusion"])
        alpha = res["per_model"][res["primary"]]["accuracy"]
        n = cfg.answers
        predicted_pass = theory.binom_tail(
            n, cfg.pass_mark, theory.beta(cfg.theory_p, alpha, cfg.theory_m))
        per_profile.append({
            "profile_id": res["profile"].id,
            "pause_detection_rate": res["pause_rate"],
            "segments": res["n_segments"],
            "models": model_stats,
            "exam_score": res["exam_score"],
            "exam_passed": res["exam_score"] >= cfg.pass_mark,
            "theory_pass_probability": predicted_pass,
        })
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": {
            "n_profiles": cfg.n_profiles, "answers": cfg.answers,
            "classifier": cfg.classifier, "channel": cfg.channel,
            "seed": cfg.seed, "pass_mark": cfg.pass_mark,
            "theory": {"p": cfg.theory_p, "m": cfg.theory_m,
                       "theta": cfg.theory_theta},
        },
        "profiles": per_profile,
        "mean_accuracy": {
            name: float(np.mean([p["models"][name]["accuracy"] for p in per_profile]))
            for name in confusions
        },
        "mean_confusion": {
            name: {
                "labels": list(mats[0].labels),
                "matrix": [[round(v, 12) for v in row]
                           for row in learn.aggregate_confusions(mats)],
            }
            for name, mats in confusions.items()
        },
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    _write(out_dir / "report.json", text)
    return report


# --- theory ------------------------------------------------------------------

def _grade_pass_mark(grade: str) -> int:
    try:
        return theory.GRADE_PASS_MARKS[grade]
    except KeyError:
        raise ValueError(f"grade must be one of {sorted(theory.GRADE_PASS_MARKS)}")


def cmd_theory(args) -> int:
    if args.theory_cmd == "beta":
        print(f"{theory.beta(args.p, args.alpha, args.m):.12g}")
    elif args.theory_cmd == "mu":
        params = theory.TheoryParams(p=args.p, alpha=args.alpha, m=args.m,
                                     theta=args.theta, n=args.n, r=args.r)
        if args.log10:
            print(f"{theory.log10_mu(params):.12g}")
        else:
            print(f"{theory.mu(params):.12g}")
    elif args.theory_cmd == "derivative":
        print(f"{theory.dtheta_dalpha(args.p, args.m):.12g}")
    elif args.theory_cmd == "surface":
        r = _grade_pass_mark(args.grade) if args.grade else args.r
        axis = np.linspace(0.0, 1.0, args.grid)
        grid = theory.surface_grid(axis, axis, m=args.m, n=args.n, r=r)
        grid.to_csv(args.out)
        print(f"wrote {args.out} ({args.grid}x{args.grid} cells, r={r})")
    elif args.theory_cmd == "threshold":
        axis = np.linspace(0.0, 1.0, args.grid)
        grid = theory.threshold_surface_grid(axis, axis, m=args.m)
        grid.to_csv(args.out)
        print(f"wrote {args.out} ({args.grid}x{args.grid} cells)")
    elif args.theory_cmd == "simulate":
        params = theory.TheoryParams(p=args.p, alpha=args.alpha, m=args.m,
                                     theta=args.theta, n=args.n, r=args.r)
        seed = args.seed if args.seed is not None else 1
        res = theory.simulate_exam(params, args.trials, seed)
        print(json.dumps(res.report(), sort_keys=True))
    return 0


# --- channel -----------------------------------------------------------------

def cmd_channel(args) -> int:
    if args.channel_cmd == "haptic-encode":
        messages = protocol.messages_from_jsonl(Path(args.answers).read_text())
        sched = haptics.encode_haptic(protocol.reorder_messages(messages))
        _write(Path(args.out), sched.to_csv())
        print(f"wrote {args.out} ({len(sched.events)} events)")
    elif args.channel_cmd == "haptic-decode":
        sched = haptics.VibrationSchedule.from_csv(Path(args.schedule).read_text())
        for i, opt in enumerate(haptics.decode_haptic(sched), start=1):
            print(f"{i},{opt}")
    elif args.channel_cmd == "audibility":
        print(f"{haptics.audible_distance(args.amplitude, args.placement):.12g}")
    elif args.channel_cmd == "clock-render":
        state = haptics.ClockState.from_json(Path(args.state).read_text())
        _write(Path(args.out), haptics.render_clock_svg(state))
        print(f"wrote {args.out}")
    elif args.channel_cmd == "clock-decode":
        state = haptics.ClockState.from_json(Path(args.state).read_text())
        sys.stdout.write(protocol.messages_to_jsonl(haptics.decode_clock(state)))
    return 0


# --- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wristchannel",
        description="Wrist-gesture covert channel toolkit")
    parser.add_argument("--config", help="experiment config JSON")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_globals(sp):
        # also accepted after the subcommand; SUPPRESS keeps the top-level value
        sp.add_argument("--out", default=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p_synth = sub.add_parser("synth", help="generate synthetic sessions")
    p_synth.add_argument("--profiles", type=int, dest="n_profiles")
    p_synth.add_argument("--answers", type=int)
    add_globals(p_synth)

    p_pipe = sub.add_parser("pipeline", help="run the end-to-end experiment")
    p_pipe.add_argument("--profiles", type=int, dest="n_profiles")
    p_pipe.add_argument("--answers", type=int)
    p_pipe.add_argument("--classifier", choices=("logreg", "forest", "both"))
    p_pipe.add_argument("--channel", choices=("haptic", "clock"))
    add_globals(p_pipe)

    p_th = sub.add_parser("theory", help="outcome-model quantities")
    th_sub = p_th.add_subparsers(dest="theory_cmd", required=True)
    common = dict(p=0.9, alpha=0.9, m=4)

    def add_pam(sp, theta=False, exam=False):
        sp.add_argument("--p", type=float, default=common["p"])
        sp.add_argument("--alpha", type=float, default=common["alpha"])
        sp.add_argument("--m", type=int, default=common["m"])
        if theta:
            sp.add_argument("--theta", type=float, default=0.25)
        if exam:
            sp.add_argument("--n", type=int, default=100)
            sp.add_argument("--r", type=int, default=90)

    add_pam(th_sub.add_parser("beta"))
    sp = th_sub.add_parser("mu")
    add_pam(sp, theta=True, exam=True)
    sp.add_argument("--log10", action="store_true")
    sp = th_sub.add_parser("derivative")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--m", type=int, default=4)
    sp = th_sub.add_parser("surface")
    add_pam(sp, exam=True)
    sp.add_argument("--grade", choices=tuple(theory.GRADE_PASS_MARKS))
    sp.add_argument("--grid", type=int, default=41)
    sp.add_argument("--out", default="surface.csv")
    sp = th_sub.add_parser("threshold")
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--grid", type=int, default=41)
    sp.add_argument("--out", default="threshold.csv")
    sp = th_sub.add_parser("simulate")
    add_pam(sp, theta=True, exam=True)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p_ch = sub.add_parser("channel", help="delivery codec utilities")
    ch_sub = p_ch.add_subparsers(dest="channel_cmd", required=True)
    sp = ch_sub.add_parser("haptic-encode")
    sp.add_argument("--answers", required=True, help="answer messages JSONL")
    sp.add_argument("--out", default="schedule.csv")
    sp = ch_sub.add_parser("haptic-decode")
    sp.add_argument("--schedule", required=True)
    sp = ch_sub.add_parser("audibility")
    sp.add_argument("--amplitude", type=float, required=True)
    sp.add_argument("--placement", choices=("wrist", "table"), default="wrist")
    sp = ch_sub.add_parser("clock-render")
    sp.add_argument("--state", required=True, help="clock state JSON")
    sp.add_argument("--out", default="clock.svg")
    sp = ch_sub.add_parser("clock-decode")
    sp.add_argument("--state", required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cmd in ("synth", "pipeline"):
            overrides = {}
            for key in ("n_profiles", "answers", "classifier", "channel"):
                value = getattr(args, key, None)
                if value is not None:
                    overrides[key] = value
            if args.seed is not None:
                overrides["seed"] = args.seed
            cfg = ExperimentConfig.load(args.config, overrides)
        if args.cmd == "synth":
            manifest = cmd_synth(cfg, Path(args.out))
            print(f"wrote {len(manifest['profiles'])} profiles under {args.out}")
            return 0
        if args.cmd == "pipeline":
            report = cmd_pipeline(cfg, Path(args.out))
            accs = report["mean_accuracy"]
            print(f"report: {args.out}/report.json mean_accuracy="
                  + ", ".join(f"{k}={v:.3f}" for k, v in sorted(accs.items())))
            return 0
        if args.cmd == "theory":
            return cmd_theory(args)
        if args.cmd == "channel":
            return cmd_channel(args)
    except (ValueError, OSError, json.JSONDecodeError,
            InvalidParams, InvalidOptions) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WristChannelError as exc:
        print(f"error [{args.cmd}]: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
