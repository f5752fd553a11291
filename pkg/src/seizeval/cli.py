"""Command-line entry point wiring the full pipeline.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 real-time
constraint violation (bench).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import core, detectors, features, io, metrics, rtbench
from .errors import FileFormatError, InvalidArgumentError, SeizevalError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_REALTIME = 3


def _parse_events(text: str) -> list[tuple[float, float]]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a, b = part.split(":")
            out.append((float(a), float(b)))
        except ValueError:
            raise InvalidArgumentError(f"bad event spec {part!r}, expected start:stop")
    return out


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"bad numeric list {text!r}")


def _load_rec_and_labels(args) -> tuple[core.Recording, core.LabelTrack]:
    rec = io.load_recording(args.rec)
    labels = io.load_labels(args.labels, total_duration_s=rec.duration_s)
    return rec, labels


def _window_spec(args) -> core.WindowSpec:
    return core.WindowSpec(window_s=args.window_sec, shift_s=args.shift_sec)


def _collect_features(
    rec: core.Recording, spec: core.WindowSpec, feature: str
) -> list[features.FeatureTensor]:
    extractor = features.get_extractor(feature, rec.sample_rate_hz)
    return [extractor(w.samples) for w in core.slice_windows(rec, spec)]


def _build_detector(args, rec=None, labels=None, spec=None) -> detectors.Detector:
    if args.model:
        model = detectors.load_model(args.model)
        return detectors.LinearDetector(model, smoothing=args.smoothing)
    if args.detector == "energy":
        if args.midpoint is not None and args.scale is not None:
            return detectors.EnergyDetector(
                band_index=args.band_index,
                midpoint=args.midpoint,
                scale=args.scale,
                smoothing=args.smoothing,
            )
        if rec is None or labels is None or spec is None:
            raise InvalidArgumentError(
                "energy detector needs --midpoint/--scale or labels to calibrate on"
            )
        feats = _collect_features(rec, spec, "bands")
        wl = core.window_labels(rec, labels, spec)
        bg = [
            detectors.band_energy(f, args.band_index)
            for f, y in zip(feats, wl)
            if not y
        ]
        return detectors.EnergyDetector.calibrate(
            np.array(bg), band_index=args.band_index, smoothing=args.smoothing
        )
    raise InvalidArgumentError("specify --model PATH or --detector energy")


def _detector_feature(args) -> str:
    if args.model:
        return detectors.load_model(args.model).extractor_id
    return "bands"


def _add_window_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-sec", type=float, default=4.0)
    p.add_argument("--shift-sec", type=float, default=1.0)


def _add_detector_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="trained linear model file")
    p.add_argument("--detector", choices=["energy"], help="built-in detector")
    p.add_argument("--band-index", type=int, default=0)
    p.add_argument("--midpoint", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--smoothing", type=float, default=0.0)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = core.SynthConfig(
        duration_s=args.duration,
        n_channels=args.channels,
        background_amplitude_uv=args.background_uv,
        ictal_amplitude_uv=args.ictal_uv,
        ictal_base_freq_hz=args.base_freq,
        events=_parse_events(args.events) if args.events else None,
        n_random_events=args.n_events,
        seed=args.seed,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec, labels = core.synth_recording(cfg)
    io.save_recording(rec, out / "rec.eeg")
    io.save_labels(labels, out / "labels.txt")
    print(f"wrote {out / 'rec.eeg'} ({rec.n_channels} ch, {rec.duration_s:g} s) "
          f"and {out / 'labels.txt'} ({len(labels.events)} events)")
    return EXIT_OK


def cmd_ingest(args) -> int:
    rec = io.load_csv_recording(args.csv, sample_rate_hz=args.rate)
    if args.montage:
        rec = core.to_bipolar(rec, io.load_montage(args.montage))
    if args.resample:
        rec = core.resample(rec, args.resample)
    io.save_recording(rec, args.out)
    print(f"wrote {args.out} ({rec.n_channels} ch @ {rec.sample_rate_hz} Hz)")
    return EXIT_OK


def cmd_extract(args) -> int:
    rec = io.load_recording(args.rec)
    spec = _window_spec(args)
    extractor = features.get_extractor(args.feature, rec.sample_rate_hz)
    for window in core.slice_windows(rec, spec):
        if args.window_index >= 0 and window.index != args.window_index:
            continue
        tensor = extractor(window.samples)
        suffix = f".{window.index}" if args.window_index < 0 else ""
        features.save_tensor(tensor, f"{args.out}{suffix}", binary=args.binary)
        if args.window_index >= 0:
            print(f"wrote {args.out} shape={tensor.shape}")
            return EXIT_OK
    return EXIT_OK


def cmd_train(args) -> int:
    rec, labels = _load_rec_and_labels(args)
    spec = _window_spec(args)
    feats = _collect_features(rec, spec, args.feature)
    wl = core.window_labels(rec, labels, spec)
    cfg = detectors.TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        l2=args.l2,
        seed=args.seed,
    )
    model = detectors.train_linear(list(zip(feats, wl.astype(int))), cfg)
    detectors.save_model(model, args.out)
    print(
        f"wrote {args.out} (feature={args.feature}, final loss "
        f"{model.loss_history[-1]:.4f})"
    )
    return EXIT_OK


def cmd_run(args) -> int:
    rec = io.load_recording(args.rec)
    spec = _window_spec(args)
    labels = (
        io.load_labels(args.labels, rec.duration_s) if args.labels else None
    )
    detector = _build_detector(args, rec, labels, spec)
    extractor = features.get_extractor(_detector_feature(args), rec.sample_rate_hz)
    track, report = rtbench.run_stream(rec, extractor, detector, spec)
    opts = metrics.EventizeOpts(
        threshold=args.threshold,
        gap_merge_s=args.gap_merge_sec,
        min_event_s=args.min_event_sec,
    )
    metrics.export_hypothesis(track, opts, args.out_hyp)
    print(f"wrote {args.out_hyp}; {report.summary()}")
    if args.out_latency:
        Path(args.out_latency).write_text(report.per_window_csv())
    return EXIT_OK


def _evaluate(args, rec, labels, spec, detector, feature_name) -> metrics.MetricsReport:
    extractor = features.get_extractor(feature_name, rec.sample_rate_hz)
    track, _ = rtbench.run_stream(rec, extractor, detector, spec)
    wl = core.window_labels(rec, labels, spec)
    return metrics.evaluate_track(
        labels,
        wl,
        track,
        margins_s=tuple(args.margins),
        gap_merge_s=args.gap_merge_sec,
        min_event_s=args.min_event_sec,
    )


def cmd_eval(args) -> int:
    rec, labels = _load_rec_and_labels(args)
    spec = _window_spec(args)
    detector = _build_detector(args, rec, labels, spec)
    feature_name = _detector_feature(args)
    out = Path(args.out_dir) if args.out_dir else _default_run_dir(args.seed)
    out.mkdir(parents=True, exist_ok=True)
    report = _evaluate(args, rec, labels, spec, detector, feature_name)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.txt").write_text(report.to_text())
    extractor = features.get_extractor(feature_name, rec.sample_rate_hz)
    track, _ = rtbench.run_stream(rec, extractor, detector, spec)
    curves = metrics.curve_metrics(core.window_labels(rec, labels, spec), track.scores)
    rows = ["threshold,tpr,fpr,precision,recall"]
    for t, tp, fp, pr, rc in zip(
        curves.thresholds, curves.tpr, curves.fpr, curves.precision, curves.recall
    ):
        rows.append(f"{t:.9f},{tp:.9f},{fp:.9f},{pr:.9f},{rc:.9f}")
    (out / "curves.csv").write_text("\n".join(rows) + "\n")
    metrics.export_hypothesis(
        track,
        metrics.EventizeOpts(
            threshold=report.youden_threshold,
            gap_merge_s=args.gap_merge_sec,
            min_event_s=args.min_event_sec,
        ),
        out / "hypothesis.txt",
    )
    print(report.to_text(), end="")
    print(f"report written to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    rec = io.load_recording(args.rec)
    spec = _window_spec(args)
    labels = io.load_labels(args.labels, rec.duration_s) if args.labels else None
    detector = _build_detector(args, rec, labels, spec)
    feature_name = args.feature or _detector_feature(args)
    extractor = features.get_extractor(feature_name, rec.sample_rate_hz)
    budget = args.budget_sec if args.budget_sec is not None else spec.shift_s
    _, report = rtbench.run_stream(
        rec,
        extractor,
        detector,
        spec,
        budget_s=budget,
        exclude_warmup=not args.include_warmup,
    )
    passed, summary = rtbench.check_realtime(report)
    print(summary)
    if args.out:
        Path(args.out).write_text(report.to_kv())
    if args.out_csv:
        Path(args.out_csv).write_text(report.per_window_csv())
    return EXIT_OK if passed else EXIT_REALTIME


def cmd_sweep(args) -> int:
    if args.windows:
        settings = [("window_sec", w) for w in _parse_floats(args.windows)]
        fixed_shift = args.shift_sec
    elif args.shifts:
        settings = [("shift_sec", s) for s in _parse_floats(args.shifts)]
    else:
        raise InvalidArgumentError("sweep needs --windows or --shifts")

    train_cfg = core.SynthConfig(
        duration_s=args.duration, n_random_events=args.n_events, seed=args.seed
    )
    test_cfg = core.SynthConfig(
        duration_s=args.duration, n_random_events=args.n_events, seed=args.seed + 1
    )
    train_rec, train_labels = core.synth_recording(train_cfg)
    test_rec, test_labels = core.synth_recording(test_cfg)

    rows = ["setting,value,auroc,auprc,mean_window_time_s,status"]
    for name, value in settings:
        window_s = value if name == "window_sec" else args.window_sec
        shift_s = fixed_shift if name == "window_sec" else value
        if window_s < shift_s:
            rows.append(f"{name},{value:g},,,,rejected: window {window_s:g} < shift {shift_s:g}")
            continue
        spec = core.WindowSpec(window_s=window_s, shift_s=shift_s)
        feats = _collect_features(train_rec, spec, args.feature)
        wl = core.window_labels(train_rec, train_labels, spec)
        try:
            model = detectors.train_linear(
                list(zip(feats, wl.astype(int))),
                detectors.TrainConfig(seed=args.seed),
            )
        except SeizevalError as exc:
            rows.append(f"{name},{value:g},,,,rejected: {exc}")
            continue
        detector = detectors.LinearDetector(model)
        extractor = features.get_extractor(args.feature, test_rec.sample_rate_hz)
        track, report = rtbench.run_stream(test_rec, extractor, detector, spec)
        curves = metrics.curve_metrics(
            core.window_labels(test_rec, test_labels, spec), track.scores
        )
        rows.append(
            f"{name},{value:g},{curves.auroc:.4f},{curves.auprc:.4f},"
            f"{report.mean_s:.6f},ok"
        )
    table = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(table)
    print(table, end="")
    return EXIT_OK


def cmd_report(args) -> int:
    data = json.loads(Path(args.json).read_text())
    print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


def _default_run_dir(seed: int) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return Path("runs") / f"{stamp}-seed{seed}"


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seizeval",
        description="Real-time EEG seizure detection pipeline and scorer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic recording + labels")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--channels", type=int, default=20)
    p.add_argument("--background-uv", type=float, default=20.0)
    p.add_argument("--ictal-uv", type=float, default=100.0)
    p.add_argument("--base-freq", type=float, default=3.0)
    p.add_argument("--events", help="comma list of start:stop seconds")
    p.add_argument("--n-events", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="convert CSV to the .eeg binary format")
    p.add_argument("--csv", required=True)
    p.add_argument("--rate", type=int, required=True)
    p.add_argument("--montage", help="apply a bipolar montage spec file")
    p.add_argument("--resample", type=int, help="resample to this rate")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="dump feature tensors for debugging")
    p.add_argument("--rec", required=True)
    p.add_argument("--feature", choices=features.EXTRACTOR_NAMES, default="raw")
    _add_window_args(p)
    p.add_argument("--window-index", type=int, default=0, help="-1 for all windows")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train the linear detector")
    p.add_argument("--rec", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--feature", choices=features.EXTRACTOR_NAMES, default="bands")
    _add_window_args(p)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="stream a recording and export hypotheses")
    p.add_argument("--rec", required=True)
    p.add_argument("--labels", help="needed only to calibrate the energy detector")
    _add_detector_args(p)
    _add_window_args(p)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--gap-merge-sec", type=float, default=0.0)
    p.add_argument("--min-event-sec", type=float, default=0.0)
    p.add_argument("--out-hyp", required=True)
    p.add_argument("--out-latency")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="full metrics report")
    p.add_argument("--rec", required=True)
    p.add_argument("--labels", required=True)
    _add_detector_args(p)
    _add_window_args(p)
    p.add_argument("--gap-merge-sec", type=float, default=0.0)
    p.add_argument("--min-event-sec", type=float, default=0.0)
    p.add_argument("--margins", type=_parse_floats, default=[3.0, 5.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="real-time latency benchmark")
    p.add_argument("--rec", required=True)
    p.add_argument("--labels")
    _add_detector_args(p)
    _add_window_args(p)
    p.add_argument("--feature", choices=features.EXTRACTOR_NAMES)
    p.add_argument("--budget-sec", type=float, help="override the shift budget")
    p.add_argument("--include-warmup", action="store_true")
    p.add_argument("--out", help="key-value report path")
    p.add_argument("--out-csv", help="per-window times CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="window/shift parameter sweep on synth data")
    p.add_argument("--windows", help="comma list of window sizes (s)")
    p.add_argument("--shifts", help="comma list of shift lengths (s)")
    _add_window_args(p)
    p.add_argument("--feature", choices=features.EXTRACTOR_NAMES, default="raw")
    p.add_argument("--duration", type=float, default=120.0)
    p.add_argument("--n-events", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="pretty-print a report.json")
    p.add_argument("--json", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InvalidArgumentError, FileFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SeizevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
