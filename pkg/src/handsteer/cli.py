"""Command-line entry points: generate, train, eval, bench, serve.

Every run writes a machine-readable report (see :mod:`handsteer.reports`).
Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import synth
from .classify import crc_classify, src_classify
from .clustering import OscConfig
from .errors import (
    BadMessage,
    BadScenario,
    DimensionMismatch,
    EmptyClass,
    HandsteerError,
    IllegalTransition,
    MissingRecording,
    ModelFormatError,
    ModelMissing,
    NonFiniteInput,
    RaggedColumns,
    SingularGram,
    TooShort,
    TooSmall,
    UnknownPosture,
    WrongWindowLength,
    ZeroColumn,
    ZeroNormal,
)
from .evaluate import ALL_LABELS, evaluate_stream
from .frames import (
    DEFAULT_RATE_HZ,
    DEFAULT_WINDOW,
    LabeledStream,
    feature_matrix,
    read_stream,
    window_end_indices,
    write_stream,
)
from .labels import PostureLabel
from .recognizer import (
    TrainConfig,
    load_model,
    save_model,
    train_recognizer,
    write_events,
)
from .reports import write_report

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERIC_EXIT = 3

_DATA_ERRORS = (
    BadScenario,
    UnknownPosture,
    IllegalTransition,
    MissingRecording,
    ModelFormatError,
    ModelMissing,
    BadMessage,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    OSError,
)
_NUMERIC_ERRORS = (
    SingularGram,
    ZeroColumn,
    ZeroNormal,
    NonFiniteInput,
    DimensionMismatch,
    WrongWindowLength,
    TooShort,
    TooSmall,
    RaggedColumns,
    EmptyClass,
    np.linalg.LinAlgError,
)


@dataclass
class RunConfig:
    """Settings shared by the subcommands; config file values are overridden
    by explicit flags."""

    seed: int = 0
    window: int = DEFAULT_WINDOW
    rate: float = DEFAULT_RATE_HZ
    noise: float = synth.DEFAULT_NOISE
    classifier: str = "crc"
    lam: float | None = None
    osc_lambda1: float = 0.1
    osc_lambda2: float = 1.0
    model_dir: str | None = None
    out: str = "."

    def osc_config(self) -> OscConfig:
        return OscConfig(lambda1=self.osc_lambda1, lambda2=self.osc_lambda2)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage failures exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--classifier", choices=["crc", "src"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--osc-lambda1", type=float)
    p.add_argument("--osc-lambda2", type=float)
    p.add_argument("--model-dir")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="handsteer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic stream files")
    _add_common(g)
    g.add_argument(
        "--scenario",
        help="JSON scenario (postures/dwells/transition) for a single custom stream",
    )

    t = sub.add_parser("train", help="train a recognizer from recordings")
    _add_common(t)
    t.add_argument("--data", required=True, help="directory with the 9 recordings")

    e = sub.add_parser("eval", help="classify a stream file and score it")
    _add_common(e)
    e.add_argument("--stream", required=True, action="append",
                   help="stream file (repeatable)")

    b = sub.add_parser("bench", help="time batch classification")
    _add_common(b)
    b.add_argument("--stream", help="stream file; a default scenario if omitted")
    b.add_argument("--with-src", action="store_true",
                   help="also time the l1 classifier")

    s = sub.add_parser("serve", help="run the streaming recognition service")
    _add_common(s)
    s.add_argument("--bind", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8765)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise BadScenario(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **data)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            cfg = replace(cfg, **{f.name: v})
    if cfg.window < 2:
        raise BadScenario(f"window must be >= 2, got {cfg.window}")
    if cfg.rate <= 0:
        raise BadScenario(f"rate must be > 0, got {cfg.rate}")
    return cfg


# --- subcommands ---------------------------------------------------------------


def _scenario_from_json(text: str, cfg: RunConfig) -> synth.Scenario:
    data = json.loads(text)
    try:
        postures = tuple(PostureLabel(p) for p in data["postures"])
    except ValueError as exc:
        raise UnknownPosture(str(exc)) from None
    return synth.Scenario(
        postures=postures,
        dwells=tuple(float(d) for d in data["dwells"]),
        transition=float(data.get("transition", 0.5)),
        rate_hz=cfg.rate,
        noise=cfg.noise,
        name=str(data.get("name", "custom")),
    )


def run_generate(cfg: RunConfig, scenario_json: str | None = None) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [["stream", "frames", "windows"]]
    if scenario_json is not None:
        sc = _scenario_from_json(scenario_json, cfg)
        stream = synth.generate(sc, seed=cfg.seed)
        write_stream(out / f"{sc.name}.stream", stream)
        rows.append([sc.name, len(stream), len(window_end_indices(len(stream), cfg.window))])
    else:
        recordings = synth.standard_training_set(
            seed=cfg.seed, noise=cfg.noise, rate_hz=cfg.rate
        )
        for name, stream in recordings.items():
            write_stream(out / f"{name}.stream", stream)
            rows.append([name, len(stream), len(window_end_indices(len(stream), cfg.window))])
        for i, sc in enumerate(synth.standard_eval_scenarios(noise=cfg.noise, rate_hz=cfg.rate)):
            stream = synth.generate(sc, seed=cfg.seed + 5000 + i)
            write_stream(out / f"{sc.name}.stream", stream)
            rows.append([sc.name, len(stream), len(window_end_indices(len(stream), cfg.window))])
    for name, n, w in rows[1:]:
        print(f"{name}: {n} frames, {w} windows")
    write_report(
        out / "generate_report.txt",
        {"kind": "generate", "seed": cfg.seed, "noise": cfg.noise,
         "rate": cfg.rate, "window": cfg.window, "streams": len(rows) - 1},
        {"streams": rows},
    )
    return 0


def run_train(cfg: RunConfig, data_dir: str) -> int:
    data = Path(data_dir)
    recordings: dict[str, LabeledStream] = {}
    for path in sorted(data.glob("*.stream")):
        recordings[path.stem] = read_stream(path)
    tcfg = TrainConfig(
        seed=cfg.seed,
        width=cfg.window,
        classifier=cfg.classifier,
        osc=cfg.osc_config(),
        lam_stage1=cfg.lam,
        lam_postures=cfg.lam,
        lam_gestures=cfg.lam,
    )
    model = train_recognizer(recordings, tcfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(out / "model", model)
    sizes = model.block_sizes()
    rows = [["pair", "size0", "size1", "boundaries", "silhouette", "iterations", "objective"]]
    for d in model.diagnostics:
        rows.append([
            d.pair, d.sizes[0], d.sizes[1],
            ",".join(str(b) for b in d.boundaries),
            f"{d.silhouette:.4f}", d.iterations, f"{d.objective:.6g}",
        ])
    write_report(
        out / "training_report.txt",
        {
            "kind": "train",
            "seed": cfg.seed,
            "classifier": cfg.classifier,
            "window": cfg.window,
            "stage1_blocks": ",".join(str(s) for s in sizes["stage1"]),
            "posture_blocks": ",".join(str(s) for s in sizes["postures"]),
            "gesture_blocks": ",".join(str(s) for s in sizes["gestures"]),
        },
        {"pairs": rows},
    )
    print(f"model written to {out / 'model'}")
    for d in model.diagnostics:
        print(f"  {d.pair}: sizes {d.sizes}, boundaries {d.boundaries}, "
              f"silhouette {d.silhouette:.3f}")
    return 0


def run_eval(cfg: RunConfig, stream_paths: list[str]) -> int:
    if not cfg.model_dir:
        raise ModelMissing("--model-dir is required for eval")
    model = load_model(cfg.model_dir)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    values: dict[str, object] = {"kind": "eval", "model_dir": cfg.model_dir,
                                 "streams": len(stream_paths)}
    confusion_total = None
    rows = [["stream", "windows", "windows_excl", "raw_acc", "raw_acc_excl",
             "cmd_acc", "cmd_acc_excl", "sec_per_window"]]
    for spath in stream_paths:
        stream = read_stream(spath)
        name = Path(spath).stem
        result = evaluate_stream(model, stream, name=name)
        write_events(out / f"{name}.events", result.events)
        rows.append([
            name, result.windows, result.windows_excl,
            f"{result.raw_accuracy:.6f}", f"{result.raw_accuracy_excl:.6f}",
            f"{result.command_accuracy:.6f}", f"{result.command_accuracy_excl:.6f}",
            f"{result.seconds_per_window:.6g}",
        ])
        if result.labeled:
            confusion_total = (
                result.confusion if confusion_total is None
                else confusion_total + result.confusion
            )
        print(f"{name}: {result.windows} windows, "
              f"raw {result.raw_accuracy_excl:.4f} cmd {result.command_accuracy_excl:.4f} "
              f"(band excluded)")
    tables = {"streams": rows}
    if confusion_total is not None:
        ctable = [["truth\\pred", *ALL_LABELS]]
        for i, lab in enumerate(ALL_LABELS):
            ctable.append([lab, *confusion_total[i].tolist()])
        tables["confusion_excl_band"] = ctable
    write_report(out / "eval_report.txt", values, tables)
    return 0


def run_bench(cfg: RunConfig, stream_path: str | None, with_src: bool) -> int:
    if not cfg.model_dir:
        raise ModelMissing("--model-dir is required for bench")
    t0 = time.perf_counter()
    model = load_model(cfg.model_dir)
    load_seconds = time.perf_counter() - t0

    if stream_path:
        stream = read_stream(stream_path)
    else:
        stream = synth.generate(
            synth.bilateral_eval(PostureLabel.TURN_LEFT, noise=cfg.noise,
                                 rate_hz=cfg.rate),
            seed=cfg.seed,
        )
    X, _ = feature_matrix(stream, model.width)
    n = X.shape[1]

    # Projector precompute cost is reported separately; it is not part of the
    # per-window time (the model ships with projectors).
    t0 = time.perf_counter()
    from .dictionary import precompute_projection

    precompute_projection(model.gestures)
    precompute_seconds = time.perf_counter() - t0

    def time_batch(fn):
        times = []
        labels = []
        for j in range(n):
            t1 = time.perf_counter()
            r = fn(X[:, j])
            times.append(time.perf_counter() - t1)
            labels.append(r.label)
        return times, labels

    crc_times, crc_labels = time_batch(
        lambda y: crc_classify(y, model.gestures, model.gestures_projector)
    )
    values: dict[str, object] = {
        "kind": "bench",
        "windows": n,
        "model_load_seconds": f"{load_seconds:.6f}",
        "projector_precompute_seconds": f"{precompute_seconds:.6f}",
        "crc_total_seconds": f"{sum(crc_times):.6f}",
        "crc_median_seconds": f"{statistics.median(crc_times):.9f}",
    }
    print(f"crc: {n} windows in {sum(crc_times):.4f}s "
          f"(median {statistics.median(crc_times) * 1e3:.3f} ms/window)")
    if with_src:
        src_times, src_labels = time_batch(lambda y: src_classify(y, model.gestures))
        values["src_total_seconds"] = f"{sum(src_times):.6f}"
        values["src_median_seconds"] = f"{statistics.median(src_times):.9f}"
        values["src_crc_agreement"] = f"{np.mean(np.array(src_labels) == np.array(crc_labels)):.6f}"
        print(f"src: {n} windows in {sum(src_times):.4f}s")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report(out / "bench_report.txt", values)
    return 0


def run_serve(cfg: RunConfig, bind: str, port: int) -> int:
    from .service import serve_forever

    if not cfg.model_dir:
        raise ModelMissing("--model-dir is required for serve")
    model = load_model(cfg.model_dir)
    print(f"serving on ws://{bind}:{port} (model {cfg.model_dir})")
    serve_forever(model, bind, port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        if args.command == "generate":
            return run_generate(cfg, args.scenario)
        if args.command == "train":
            return run_train(cfg, args.data)
        if args.command == "eval":
            return run_eval(cfg, args.stream)
        if args.command == "bench":
            return run_bench(cfg, args.stream, args.with_src)
        if args.command == "serve":
            return run_serve(cfg, args.bind, args.port)
        parser.error(f"unknown command {args.command!r}")
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except HandsteerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except json.JSONDecodeError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
