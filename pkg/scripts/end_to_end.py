#!/usr/bin/env python3
"""Full synthetic experiment: generate -> train -> evaluate -> bench.

Writes everything under a work directory (default ./runs/e2e) and prints the
headline numbers. Equivalent to chaining the CLI subcommands by hand.
"""
import argparse
import sys
import time
from pathlib import Path

from handsteer.cli import main as cli
from handsteer.reports import parse_report


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="runs/e2e")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=0.02)
    parser.add_argument("--with-src", action="store_true",
                        help="also time the sparse classifier in the bench")
    args = parser.parse_args(argv)

    work = Path(args.workdir)
    data = work / "data"
    t0 = time.perf_counter()

    steps = [["generate", "--out", str(data), "--seed", str(args.seed),
              "--noise", str(args.noise)]]
    steps.append(["train", "--data", str(data), "--out", str(work),
                  "--seed", str(args.seed)])
    for cmd in steps:
        rc = cli(cmd)
        if rc != 0:
            return rc

    eval_cmd = ["eval", "--model-dir", str(work / "model"),
                "--out", str(work / "eval")]
    for path in sorted(data.glob("eval-*.stream")) + sorted(data.glob("walk-*.stream")):
        eval_cmd += ["--stream", str(path)]
    rc = cli(eval_cmd)
    if rc != 0:
        return rc

    bench_cmd = ["bench", "--model-dir", str(work / "model"),
                 "--stream", str(data / "eval-TurnLeft.stream"),
                 "--out", str(work / "bench")]
    if args.with_src:
        bench_cmd.append("--with-src")
    rc = cli(bench_cmd)
    if rc != 0:
        return rc

    _, tables = parse_report(work / "eval" / "eval_report.txt")
    header, *rows = tables["streams"]
    acc_idx = header.index("raw_acc_excl")
    cmd_idx = header.index("cmd_acc_excl")
    worst_raw = min(float(r[acc_idx]) for r in rows)
    worst_cmd = min(float(r[cmd_idx]) for r in rows)
    bench, _ = parse_report(work / "bench" / "bench_report.txt")
    print()
    print(f"== {len(rows)} streams evaluated: worst raw accuracy {worst_raw:.4f}, "
          f"worst filtered-command accuracy {worst_cmd:.4f} (bands excluded)")
    print(f"== crc: 975 windows in {float(bench['crc_total_seconds']):.3f}s")
    print(f"== total wall time {time.perf_counter() - t0:.1f}s; artifacts in {work}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
