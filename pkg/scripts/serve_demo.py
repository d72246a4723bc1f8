#!/usr/bin/env python3
"""Train a model if needed, then serve it for the browser steering demo.

Usage: python scripts/serve_demo.py [--port 8765]
Then open frontend/index.html (see frontend/README.md) pointed at the port.
"""
import argparse
import sys
from pathlib import Path

from handsteer.cli import main as cli


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="runs/demo")
    parser.add_argument("--bind", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args(argv)

    work = Path(args.workdir)
    model_dir = work / "model"
    if not (model_dir / "manifest.json").exists():
        print("no model yet; generating data and training one (~20 s)")
        rc = cli(["generate", "--out", str(work / "data"), "--seed", "0"])
        if rc != 0:
            return rc
        rc = cli(["train", "--data", str(work / "data"), "--out", str(work)])
        if rc != 0:
            return rc
    return cli(["serve", "--model-dir", str(model_dir),
                "--bind", args.bind, "--port", str(args.port)])


if __name__ == "__main__":
    sys.exit(run())
