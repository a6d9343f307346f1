#!/usr/bin/env python3
"""Run both benchmark configs and write their CSV traces to results/.

Usage: python scripts/run_benchmarks.py [config ...]
Defaults to configs/affine20.yaml and configs/tap_default.yaml.
"""

import os
import pathlib
import sys
import time

from fwvip import cli

ROOT = pathlib.Path(__file__).resolve().parent.parent
DEFAULT_CONFIGS = ["configs/affine20.yaml", "configs/tap_default.yaml"]


def main(argv=None) -> int:
    configs = (argv if argv else sys.argv[1:]) or DEFAULT_CONFIGS
    os.chdir(ROOT)  # configs name output paths relative to the repo root
    (ROOT / "results").mkdir(exist_ok=True)
    worst = 0
    for cfg in configs:
        print(f"== {cfg} ==")
        t0 = time.perf_counter()
        code = cli.main(["run", cfg])
        print(f"   done in {time.perf_counter() - t0:.1f}s (exit {code})\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
