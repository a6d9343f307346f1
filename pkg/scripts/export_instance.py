#!/usr/bin/env python3
"""Write the canonical traffic instance as auditable text to results/.

Usage: python scripts/export_instance.py [output-path]
"""

import pathlib
import sys

from fwvip import cli

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    out = args[0] if args else str(ROOT / "results" / "tap_instance.txt")
    pathlib.Path(out).parent.mkdir(parents=True, exist_ok=True)
    code = cli.main(["tap-export", "--output", out])
    if code == 0:
        print(f"instance written to {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
