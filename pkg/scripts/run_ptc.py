#!/usr/bin/env python3
"""Phase-transition benchmark: spot checks plus the 50%-success curve.

Runs the declared (delta, rho) grid first, then the bisection that traces
rho50 per delta column.
"""

import sys
from pathlib import Path

from grampa.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    cfg = str(ROOT / "configs" / "ptc.json")
    out = str(ROOT / "results" / "ptc")
    rc = main(["run", "--config", cfg, "--out", out, "--workers", "2", *sys.argv[1:]])
    if rc == 0:
        rc = main(["ptc", "--config", cfg, "--out", out, "--workers", "2"])
    sys.exit(rc)
