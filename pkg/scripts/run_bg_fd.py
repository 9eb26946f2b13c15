#!/usr/bin/env python3
"""Sweep recovery of random-walk signals over sampling ratios.

Equivalent to: grampa run --config configs/bg_fd.json --out results/bg_fd
"""

import sys
from pathlib import Path

from grampa.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "run",
                "--config", str(ROOT / "configs" / "bg_fd.json"),
                "--out", str(ROOT / "results" / "bg_fd"),
                "--workers", "2",
                *sys.argv[1:],
            ]
        )
    )
