#!/usr/bin/env python3
"""Head-phantom recovery from radial Fourier lines; writes PGM reconstructions."""

import sys
from pathlib import Path

from grampa.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "run",
                "--config", str(ROOT / "configs" / "phantom.json"),
                "--out", str(ROOT / "results" / "phantom"),
                "--workers", "2",
                *sys.argv[1:],
            ]
        )
    )
