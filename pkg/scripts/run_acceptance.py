#!/usr/bin/env python3
"""Run the acceptance suite and show the per-criterion PASS/FAIL lines.

Set HXPROOF_SEED to pin the fuzzing RNG.
"""

import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    raise SystemExit(subprocess.call(
        [sys.executable, "-m", "pytest", "tests/test_acceptance.py", "-v", "-s",
         *sys.argv[1:]],
        cwd=ROOT))
