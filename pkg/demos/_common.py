"""Shared helper: where demo outputs go (``demos/output`` unless a directory is given on the command line)."""

import sys
from pathlib import Path


def output_dir() -> Path:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).with_name("output")
    out.mkdir(parents=True, exist_ok=True)
    return out
