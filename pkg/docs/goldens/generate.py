"""Regenerate the golden output files in this directory.

Run from anywhere:

    python docs/goldens/generate.py

Every command is fully seeded, so regeneration in a fixed environment
reproduces the committed files byte for byte.  Floating-point fields may
move in the last few ulps across BLAS builds; the regression test
(tests/test_goldens.py) therefore compares numeric fields at 1e-9 and
everything else exactly.
"""

import contextlib
import io
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent

# filename -> CLI argv producing it on stdout
COMMANDS = {
    "spectrum.jsonl": ["spectrum", "--delta", "h,h", "--grid", "32", "-m", "2"],
    "perturb.csv": [
        "perturb", "--delta", "h,0", "--grid", "32", "--branch", "1", "--f-spec", "cos:1,0",
    ],
    "split.csv": ["split", "--delta", "h,h", "--grid", "32", "-m", "2", "--seed", "3"],
    "zeros.jsonl": ["zeros", "--delta", "h,h", "--grid", "32", "--branch", "1"],
    "generic.jsonl": [
        "generic", "--delta", "h,h", "--grid", "32", "-m", "1", "--trials", "2", "--t0", "0.1",
    ],
    "green-check.csv": [
        "green-check", "-n", "2", "--lam", "0.7", "--spinors", "gauss-const,annulus",
    ],
    "identities.csv": ["identities", "--max-m", "1"],
    "ahat.txt": ["ahat", "-k", "1", "-d", "6", "--genus", "2"],
}


def golden_field():
    """Deterministic sample field for the binary format golden."""
    from spindirac import TorusSpinGeometry, plane_wave

    geom = TorusSpinGeometry.square(n=2, delta=(0.5, 0.5), grid=8)
    return plane_wave(geom, (0, 0), np.array([1.0, 0.5j]))


def main():
    from spindirac import cli, save_field

    for name, argv in COMMANDS.items():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            rc = cli.main(argv)
        if rc != 0:
            raise SystemExit(f"{name}: exit code {rc}")
        (HERE / name).write_text(buf.getvalue())
        print(f"wrote {name}")
    save_field(golden_field(), HERE / "field.bin")
    print("wrote field.bin, field.bin.json")


if __name__ == "__main__":
    main()
