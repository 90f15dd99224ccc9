"""Generate the archived desk-scale CSVs consumed by the plotting package.

Runs both engines on the twelve-qubit open-chain Heisenberg benchmark
through the command-line interface so the outputs exercise the normative
CSV schema. Outputs are committed under plotviz/tests/data/ and treated
as frozen fixtures.
"""

import argparse
import sys
from pathlib import Path

from mpsim.cli import main as mpsim_main


def run(argv: list[str]) -> None:
    code = mpsim_main(argv)
    if code != 0:
        raise SystemExit(f"mpsim {argv[0]} exited with code {code}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out-dir",
        default=str(Path(__file__).resolve().parent.parent / "plotviz" / "tests" / "data"),
        help="directory for the generated CSVs",
    )
    args = parser.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    run(
        [
            "run",
            "--builder", "heisenberg1d",
            "--n", "12",
            "--steps", "20",
            "--dt", "0.1",
            "--chi-max", "64",
            "--s-max", "1e-9",
            "--engine", "both",
            "--out-dir", str(out_dir),
            "--prefix", "desk_scale",
        ]
    )
    print(f"wrote desk-scale CSVs to {out_dir}", file=sys.stderr)


if __name__ == "__main__":
    main()
