"""Write the fig2, fig3 and fig4 CSV tables plus the N = 10 finite-ring comparison.

Usage: python3 scripts/make_figure_tables.py [OUTDIR]   (default: ./figure_data)
"""

import sys
from pathlib import Path

from qubit_rings.cli import main

JOBS = {
    "fig2.csv": ["fig2", "--delta-min", "-1000", "--delta-max", "-1.05", "--n-points", "60"],
    "fig3.csv": ["fig3", "--n-points", "200"],
    "fig4.csv": ["fig4", "--n-b", "65", "--n-eps", "39", "--y-lines",
                 "0.95,0.9,0.8,0.7,0.6,0.5,0.45,0.4,0.35,0.33,0.3,0.25,0.2,0.15,0.1"],
    "finite_ring_n10.csv": ["finite-ring", "--n", "10", "--all-p"],
}


def run(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, args in JOBS.items():
        path = outdir / name
        main(["--out", str(path), *args], standalone_mode=False)
        print(f"wrote {path}")


if __name__ == "__main__":
    run(Path(sys.argv[1] if len(sys.argv) > 1 else "figure_data"))
