"""Phase diagram of the real-valued ricocheted stable process over (p, phat).

Writes p, phat, chi'(0) and the phase label as CSV; with --ascii also draws
a character map (H = hits zero, D = drifts to infinity, O = oscillates).

    python scripts/phase_diagram.py --alpha 1.5 --rho 0.4 --steps 21 --ascii
"""
import argparse
import csv
import sys

import numpy as np

from dhglevy.rssmp import RssmpParameters, chi_prime_zero, classify_phase

SYMBOL = {"HitsZero": "H", "DriftsToInfinity": "D", "Oscillates": "O"}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--rho", type=float, default=0.4)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--ascii", action="store_true")
    a = ap.parse_args(argv)
    grid = np.linspace(0.0, 0.99, a.steps)
    labels = np.empty((a.steps, a.steps), dtype=object)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "phat", "chi_prime_zero", "phase"])
    for i, p in enumerate(grid):
        for j, ph in enumerate(grid):
            rs = RssmpParameters(a.alpha, a.rho, float(p), float(ph))
            labels[i, j] = classify_phase(rs).value
            w.writerow([f"{p:.6g}", f"{ph:.6g}", f"{chi_prime_zero(rs):.15g}", labels[i, j]])
    if a.ascii:
        print(f"# rows: p from 0.99 down to 0; columns: phat from 0 to 0.99", file=sys.stderr)
        for i in reversed(range(a.steps)):
            print("# " + "".join(SYMBOL[v] for v in labels[i]), file=sys.stderr)


if __name__ == "__main__":
    main()
