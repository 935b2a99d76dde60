#!/usr/bin/env python3
"""Portrait of the dynamical map across the memory-loss rate.

Sweeps the closed-form (beta1, beta2) pair from the strongly
non-Markovian regime (gamma_bar = 0, persistent oscillation) to the
memoryless one (large gamma_bar, monotone decay), writes one CSV per
rate, and prints where each curve first loses its oscillatory character.

Usage: python scripts/map_portrait.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from nmcollide import beta1, beta2

GAMMAS = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0]
TAUS = np.linspace(0.0, 15.0, 1501)


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out_map_portrait")
    outdir.mkdir(parents=True, exist_ok=True)
    for gamma in GAMMAS:
        b1 = beta1(TAUS, gamma)
        b2 = beta2(TAUS, gamma)
        path = outdir / f"betas_gamma_{gamma:g}.csv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write("tau,beta1,beta2\n")
            for t, x, y in zip(TAUS, b1, b2):
                fh.write(f"{t:.17g},{x:.17g},{y:.17g}\n")
        crossings = np.where(np.diff(np.sign(b1)) != 0)[0]
        if crossings.size:
            note = f"beta1 first crosses zero at tau = {TAUS[crossings[0]]:.2f}"
        else:
            note = "beta1 never changes sign (memoryless regime)"
        print(f"gamma_bar = {gamma:>5g}: {note}; wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
