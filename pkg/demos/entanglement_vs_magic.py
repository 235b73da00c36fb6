"""Stabilizer entanglement versus nullity on T-doped random circuits.

For each T count the script prints the tableau-level E and nu across the
half cut, the exact 2-Renyi entropy from the coset sum, the dense value, and
the phase label.  Run: python3 demos/entanglement_vs_magic.py
"""

import numpy as np

from stabent.doped import entropy_interval, phase_classify, renyi2_exact
from stabent.dynamics import random_doped_circuit
from stabent.oracle import extract_doped_decomposition, renyi_entropy_dense, simulate_dense
from stabent.tableau import Bipartition, stabilizer_entanglement

N = 10


def main():
    rng = np.random.default_rng(7)
    cut = Bipartition.half(N)
    print(f"{'T':>2} {'nu':>3} {'E':>5} {'S2 exact':>9} {'S2 dense':>9}  interval        phase")
    for t in range(0, 9):
        psi = simulate_dense(random_doped_circuit(N, t, rng), rng)
        d = extract_doped_decomposition(psi)
        e = stabilizer_entanglement(d.tab, cut)
        lo, hi = entropy_interval(d, cut, "le2")
        phase = phase_classify(d.tab, cut).phase
        print(
            f"{t:>2} {d.nu:>3} {float(e):>5.1f} {renyi2_exact(d, cut):>9.5f} "
            f"{renyi_entropy_dense(psi, cut, 2):>9.5f}  [{lo:4.1f}, {hi:4.1f}]    {phase}"
        )


if __name__ == "__main__":
    main()
