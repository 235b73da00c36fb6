"""Nullity in circuits mixing T gates and Z measurements.

Compares the birth-death stationary law with a Monte Carlo run and with the
tableau-level circuit, then shows the adaptive schedule that pins the
nullity near 2.  Run: python3 demos/hybrid_nullity_chain.py
"""

import numpy as np

from stabent.dynamics import ChainSpec, hybrid_mc, hybrid_stationary, total_variation


def main():
    rng = np.random.default_rng(3)
    spec = ChainSpec(6, p_t=0.3, p_m=0.3)
    st = hybrid_stationary(spec)
    mc = hybrid_mc(spec, rng, steps=200_000)
    tab = hybrid_mc(spec, rng, steps=5_000, mode="tableau")
    print("nu   analytic   chain MC   tableau MC")
    for v, (p, q, r) in enumerate(zip(st.pi, mc.empirical(), tab.empirical())):
        print(f"{v:>2}   {p:8.5f}   {q:8.5f}   {r:8.5f}")
    print(f"TV(chain MC) = {total_variation(mc.empirical(), st.pi):.4f}, "
          f"TV(tableau) = {total_variation(tab.empirical(), st.pi):.4f}")

    for n in (6, 10, 14):
        ad = hybrid_stationary(ChainSpec(n, r0=0.5))
        print(f"adaptive r0=1/2, n={n}: mean nu {ad.mean_nu:.4f}, pi(0) = {ad.pi[0]:.2e}")


if __name__ == "__main__":
    main()
