"""Distill Bell pairs from a doped state, then rebuild the state from them.

Run: python3 demos/distill_round_trip.py
"""

import math

import numpy as np

from stabent.dynamics import random_doped_circuit
from stabent.oracle import extract_stabilizer_group, reduced_density, simulate_dense
from stabent.protocols import dilution_plan, reversibility_floor, synthesize_bipartite_distillation
from stabent.tableau import Bipartition, stabilizer_entanglement

PHI = np.array([1, 0, 0, 1]) / math.sqrt(2)


def main():
    rng = np.random.default_rng(11)
    n = 10
    psi = simulate_dense(random_doped_circuit(n, 1, rng), rng)
    t = extract_stabilizer_group(psi)
    cut = Bipartition.half(n)
    e = stabilizer_entanglement(t, cut)
    print(f"n={n}  nu={t.nu}  E={float(e)}")

    res = synthesize_bipartite_distillation(t, cut)
    out = simulate_dense(res.circuit(), initial=psi)
    print(f"distilled {res.m_plus} pairs (guarantee {res.guarantee})")
    for a, b in res.pair_sites:
        fid = float(np.real(PHI @ reduced_density(out, [a, b]) @ PHI))
        print(f"  pair ({a},{b}) fidelity {fid:.12f}")

    plan = dilution_plan(t, cut)
    print(f"dilution: {plan.ebits} ebits, {plan.teleport_qubits} teleported qubits, {plan.cc_bits} classical bits")
    back = simulate_dense(plan.reconstruction(), initial=simulate_dense(plan.forward(), initial=psi))
    print(f"round-trip overlap |<psi|psi'>| = {abs(np.vdot(psi.amps, back.amps)):.12f}")
    print(f"M+/M- = {res.m_plus / plan.ebits:.3f}, floor 1-(3nu+2)/(2E) = {reversibility_floor(e, t.nu):.3f}")


if __name__ == "__main__":
    main()
