"""Command-line entry point.

Every subcommand prints a JSON report (``--format csv`` for traces) holding
``schema_version``, ``version``, the parsed ``config`` and a ``result`` whose
numbers carry units.  Exit codes: 0 success, 1 input error, 2 infeasible plan.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import Circuit, CliffordCircuit, Gate, parse_circuit
from .doped import entropy_interval, local_interval, phase_classify, renyi2_exact
from .dynamics import (
    ChainSpec,
    hybrid_mc,
    hybrid_stationary,
    lyapunov_estimate,
    monitor_circuit,
    sample_mu_nu,
    sample_mu_t,
    total_variation,
)
from .oracle import (
    DENSITY_CAP,
    ENUM_CAP,
    RegionSet,
    depolarize,
    extract_doped_decomposition,
    ghz_regions,
    projector_expectation,
    renyi_entropy_dense,
    simulate_dense,
    topo_entropy,
    topo_entropy_stabilizer,
    toric_code_tableau,
    dense_from_tableau,
)
from .protocols import (
    InfeasiblePlan,
    dilution_plan,
    entanglement_cool,
    ghz_distillable_count,
    synthesize_bipartite_distillation,
    witness_estimate,
    witness_plan,
)
from .tableau import Bipartition, StabTableau, apply_circuit, parse_parts, stabilizer_entanglement

SCHEMA_VERSION = 1


class InputError(ValueError):
    pass


def _value(v, unit):
    return {"value": v, "unit": unit}


# --------------------------------------------------------------------------
# input loading


class Loaded:
    """A tableau plus, when built from a circuit, the circuit itself."""

    def __init__(self, tab: StabTableau, circuit: Circuit | None):
        self.tab = tab
        self.circuit = circuit

    @property
    def n(self) -> int:
        return self.tab.n

    def dense(self, seed):
        if self.circuit is None:
            return dense_from_tableau(self.tab)
        needs_rng = any(getattr(op, "label", "") == "HAAR" for op in self.circuit.ops)
        if needs_rng and seed is None:
            raise InputError("--seed is required to realize HAAR gates")
        return simulate_dense(self.circuit, np.random.default_rng(seed))


def _load(args) -> Loaded:
    if bool(args.circuit) == bool(args.tableau):
        raise InputError("give exactly one of --circuit or --tableau")
    try:
        text = Path(args.circuit or args.tableau).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    if args.tableau:
        return Loaded(StabTableau.parse(text), None)
    c = parse_circuit(text)
    if c.has_measurements():
        raise InputError("measurements are not supported in state-preparation circuits")
    trace = monitor_circuit(c, Bipartition.half(c.n))
    return Loaded(trace.final, c)


def _add_state(p):
    p.add_argument("--circuit", help="circuit file (one op per line)")
    p.add_argument("--tableau", help="tableau file ('n=<int>' then one Pauli per line)")


def _seed(args, required: bool):
    if required and args.seed is None:
        raise InputError(f"{args.command} is stochastic: --seed is required")
    return args.seed


# --------------------------------------------------------------------------
# commands


def cmd_entropy(args) -> dict:
    st = _load(args)
    cut = Bipartition.parse(args.cut, st.n)
    t = st.tab
    e = stabilizer_entanglement(t, cut)
    out = {
        "E": _value(float(e), "ebits"),
        "nu": _value(t.nu, "qubits"),
        "interval_all_alpha": _value(list(entropy_interval(t, cut, "all")), "bits"),
        "interval_alpha_le_2": _value(list(entropy_interval(t, cut, "le2")), "bits"),
        "interval_local": _value(list(local_interval(t, cut)), "bits"),
    }
    if t.nu == 0:
        out["S2"] = _value(float(e), "bits")
        out["S2_method"] = "stabilizer"
    elif st.n <= ENUM_CAP:
        doped = extract_doped_decomposition(st.dense(args.seed))
        out["S2"] = _value(renyi2_exact(doped, cut), "bits")
        out["S2_method"] = "coset sum"
        out["cosets"] = _value(len(doped), "count")
    return out


def cmd_monitor(args) -> dict | str:
    text = Path(args.circuit).read_text() if args.circuit else None
    if text is None:
        raise InputError("--circuit is required")
    c = parse_circuit(text)
    trace = monitor_circuit(c, Bipartition.parse(args.cut, c.n))
    if args.format == "csv":
        return trace.to_csv()
    last = trace.last
    return {
        "steps": _value(len(trace.records) - 1, "ops"),
        "nu_removed": _value(last.nu_removed, "generators"),
        "t": _value(last.t_so_far, "gates"),
        "bound_lo": _value(last.bound_lo, "bits"),
        "bound_hi": _value(last.bound_hi, "bits"),
        "alg_value": _value(last.alg_value, "bits"),
        "final_tableau": [str(g) for g in trace.final.gens],
    }


def cmd_distill(args) -> dict:
    st = _load(args)
    cut = Bipartition.parse(args.cut, st.n)
    res = synthesize_bipartite_distillation(st.tab, cut, args.s0)
    out = res.to_json()
    out["E"] = _value(float(stabilizer_entanglement(st.tab, cut)), "ebits")
    out["nu"] = _value(st.tab.nu, "qubits")
    return out


def cmd_dilute(args) -> dict:
    st = _load(args)
    return dilution_plan(st.tab, Bipartition.parse(args.cut, st.n)).to_json()


def cmd_ghz(args) -> dict:
    st = _load(args)
    return ghz_distillable_count(st.tab, parse_parts(args.parts, st.n)).to_json()


def cmd_witness(args) -> dict:
    st = _load(args)
    cuts = [Bipartition.parse(c, st.n) for c in (args.cut or ["half"])]
    plan = witness_plan(st.tab, cuts, args.e_level, args.eps, args.delta)
    out = {"plan": plan.to_json()}
    if args.estimate:
        seed = _seed(args, True)
        if st.n > DENSITY_CAP and args.noise > 0:
            raise InputError(f"noise model needs n <= {DENSITY_CAP}")
        rng = np.random.default_rng(seed)
        state = st.dense(seed)
        if args.noise > 0:
            state = depolarize(state, args.noise)
            out["trace_distance"] = _value(state.trace_distance, "trace distance")
        res = witness_estimate(state, st.tab, plan.n_shots, rng, plan.threshold)
        out["estimate"] = res.to_json()
        out["exact_projector"] = _value(projector_expectation(state, st.tab), "probability")
    return out


def cmd_phase(args) -> dict:
    st = _load(args)
    return phase_classify(st.tab, Bipartition.parse(args.cut, st.n), args.theta).to_json()


def cmd_hybrid(args) -> dict:
    spec = ChainSpec(
        args.n, args.pt, args.pm, args.r0 if args.adaptive else None, max(1, args.mc_steps), args.approx_f
    )
    stat = hybrid_stationary(spec)
    out = stat.to_json()
    out["detailed_balance_residual"] = _value(stat.detailed_balance_residual(), "log probability")
    out["table"] = [{"nu": v, "pi": _value(float(p), "probability")} for v, p in enumerate(stat.pi)]
    if args.mc_steps:
        run = hybrid_mc(spec, np.random.default_rng(_seed(args, True)), args.mc_steps, mode=args.mode)
        out["mc"] = run.to_json()
        out["mc"]["tv_to_analytic"] = _value(total_variation(run.empirical(), stat.pi), "probability")
    return out


def cmd_lyapunov(args) -> dict:
    window = tuple(int(v) for v in args.window.split(",")) if args.window else None
    if window is not None and len(window) != 2:
        raise InputError("--window takes 'lo,hi'")
    res = lyapunov_estimate(args.n, args.layers, window, np.random.default_rng(_seed(args, True)), args.samples)
    return res.to_json()


def cmd_topo(args) -> dict:
    if args.ghz:
        n = args.ghz
        c = CliffordCircuit(n, [Gate("H", (0,))] + [Gate("CNOT", (0, q)) for q in range(1, n)])
        tab = apply_circuit(StabTableau.zero_state(n), c)
        st = Loaded(tab, c.to_circuit())
    elif args.toric:
        l1, l2 = (int(v) for v in args.toric.split(","))
        st = Loaded(toric_code_tableau(l1, l2), None)
    else:
        st = _load(args)
    if args.regions:
        parts = [p.strip() for p in args.regions.split("|")]
        if len(parts) != 3:
            raise InputError("--regions takes 'A|B|C' (B may be empty)")
        sets = [[int(s) for s in p.split(",") if s.strip()] for p in parts]
        regions = RegionSet(*sets)
    elif args.ghz:
        regions = ghz_regions(st.n)
    else:
        raise InputError("--regions is required unless --ghz is used")
    out = {
        "regions": {"A": regions.a, "B": regions.b, "C": regions.c},
        "S_topo_stabilizer": _value(topo_entropy_stabilizer(st.tab, regions), "bits"),
        "nu": _value(st.tab.nu, "qubits"),
    }
    if st.n <= 14:
        out["S_topo_dense"] = _value(topo_entropy(st.dense(args.seed), regions, args.alpha), "bits")
    return out


def cmd_sample(args) -> dict:
    rng = np.random.default_rng(_seed(args, True))
    cut = Bipartition.parse(args.cut, args.n)
    s2 = []
    for _ in range(args.samples):
        if args.ensemble == "mu_t":
            c = sample_mu_t(args.n, args.t, args.l, rng)
        else:
            c = sample_mu_nu(args.n, args.nu, rng)
        s2.append(renyi_entropy_dense(simulate_dense(c, rng), cut, 2))
    s2 = np.array(s2)
    half = cut.n_a / 2 if cut.n_a <= cut.n_b else cut.n_b / 2
    frac = float((s2 >= half - 1e-9).mean())
    return {
        "samples": _value(args.samples, "states"),
        "S2_mean": _value(float(s2.mean()), "bits"),
        "S2_min": _value(float(s2.min()), "bits"),
        "fraction_S2_ge_half": _value(frac, "fraction"),
        "typicality_bound": _value(1 - 2.0 ** (-min(cut.n_a, cut.n_b) / 2 + 1), "fraction"),
    }


def cmd_cool(args) -> dict:
    st = _load(args)
    return entanglement_cool(st.tab, Bipartition.parse(args.cut, st.n)).to_json()


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabent", description="Stabilizer-entanglement tools for doped states.")
    p.add_argument("--version", action="version", version=f"stabent {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, state=True, cut=True, seed=False, help=""):
        sp = sub.add_parser(name, help=help)
        if state:
            _add_state(sp)
        if cut:
            sp.add_argument("--cut", default="half", help="'half', '0,1|rest' or '0,1|2,3'")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed" + (" (required)" if seed else ""))
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.set_defaults(fn=fn)
        return sp

    add("entropy", cmd_entropy, help="E, nu, entropy intervals and exact S2")
    sp = add("monitor", cmd_monitor, help="generator-removal trace of a circuit")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp = add("distill", cmd_distill, help="local Cliffords extracting Bell pairs")
    sp.add_argument("--s0", type=float, default=None, help="bound on the input's entropy")
    add("dilute-plan", cmd_dilute, help="ebit and communication cost to rebuild the state")
    sp = add("ghz-count", cmd_ghz, cut=False, help="GHZ and pairwise Bell counts")
    sp.add_argument("--parts", required=True, help="'0,1|2,3|4,5'")
    sp = add("witness", cmd_witness, cut=False, seed=True, help="witness plan and shot-based estimate")
    sp.add_argument("--cut", action="append", help="repeatable bipartition")
    sp.add_argument("--e-level", type=float, default=0.0)
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--estimate", action="store_true", help="run the shots on the dense state")
    sp.add_argument("--noise", type=float, default=0.0, help="depolarizing strength of the measured state")
    sp = add("phase-test", cmd_phase, help="ED/MD decision nu <= theta E")
    sp.add_argument("--theta", type=float, default=1.0)
    sp = add("hybrid", cmd_hybrid, state=False, cut=False, seed=True, help="birth-death chain for nullity")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--pt", type=float, default=0.0)
    sp.add_argument("--pm", type=float, default=0.0)
    sp.add_argument("--adaptive", action="store_true")
    sp.add_argument("--r0", type=float, default=0.5)
    sp.add_argument("--approx-f", action="store_true")
    sp.add_argument("--mc-steps", type=int, default=0)
    sp.add_argument("--mode", choices=["reduced", "tableau"], default="reduced")
    sp = add("lyapunov", cmd_lyapunov, state=False, cut=False, seed=True, help="Choi brickwork slope fit")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--layers", type=int, required=True)
    sp.add_argument("--window", help="'lo,hi' in layers")
    sp.add_argument("--samples", type=int, default=50)
    sp = add("topo", cmd_topo, cut=False, help="S_AB + S_BC - S_B - S_ABC")
    sp.add_argument("--ghz", type=int, help="use an n-qubit GHZ state")
    sp.add_argument("--toric", help="use an 'l1,l2' toric-code state")
    sp.add_argument("--regions", help="'A|B|C' site lists")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp = add("sample", cmd_sample, state=False, seed=True, help="typicality experiment over mu_t or mu_nu")
    sp.add_argument("--ensemble", choices=["mu_t", "mu_nu"], default="mu_t")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--l", type=int, default=1)
    sp.add_argument("--nu", type=int, default=1)
    sp.add_argument("--samples", type=int, default=100)
    add("cool", cmd_cool, help="move the non-stabilizer core to one side")
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("fn", "out")}


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _execute(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), "", None, None
    report = {"schema_version": SCHEMA_VERSION, "version": f"stabent {__version__}", "command": args.command}
    report["config"] = _config(args)
    message = None
    try:
        result = args.fn(args)
        code = 0
    except InfeasiblePlan as exc:
        message = str(exc)
        result, code = {"error": "infeasible", "message": message}, 2
    except (ValueError, OSError, KeyError) as exc:
        message = str(exc)
        result, code = {"error": "input", "message": message}, 1
    if isinstance(result, str):
        return code, result, args.out, message
    report["result"] = result
    return code, json.dumps(_clean(report), indent=2, sort_keys=True) + "\n", args.out, message


def run_command(argv=None) -> tuple[int, str]:
    """Run one command; returns ``(exit_code, report_text)``."""
    code, text, _, _ = _execute(argv)
    return code, text


def main(argv=None) -> int:
    code, text, dest, message = _execute(argv)
    if dest and text:
        Path(dest).write_text(text)
    else:
        sys.stdout.write(text)
    if message:
        print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
