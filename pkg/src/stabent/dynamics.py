"""Circuit dynamics: monitoring, random ensembles, hybrid chains, Lyapunov fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import _synth
from .circuit import Circuit, CliffordCircuit, Gate, MeasureZ, NonClifford, conjugate_rows
from .f2core import pack_bits, _eliminate
from .pauli import Pauli
from .tableau import Bipartition, StabTableau, local_count, stabilizer_entanglement


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


# --------------------------------------------------------------------------
# uniform Clifford sampling


def _sform(u: np.ndarray, v: np.ndarray, n: int) -> int:
    return int((np.count_nonzero(u[:n] & v[n:]) + np.count_nonzero(u[n:] & v[:n])) & 1)


def random_symplectic_basis(n: int, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform random symplectic basis ``[(a_k, b_k)]`` of ``F_2^{2n}``.

    Each ``a_k`` is uniform among nonzero vectors of the symplectic complement
    of the earlier pairs, and ``b_k`` uniform among complement vectors with
    ``<a_k, b_k> = 1``; the resulting matrix is uniform over ``Sp(2n, 2)``.
    """
    rng = _rng(rng)
    pairs: list[tuple[np.ndarray, np.ndarray]] = []

    def project(v):
        for a, b in pairs:
            if _sform(v, b, n):
                v = v ^ a
            if _sform(v, a, n):
                v = v ^ b
        return v

    for _ in range(n):
        while True:
            a = project(rng.integers(0, 2, 2 * n).astype(bool))
            if a.any():
                break
        while True:
            b = project(rng.integers(0, 2, 2 * n).astype(bool))
            if _sform(a, b, n):
                break
        pairs.append((a, b))
    return pairs


def random_clifford(n: int, rng) -> CliffordCircuit:
    """Uniformly random ``n``-qubit Clifford (modulo global phase) as a circuit.

    Samples the images of ``X_k`` and ``Z_k`` (symplectic basis plus uniform
    signs) and synthesizes the circuit with that conjugation action.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(rng)
    basis = random_symplectic_basis(n, rng)
    signs = rng.integers(0, 2, 2 * n)
    images = [
        (
            Pauli(a[:n], a[n:], 2 * int(signs[2 * k])),
            Pauli(b[:n], b[n:], 2 * int(signs[2 * k + 1])),
        )
        for k, (a, b) in enumerate(basis)
    ]
    return _synth.reduce_basis(images, n).inverse()


# --------------------------------------------------------------------------
# monitoring


def remove_support(t: StabTableau, sites, diagonal: bool = False) -> tuple[StabTableau, int]:
    """Drop the fewest generators so the rest act trivially on ``sites``.

    Gaussian elimination on the restricted columns picks one pivot generator
    per independent column pattern and clears it from the others (signs
    tracked through Pauli products).  With ``diagonal`` only the x-columns
    matter, since a diagonal gate fixes any ``Z`` pattern.
    """
    sites = list(sites)
    gens = t.gens
    cols = [("x", q) for q in sites] + ([] if diagonal else [("z", q) for q in sites])
    alive = list(range(len(gens)))
    removed = 0
    for kind, q in cols:
        hit = [i for i in alive if (gens[i].x if kind == "x" else gens[i].z)[q]]
        if not hit:
            continue
        piv = hit[0]
        for i in hit[1:]:
            gens[i] = gens[i] * gens[piv]
        alive.remove(piv)
        removed += 1
    return StabTableau(t.n, [gens[i] for i in alive], check=False), removed


@dataclass
class MonitorRecord:
    step: int
    op: str
    size: int
    size_a: int
    nu_removed: int
    t_so_far: int
    bound_hi: int
    bound_lo: int
    alg_value: int


@dataclass
class MonitorTrace:
    records: list[MonitorRecord]
    final: StabTableau = field(repr=False)
    cut: Bipartition = field(repr=False)

    FIELDS = ("step", "op", "size", "size_a", "nu_removed", "t_so_far", "bound_hi", "bound_lo", "alg_value")

    def to_csv(self) -> str:
        lines = [",".join(self.FIELDS)]
        for r in self.records:
            lines.append(",".join(str(getattr(r, f)) for f in self.FIELDS))
        return "\n".join(lines) + "\n"

    @property
    def last(self) -> MonitorRecord:
        return self.records[-1]


def monitor_circuit(c: Circuit, cut: Bipartition, initial: StabTableau | None = None) -> MonitorTrace:
    """Track the stabilizer group of ``c|0..0>`` through Cliffords and non-Cliffords.

    Clifford gates conjugate the tableau.  A non-Clifford gate on sites ``X``
    removes up to ``2|X|`` generators (``|X|`` for diagonal gates) so the rest
    act trivially on ``X`` and survive the gate.  Each record stores
    ``[max(0, n_A - |S_A| - 2 nu), n_A - |S_A|]``, which brackets every Renyi
    entropy, and the single value ``n_A - |S_A| + 2 l t``.
    """
    if c.has_measurements():
        raise ValueError("monitor_circuit does not accept measurements")
    if cut.n != c.n:
        raise ValueError("cut size differs from circuit")
    t = initial.copy() if initial is not None else StabTableau.zero_state(c.n)
    xs, zs, r = t.xs.copy(), t.zs.copy(), t.r.copy()
    n_a = cut.n_a
    removed = 0
    t_count = 0
    l_max = 0
    records = []

    def record(step, label):
        cur = StabTableau._raw(c.n, xs, zs, r)
        s_a = local_count(cur, cut.a_mask)
        nu = c.n - cur.size
        hi = n_a - s_a
        records.append(
            MonitorRecord(step, label, cur.size, s_a, removed, t_count, hi, max(0, hi - 2 * nu), hi + 2 * l_max * t_count)
        )

    record(0, "init")
    for step, op in enumerate(c.ops, 1):
        if isinstance(op, Gate):
            conjugate_rows(xs, zs, r, op.name, op.sites)
        elif isinstance(op, NonClifford):
            cur = StabTableau._raw(c.n, xs, zs, r)
            new, k = remove_support(cur, op.sites, op.diagonal)
            if k > 2 * len(op.sites):
                raise AssertionError("removal exceeded 2|X|")
            xs, zs, r = new.xs.copy(), new.zs.copy(), new.r.copy()
            removed += k
            t_count += 1
            l_max = max(l_max, len(op.sites))
        else:
            raise ValueError(f"unsupported op {op!r}")
        record(step, op.to_text())
    return MonitorTrace(records, StabTableau._raw(c.n, xs, zs, r), cut)


# --------------------------------------------------------------------------
# ensembles


def sample_mu_t(n: int, t: int, l: int, rng) -> Circuit:
    """Random Clifford, then ``t`` rounds of (Haar gate on qubits ``0..l-1``, random Clifford)."""
    if not 1 <= l <= n:
        raise ValueError("need 1 <= l <= n")
    rng = _rng(rng)
    c = Circuit(n)
    c.extend(random_clifford(n, rng).to_circuit().ops)
    for _ in range(t):
        c.append(NonClifford(tuple(range(l)), "HAAR"))
        c.extend(random_clifford(n, rng).to_circuit().ops)
    return c


def sample_mu_nu(n: int, nu: int, rng) -> Circuit:
    """Haar state on the first ``nu`` qubits followed by a global random Clifford."""
    if not 0 <= nu <= n:
        raise ValueError("need 0 <= nu <= n")
    rng = _rng(rng)
    c = Circuit(n)
    if nu:
        c.append(NonClifford(tuple(range(nu)), "HAAR"))
    c.extend(random_clifford(n, rng).to_circuit().ops)
    return c


def random_doped_circuit(n: int, t: int, rng, labels=("T",), layer_gates: int | None = None) -> Circuit:
    """Random Clifford layers interleaved with ``t`` single-site non-Clifford gates."""
    rng = _rng(rng)
    c = Circuit(n)
    for k in range(t + 1):
        c.extend(random_clifford(n, rng).to_circuit().ops)
        if k < t:
            label = labels[int(rng.integers(len(labels)))]
            q = int(rng.integers(n))
            if label == "RZ":
                c.append(NonClifford((q,), "RZ", theta=float(rng.uniform(0, 2 * math.pi))))
            elif label == "HAAR2" and n >= 2:
                a, b = (int(v) for v in rng.choice(n, 2, replace=False))
                c.append(NonClifford((a, b), "HAAR"))
            else:
                c.append(NonClifford((q,), "T" if label == "HAAR2" else label))
    return c


# --------------------------------------------------------------------------
# hybrid birth-death chain


@dataclass
class ChainSpec:
    n: int
    p_t: float = 0.0
    p_m: float = 0.0
    r0: float | None = None
    layers: int = 1
    approx_f: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0 <= self.p_t <= 1 and 0 <= self.p_m <= 1) or self.p_t + self.p_m > 1 + 1e-15:
            raise ValueError("need probabilities in [0, 1] with p_t + p_m <= 1")
        if self.r0 is not None and not 0 < self.r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")


def anticommute_fraction(n: int, nu: int, approx: bool = False) -> Fraction:
    """``f(nu) = 1 - (2^{n+nu} - 1)/(4^n - 1)``; ``approx`` gives ``1 - 2^{nu-n}``."""
    if approx:
        return 1 - Fraction(2**nu, 2**n)
    return 1 - Fraction(2 ** (n + nu) - 1, 4**n - 1)


def exact_measurement_gain(n: int, nu: int) -> Fraction:
    """Probability that a uniform non-identity Pauli commutes with ``G`` and lies outside it."""
    return Fraction(2 ** (n + nu) - 2 ** (n - nu), 4**n - 1)


def _adaptive_target(n: int, r0: Fraction) -> list[Fraction]:
    # pi(nu) = r0^nu for nu >= 1, pi(0) = 1 - sum
    pi = [Fraction(0)] + [r0**v for v in range(1, n + 1)]
    pi[0] = 1 - sum(pi[1:])
    return pi


def hybrid_rates(spec: ChainSpec) -> tuple[list[Fraction], list[Fraction]]:
    """Exact ``(p_plus[nu], p_minus[nu])`` for ``nu = 0..n``.

    ``p_minus = p_m (1 - f)(1 - 2^{-nu})`` and ``p_plus = p_t f``.  With
    ``r0`` set, ``p_m`` stays fixed (default 1/2) and ``p_t(nu)`` is chosen so
    that ``pi(nu) = r0^nu`` for ``nu >= 1`` with ``pi(0)`` absorbing the rest;
    for ``r0 = 1/2`` that is ``pi(0) = 2^{-n}``.
    """
    n = spec.n
    f = [anticommute_fraction(n, v, spec.approx_f) for v in range(n + 1)]
    p_m = Fraction(spec.p_m).limit_denominator(10**12) if spec.p_m else Fraction(0)
    if spec.r0 is not None and p_m == 0:
        p_m = Fraction(1, 2)
    minus = [p_m * (1 - f[v]) * (1 - Fraction(1, 2**v)) for v in range(n + 1)]
    if spec.r0 is None:
        p_t = Fraction(spec.p_t).limit_denominator(10**12)
        plus = [p_t * f[v] for v in range(n + 1)]
        return plus, minus
    target = _adaptive_target(n, Fraction(spec.r0).limit_denominator(10**12))
    plus = []
    for v in range(n):
        p = target[v + 1] / target[v] * minus[v + 1]
        p_t = p / f[v]
        if p_t + p_m > 1:
            raise ValueError(f"adaptive p_t({v}) = {float(p_t):.4g} exceeds 1 - p_m")
        plus.append(p)
    plus.append(Fraction(0))
    return plus, minus


def adaptive_ratio(n: int, nu: int, r0: float) -> float:
    """The closed-form ratio ``p_t(nu-1)/p_m(nu) = r0 (2^nu - 1)/(2^n - 2^{nu-1})``."""
    return r0 * (2**nu - 1) / (2**n - 2 ** (nu - 1))


def _logf(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass
class Stationary:
    pi: np.ndarray
    log_pi: np.ndarray
    mean_nu: float
    point_mass: int | None
    plus: list[Fraction] = field(repr=False)
    minus: list[Fraction] = field(repr=False)

    def detailed_balance_residual(self) -> float:
        """``max |log(pi(v) p_+(v)) - log(pi(v+1) p_-(v+1))|`` over the support."""
        worst = 0.0
        for v in range(len(self.pi) - 1):
            if self.plus[v] == 0 or self.minus[v + 1] == 0:
                continue
            a = self.log_pi[v] + _logf(self.plus[v])
            b = self.log_pi[v + 1] + _logf(self.minus[v + 1])
            worst = max(worst, abs(a - b))
        return worst

    def to_json(self) -> dict:
        return {
            "pi": {"value": [float(p) for p in self.pi], "unit": "probability"},
            "mean_nu": {"value": self.mean_nu, "unit": "qubits"},
            "point_mass": self.point_mass,
        }


def hybrid_stationary(spec: ChainSpec) -> Stationary:
    """Stationary law of the birth-death chain, ``pi(nu) ~ prod p_+(k-1)/p_-(k)``, in log space.

    Chains that cannot leave 0 (``p_+(0) = 0``) or that never descend
    (``p_- = 0``) are reported as point masses.
    """
    plus, minus = hybrid_rates(spec)
    n = spec.n
    if plus[0] == 0:
        return _point(0, n, plus, minus)
    if all(m == 0 for m in minus[1:]):
        top = next((v for v in range(n + 1) if plus[v] == 0), n)
        return _point(top, n, plus, minus)
    logw = np.full(n + 1, -np.inf)
    logw[0] = 0.0
    for v in range(1, n + 1):
        if plus[v - 1] == 0 or not np.isfinite(logw[v - 1]):
            break
        logw[v] = logw[v - 1] + _logf(plus[v - 1]) - _logf(minus[v])
    finite = np.isfinite(logw)
    m = logw[finite].max()
    log_z = m + math.log(math.fsum(np.exp(logw[finite] - m)))
    log_pi = logw - log_z
    pi = np.exp(log_pi)
    return Stationary(pi, log_pi, float(np.dot(np.arange(n + 1), pi)), None, plus, minus)


def _point(v: int, n: int, plus, minus) -> Stationary:
    pi = np.zeros(n + 1)
    pi[v] = 1.0
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    return Stationary(pi, log_pi, float(v), v, plus, minus)


@dataclass
class ChainRun:
    trajectory: np.ndarray
    histogram: np.ndarray
    up: np.ndarray
    down: np.ndarray
    visits: np.ndarray

    def empirical(self) -> np.ndarray:
        return self.histogram / self.histogram.sum()

    def to_json(self) -> dict:
        return {
            "histogram": {"value": self.empirical().tolist(), "unit": "probability"},
            "steps": {"value": int(self.trajectory.size - 1), "unit": "layers"},
            "mean_nu": {"value": float(self.trajectory.mean()), "unit": "qubits"},
        }


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


def hybrid_mc(spec: ChainSpec, rng, steps: int | None = None, start: int = 0, mode: str = "reduced") -> ChainRun:
    """Simulate the nullity chain for ``steps`` layers (default ``spec.layers``).

    ``mode="reduced"`` draws moves from the exact rates.  ``mode="tableau"``
    runs the circuit itself on a tableau: a random Clifford each layer, then
    with probability ``p_t`` a generic ``Z``-rotation on qubit 0 (removing
    the generator that anticommutes with ``Z_0``, if any), or with
    probability ``p_m`` a ``Z_0`` measurement.
    """
    rng = _rng(rng)
    steps = spec.layers if steps is None else steps
    n = spec.n
    if not 0 <= start <= n:
        raise ValueError("start must lie in [0, n]")
    traj = np.empty(steps + 1, dtype=np.int64)
    traj[0] = start
    up = np.zeros(n + 1, np.int64)
    down = np.zeros(n + 1, np.int64)
    visits = np.zeros(n + 1, np.int64)
    if mode == "reduced":
        plus, minus = hybrid_rates(spec)
        pp = np.array([float(p) for p in plus])
        pm = np.array([float(p) for p in minus])
        u = rng.random(steps)
        v = start
        for k in range(steps):
            visits[v] += 1
            if u[k] < pp[v]:
                up[v] += 1
                v += 1
            elif u[k] < pp[v] + pm[v]:
                down[v] += 1
                v -= 1
            traj[k + 1] = v
    elif mode == "tableau":
        if spec.r0 is not None:
            raise ValueError("tableau mode supports fixed p_t, p_m only")
        from .tableau import apply_circuit, measure_z, random_tableau

        tab = random_tableau(n, rng, size=n - start)
        for k in range(steps):
            v = n - tab.size
            visits[v] += 1
            tab = apply_circuit(tab, random_clifford(n, rng))
            u = rng.random()
            if u < spec.p_t:
                tab, _ = remove_support(tab, [0], diagonal=True)
            elif u < spec.p_t + spec.p_m:
                tab, _, _ = measure_z(tab, 0, rng)
            w = n - tab.size
            if w > v:
                up[v] += 1
            elif w < v:
                down[v] += 1
            traj[k + 1] = w
    else:
        raise ValueError("mode must be 'reduced' or 'tableau'")
    hist = np.bincount(traj[1:], minlength=n + 1)
    return ChainRun(traj, hist, up, down, visits)


# --------------------------------------------------------------------------
# Lyapunov estimation


def choi_state(n: int) -> StabTableau:
    """``2n``-qubit maximally entangled state: ``X_i X_{i+n}``, ``Z_i Z_{i+n}``."""
    gens = []
    for i in range(n):
        for letter in "XZ":
            gens.append(Pauli.from_letters({i: letter, i + n: letter}, 2 * n))
    return StabTableau(2 * n, gens)


def choi_cut(n: int, n_a: int | None = None, n_c: int | None = None) -> Bipartition:
    """``AC | BD`` with ``C`` the first ``n_c`` output qubits and ``A`` the first ``n_a`` reference qubits."""
    n_a = n // 2 if n_a is None else n_a
    n_c = n // 2 if n_c is None else n_c
    return Bipartition(list(range(n_c)) + [n + i for i in range(n_a)], 2 * n)


def brickwork_trace(n: int, layers: int, rng, cut: Bipartition | None = None) -> np.ndarray:
    """``E(tau)`` for ``tau = 0..layers`` of random two-qubit Clifford brickwork on the Choi state.

    One layer is an even sublayer (bonds ``(0,1), (2,3), ...``) followed by
    an odd one, acting on the first ``n`` qubits only.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = _rng(rng)
    cut = choi_cut(n) if cut is None else cut
    t = choi_state(n)
    xs, zs, r = t.xs.copy(), t.zs.copy(), t.r.copy()
    out = np.empty(layers + 1)
    out[0] = float(stabilizer_entanglement(t, cut))
    for tau in range(1, layers + 1):
        for parity in (0, 1):
            for a in range(parity, n - 1, 2):
                for g in random_clifford(2, rng).remap([a, a + 1], 2 * n):
                    conjugate_rows(xs, zs, r, g.name, g.sites)
        out[tau] = float(stabilizer_entanglement(StabTableau._raw(2 * n, xs, zs, r), cut))
    return out


def lambda_from_slope(c: float) -> float:
    """Invert ``c = (1/2) log2(1/(1 - lambda^2))``, clipped to ``[0, 1]``."""
    if c <= 0:
        return 0.0
    return float(min(1.0, math.sqrt(max(0.0, -math.expm1(-2 * c * math.log(2))))))


def slope_from_lambda(lam: float) -> float:
    return 0.5 * math.log2(1 / (1 - lam * lam))


@dataclass
class SlopeFit:
    c_hat: float
    intercept: float
    r_squared: float
    stderr: float

    @property
    def lambda_hat(self) -> float:
        return lambda_from_slope(self.c_hat)


def fit_slope(taus, values, window: tuple[int, int]) -> SlopeFit:
    """Least-squares line through ``(tau, E)`` for ``tau`` in the closed window."""
    taus = np.asarray(taus, float)
    values = np.asarray(values, float)
    lo, hi = window
    sel = (taus >= lo) & (taus <= hi)
    if sel.sum() < 2:
        raise ValueError(f"window [{lo}, {hi}] holds fewer than two points of the trace")
    x, y = taus[sel], values[sel]
    if np.ptp(y) == 0:
        return SlopeFit(0.0, float(y[0]), 1.0, 0.0)
    res = stats.linregress(x, y)
    return SlopeFit(float(res.slope), float(res.intercept), float(res.rvalue**2), float(res.stderr))


@dataclass
class LyapunovResult:
    fit: SlopeFit
    window: tuple[int, int]
    mean_trace: np.ndarray
    per_seed: list[SlopeFit]

    @property
    def c_hat(self) -> float:
        return self.fit.c_hat

    @property
    def lambda_hat(self) -> float:
        return self.fit.lambda_hat

    def to_json(self) -> dict:
        per = np.array([[f.c_hat, f.r_squared] for f in self.per_seed])
        return {
            "c_hat": {"value": self.fit.c_hat, "unit": "bits/layer"},
            "lambda_hat": {"value": self.fit.lambda_hat, "unit": "dimensionless"},
            "r_squared": {"value": self.fit.r_squared, "unit": "dimensionless"},
            "stderr": {"value": self.fit.stderr, "unit": "bits/layer"},
            "intercept": {"value": self.fit.intercept, "unit": "bits"},
            "window": {"value": list(self.window), "unit": "layers"},
            "mean_trace": {"value": self.mean_trace.tolist(), "unit": "bits"},
            "per_seed_c_hat_mean": {"value": float(per[:, 0].mean()), "unit": "bits/layer"},
            "per_seed_r_squared_min": {"value": float(per[:, 1].min()), "unit": "dimensionless"},
            "n_samples": {"value": len(self.per_seed), "unit": "seeds"},
        }


def lyapunov_estimate(n: int, layers: int, window: tuple[int, int] | None, rng, n_samples: int) -> LyapunovResult:
    """Fit ``E(tau) ~ E_0 + c tau`` on Choi-state brickwork and invert ``c`` to ``lambda``.

    The window must satisfy ``0 <= lo < hi <= min(layers, n_A/2)`` with
    ``n_A = n/2``; the default ``[2, n_A/2]`` (for ``n_A/2 >= 4``) skips the first-layer burst,
    which grows faster than the steady rate.  The headline fit is on the seed-averaged trace; each
    seed's own fit is kept in ``per_seed``.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_a = n // 2
    cap = n_a // 2
    if window is None:
        hi = min(layers, cap)
        window = (2 if hi >= 4 else max(0, hi - 2), hi)
    lo, hi = window
    if not (0 <= lo < hi <= layers):
        raise ValueError(f"window {window} is empty or outside the trace of {layers} layers")
    if hi > cap:
        raise ValueError(f"window end {hi} exceeds n_A/2 = {cap}")
    rng = _rng(rng)
    taus = np.arange(layers + 1)
    traces = np.array([brickwork_trace(n, layers, rng) for _ in range(n_samples)])
    per = [fit_slope(taus, tr, window) for tr in traces]
    mean = traces.mean(axis=0)
    return LyapunovResult(fit_slope(taus, mean, window), (lo, hi), mean, per)


def transition_frequencies(spec: ChainSpec, nu: int, trials: int, rng) -> tuple[float, float]:
    """One-layer up/down frequencies of the tableau circuit started at nullity ``nu``.

    Each trial draws a fresh random state with ``n - nu`` generators and runs
    one layer of :func:`hybrid_mc` in tableau mode.
    """
    rng = _rng(rng)
    up = down = 0
    for _ in range(trials):
        run = hybrid_mc(spec, rng, 1, start=nu, mode="tableau")
        up += int(run.up[nu])
        down += int(run.down[nu])
    return up / trials, down / trials
