"""Verification harness: extremal inputs, domination checks, sweeps, refinement studies."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .bounds import (
    THEOREMS,
    BoundReport,
    KernelMap,
    ProblemInstance,
    bound_corollary_hZ,
    bound_corollary_Z,
    compute_bound,
    compute_p,
)
from .errors import (
    EvalFault,
    GeneratorExhausted,
    GronwallError,
    HypothesisViolated,
    InvalidInstance,
    Overflow,
)
from .expr import ScalarMap, parse, sample
from .timescale import GridFunction, TimeScale, build_timescale, refine, ts_exponential

U_OVERFLOW = 1e100
HYPOTHESIS_RTOL = 1e-9
DOMINATION_RTOL = 1e-9

# Curated nonlinearities; each passes the certificates its role needs.
PHI_LIBRARY = ("x", "sqrt(x)", "2*x", "pow(x,0.75)", "x+sqrt(x)", "1.5*sqrt(x)")
W_LIBRARY = ("x", "sqrt(x)", "x/(1+x)", "pow(x,2)", "log(1+x)", "2*x", "min(x,1)")
G_LIBRARY = ("x", "sqrt(x)", "1", "x/(1+x)", "log(1+x)", "sqrt(x)+1")
KERNEL_LIBRARY = ("1", "0.5", "1+t-s", "exp(-s)", "2*exp(-s)", "(1+t)*exp(-s)",
                  "t-s+0.1", "sqrt(1+t-s)", "log(1+t-s)", "min(1,t-s)")

_MAPS: dict = {}


def _map(text: str, role: str) -> ScalarMap:
    # shared ScalarMap objects let certificate and transform caches hit
    key = (text, role)
    if key not in _MAPS:
        _MAPS[key] = ScalarMap(text, role)
    return _MAPS[key]


# -- extremal functions ----------------------------------------------------------

def _kernel_matrix(inst: ProblemInstance) -> np.ndarray:
    if inst.separable:
        n = inst.n
        return np.tril(np.broadcast_to(inst.b.values[None, :], (n, n)))
    return inst.kernel.values


def _outer_weight(inst: ProblemInstance) -> np.ndarray:
    return inst.f.values * inst.h.values if inst.separable else inst.f.values


def synthesize_u_equality(inst: ProblemInstance) -> GridFunction:
    """The function that meets the hypothesis inequality with equality.

    Every integral on the right runs over [a, t), so u(t) only depends on
    earlier values and a forward sweep builds it.
    """
    n = inst.n
    mu = inst.scale.graininess
    a = inst.a.values
    f = inst.f.values
    w = _outer_weight(inst)
    K = _kernel_matrix(inst)
    lin = inst.g if inst.uses_g else None
    u = np.zeros(n)
    phi_u = np.zeros(n)
    acc_lin = 0.0
    acc_nl = 0.0
    for m in range(n):
        u[m] = a[m] + acc_lin + acc_nl
        t = float(inst.scale.points[m])
        if not u[m] <= U_OVERFLOW:
            raise Overflow(f"extremal u exceeds {U_OVERFLOW:g} at t={t!r}")
        if m == n - 1:
            break
        try:
            phi_u[m] = inst.Phi(u[m])
            V = float(np.dot(K[m, :m] * mu[:m], phi_u[:m]))
            g_u = u[m] if lin is None else lin(u[m])
            acc_lin += mu[m] * f[m] * g_u
            acc_nl += mu[m] * w[m] * inst.W(V)
        except EvalFault as exc:
            if exc.overflow:
                raise Overflow(f"extremal u overflows at t={t!r}: {exc}") from None
            raise
    return GridFunction(inst.scale, u)


def hypothesis_rhs(inst: ProblemInstance, u) -> np.ndarray:
    """Right-hand side of the hypothesis inequality evaluated for ``u``."""
    uv = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
    mu = inst.scale.graininess
    K = np.tril(_kernel_matrix(inst), k=-1)
    V = K @ (mu * inst.Phi(uv))
    lin = inst.g(uv) if inst.uses_g else uv
    integrand = mu * (inst.f.values * lin + _outer_weight(inst) * inst.W(V))
    acc = np.concatenate([[0.0], np.cumsum(integrand[:-1])])
    return inst.a.values + acc


@dataclass
class DominationReport:
    t: np.ndarray
    u: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    in_domain: np.ndarray
    passed: bool
    violations: int
    worst_margin: float
    tightness: float
    report: Optional[BoundReport] = None

    def rows(self):
        return self.report.rows(self.u)


def verify_domination(inst: ProblemInstance, u) -> DominationReport:
    uv = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
    if np.any(uv < 0):
        raise HypothesisViolated("u must be nonnegative")
    rhs = hypothesis_rhs(inst, uv)
    excess = uv - rhs
    bad = excess > HYPOTHESIS_RTOL * np.maximum(np.abs(rhs), 1.0)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise HypothesisViolated(
            f"u does not satisfy the hypothesis at t={float(inst.scale.points[j])!r}: "
            f"u={uv[j]!r} > rhs={rhs[j]!r}"
        )
    rep = compute_bound(inst)
    ok = rep.in_domain
    margin = rep.margins(uv)
    viol = ok & (uv > rep.bound + DOMINATION_RTOL * np.abs(rep.bound))
    summ = rep.summary(uv)
    return DominationReport(rep.t, uv, rep.bound, margin, ok, not bool(viol.any()), int(viol.sum()),
                            summ["worst_margin"], summ["tightness"], rep)


# -- random instances --------------------------------------------------------------

def random_scale_spec(rng: np.random.Generator) -> dict:
    kind = rng.choice(["integer", "hgrid", "uniform", "qgeometric"])
    if kind == "integer":
        return {"kind": "integer", "a": 0, "b": int(rng.integers(2, 13))}
    if kind == "hgrid":
        h = float(rng.choice([0.1, 0.5, 2.0]))
        steps = int(rng.integers(2, 13))
        return {"kind": "hgrid", "a": 0.0, "b": round(steps * h, 12), "h": h}
    if kind == "uniform":
        return {"kind": "uniform", "a": 0.0, "b": float(rng.choice([0.5, 1.0, 2.0])),
                "n": int(rng.integers(2, 21))}
    return {"kind": "qgeometric", "q": float(rng.choice([1.2, 1.5, 2.0])), "a": 1.0,
            "count": int(rng.integers(3, 11))}


def _nonneg(rng, n, hi, zero_prob=0.2):
    vals = rng.uniform(0.0, hi, n)
    vals[rng.random(n) < zero_prob] = 0.0
    return vals


def random_instance(seed: int, theorem: str, scale_spec: Mapping | TimeScale | None = None,
                    max_tries: int = 50) -> ProblemInstance:
    """Deterministic random instance: same (seed, theorem, scale) -> same instance."""
    theorem = theorem.upper()
    if theorem not in THEOREMS:
        raise InvalidInstance(f"unknown theorem {theorem!r}")
    rng = np.random.default_rng([int(seed), THEOREMS.index(theorem)])
    spec = scale_spec if scale_spec is not None else random_scale_spec(rng)
    ts = build_timescale(spec)
    n = len(ts)
    span = ts.span
    last_error = None
    for _ in range(max_tries):
        c = rng.uniform(0.2, 2.0)
        f = _nonneg(rng, n, c / span)
        a = rng.uniform(0.2, 3.0) + np.cumsum(np.where(rng.random(n) < 0.5, 0.0, rng.uniform(0, 0.5, n)))
        Phi = _map(str(rng.choice(PHI_LIBRARY)), "Phi")
        W = _map(str(rng.choice(W_LIBRARY)), "W")
        kw = {}
        if theorem in ("THM1", "THM3"):
            kw["kernel"] = str(rng.choice(KERNEL_LIBRARY))
        else:
            kw["h"] = _nonneg(rng, n, rng.uniform(0.2, 2.0))
            b = _nonneg(rng, n, rng.uniform(0.2, 2.0))
            if not np.any(b[: n - 2] > 0):
                b[int(rng.integers(0, n - 2))] = rng.uniform(0.1, 1.0)
            kw["b"] = b
        if theorem in ("THM3", "THM4"):
            kw["g"] = _map(str(rng.choice(G_LIBRARY)), "g")
        try:
            kernel = KernelMap.from_expr(ts, kw.pop("kernel")) if "kernel" in kw else None
            return ProblemInstance(
                ts, theorem, GridFunction(ts, a), GridFunction(ts, f), Phi, W, kernel=kernel,
                h=None if "h" not in kw else GridFunction(ts, kw["h"]),
                b=None if "b" not in kw else GridFunction(ts, kw["b"]),
                g=kw.get("g"),
            )
        except InvalidInstance as exc:
            last_error = exc
    raise GeneratorExhausted(f"no admissible instance after {max_tries} tries: {last_error}")


def with_base_points(inst: ProblemInstance, x0: float = 1.0, delta0: float = 1.0) -> ProblemInstance:
    return ProblemInstance(inst.scale, inst.theorem, inst.a, inst.f, inst.Phi, inst.W,
                           kernel=inst.kernel, h=inst.h, b=inst.b, g=inst.g, x0=x0, delta0=delta0,
                           check_certificates=False)


# -- sweeps ------------------------------------------------------------------------------

SWEEP_COLUMNS = ("seed", "theorem", "scale", "worst_margin", "tightness")


@dataclass
class SweepRow:
    seed: int
    theorem: str
    scale: str
    worst_margin: Optional[float]
    tightness: Optional[float]
    status: str          # pass | violation | overflow | out-of-domain

    def as_tuple(self):
        return (self.seed, self.theorem, self.scale, self.worst_margin, self.tightness)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(r.status == "violation" for r in self.rows)

    @property
    def skipped(self) -> int:
        return sum(r.status == "overflow" for r in self.rows)

    @property
    def checked(self) -> int:
        return sum(r.status == "pass" or r.status == "violation" for r in self.rows)


def _scale_label(ts: TimeScale) -> str:
    spec = ts.spec or {}
    if spec.get("kind") == "explicit":
        return f"explicit(n={len(ts)})"
    args = ",".join(f"{k}={spec[k]}" for k in spec if k != "kind")
    return f"{ts.generator_tag}({args})"


def sweep(seeds: Iterable[int], theorems: Sequence[str] = THEOREMS,
          scale_specs: Optional[Sequence] = None) -> SweepResult:
    """Extremal-domination sweep. Rows are sorted by (seed, theorem)."""
    out = SweepResult()
    for seed in sorted(seeds):
        for theorem in theorems:
            spec = None
            if scale_specs:
                spec = scale_specs[seed % len(scale_specs)]
            inst = random_instance(seed, theorem, spec)
            label = _scale_label(inst.scale)
            try:
                u = synthesize_u_equality(inst)
            except Overflow:
                out.rows.append(SweepRow(seed, theorem, label, None, None, "overflow"))
                continue
            try:
                rep = verify_domination(inst, u)
            except Overflow:
                out.rows.append(SweepRow(seed, theorem, label, None, None, "overflow"))
                continue
            if not rep.in_domain.any():
                status = "out-of-domain"
            else:
                status = "pass" if rep.passed else "violation"
            out.rows.append(SweepRow(seed, theorem, label,
                                     None if math.isnan(rep.worst_margin) else rep.worst_margin,
                                     None if math.isnan(rep.tightness) else rep.tightness, status))
    return out


def oracle_gap(inst: ProblemInstance) -> float:
    """Max relative gap between the generic engine and the Z / hZ closed form."""
    generic = compute_bound(inst)
    if inst.theorem == "THM1":
        oracle = bound_corollary_Z(inst)
    elif inst.theorem == "THM3":
        oracle = bound_corollary_hZ(inst)
    else:
        raise InvalidInstance("closed forms exist for THM1 on Z and THM3 on hZ only")
    if not np.array_equal(generic.in_domain, oracle.in_domain):
        return math.inf
    ok = generic.in_domain
    if not ok.any():
        return 0.0
    g, o = generic.bound[ok], oracle.bound[ok]
    return float(np.max(np.abs(g - o) / np.abs(o)))


def bound_gap(r1: BoundReport, r2: BoundReport) -> float:
    """Max relative difference over points in domain for both; inf if flags disagree."""
    if not np.array_equal(r1.in_domain, r2.in_domain):
        return math.inf
    ok = r1.in_domain
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(r1.bound[ok] - r2.bound[ok]) / np.abs(r2.bound[ok])))


# -- convergence studies ------------------------------------------------------------

CONVERGENCE_COLUMNS = ("factor", "n", "value", "sup_diff", "order", "ref_gap")


@dataclass
class ConvergenceRow:
    factor: int
    n: int
    value: float
    sup_diff: Optional[float]
    order: Optional[float]
    ref_gap: Optional[float]

    def as_tuple(self):
        return (self.factor, self.n, self.value, self.sup_diff, self.order, self.ref_gap)


def _coarse_indices(base: TimeScale, fine: TimeScale) -> np.ndarray:
    return np.array([fine.index(t) for t in base.points])


def convergence_study(base_spec: Mapping, factors: Sequence[int], quantity: str = "exp",
                      functions: Optional[Mapping[str, str]] = None, theorem: Optional[str] = None,
                      x0: float = 1.0, delta0: float = 1.0) -> list:
    """Recompute a quantity on refined scales and track it at the coarse points.

    ``quantity`` is ``"exp"`` (e_f(t, a)), ``"p"`` (compared with exp(int f))
    or ``"bound"`` (the selected theorem's bound). Functions are expression
    strings re-sampled on each refined scale.
    """
    functions = dict(functions or {})
    base = build_timescale(base_spec)
    if not base.refinable:
        refine(base_spec, 1)  # raises NotRefinable with the right message
    f_text = functions.get("f", "1")
    rows = []
    prev = None
    prev_diff = None
    prev_n = None
    for factor in factors:
        ts = refine(base_spec, factor)
        idx = _coarse_indices(base, ts)
        ref = None
        if quantity in ("exp", "p"):
            f = sample(f_text, ts)
            if quantity == "exp":
                vals = np.array([ts_exponential(f, t, ts.a) for t in ts.points[idx]])
            else:
                vals = compute_p(ts, f).values[idx]
            ref = np.exp(_continuous_integral(f_text, base))
        elif quantity == "bound":
            inst = ProblemInstance.build(
                ts, theorem or "THM1", a=functions.get("a", "1"), f=f_text,
                Phi=functions.get("Phi", "x"), W=functions.get("W", "x"),
                k=functions.get("k"), h=functions.get("h"), b=functions.get("b"),
                g=functions.get("g"), x0=x0, delta0=delta0)
            rep = compute_bound(inst)
            vals = rep.bound[idx]
        else:
            raise ValueError(f"unknown quantity {quantity!r}")
        n_steps = len(ts) - 1
        diff = None if prev is None else float(np.nanmax(np.abs(vals - prev)))
        order = None
        if diff is not None and prev_diff is not None and diff > 0 and prev_diff > 0:
            order = math.log(prev_diff / diff) / math.log(n_steps / prev_n)
        gap = None if ref is None else float(np.max(np.abs(vals - ref)))
        rows.append(ConvergenceRow(int(factor), n_steps, float(vals[-1]), diff, order, gap))
        prev, prev_n = vals, n_steps
        if diff is not None:
            prev_diff = diff
    return rows


def _continuous_integral(f_text: str, base: TimeScale) -> np.ndarray:
    """int_a^t f(s) ds at every coarse point (Riemann integral, via QUADPACK)."""
    from scipy.integrate import quad

    expr = parse(f_text, ("t",))
    out = np.zeros(len(base))
    for j in range(1, len(base)):
        piece, _ = quad(lambda s: float(expr(t=s)), base.points[j - 1], base.points[j],
                        epsabs=1e-14, epsrel=1e-13)
        out[j] = out[j - 1] + piece
    return out


# -- CSV -----------------------------------------------------------------------------------

def format_value(v) -> str:
    """Shortest round-trip text for floats; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def write_csv(stream, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


REPORT_COLUMNS = ("t", "u", "bound", "margin", "in_domain")
