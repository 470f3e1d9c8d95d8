"""Explicit Gronwall-Bihari bounds on finite time scales.

Four bound families are implemented, selected by ``theorem``:

``THM1``  u <= a + int f u + int f W(int k(s,.) Phi(u))
``THM2``  u <= a + int f u + int f h W(int b Phi(u))
``THM3``  u <= a + int f g(u) + int f W(int k(s,.) Phi(u))     (g in class S)
``THM4``  u <= a + int f g(u) + int f h W(int b Phi(u))        (g in class S)

All integrals are delta integrals over [a, t). The bounds are evaluated
verbatim with nested integrals precomputed as prefix sums; the middle
integral depends on the outer variable through the kernel, so a bound costs
O(n^2) kernel values plus n inversions of Psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import (
    DomainExceeded,
    HypothesisFailed,
    InvalidInstance,
    NonmonotoneR,
    NonpositiveZeta,
    ScaleMismatch,
    WrongScaleKind,
)
from .expr import Expr, ScalarMap, check_properties, parse, sample
from .timescale import GridFunction, TimeScale, prefix_integral
from .transforms import g_transform, psi_transform

THEOREMS = ("THM1", "THM2", "THM3", "THM4")
_REQUIRED = {
    "THM1": {"kernel"},
    "THM2": {"h", "b"},
    "THM3": {"kernel", "g"},
    "THM4": {"h", "b", "g"},
}
MIN_A = 1e-300
CERT_SAMPLES = 200
CERT_SEED = 0

PHI_PROPS = ("nondecreasing", "positive", "subadditive", "submultiplicative")
W_PROPS = ("nondecreasing", "positive")


class KernelMap:
    """k(t, s) sampled on all pairs s <= t of a scale.

    ``values[j, i]`` holds k(t_j, t_i) for i <= j (zero above the diagonal);
    ``delta1[j, i]`` holds the first-argument delta derivative for t_j in
    T^kappa. Construction checks nonnegativity of both and that k is not
    identically zero on T^kappa x T^kappa^2.
    """

    def __init__(self, scale: TimeScale, values: np.ndarray, expr: Optional[Expr] = None,
                 check: bool = True):
        n = len(scale)
        values = np.array(values, dtype=float)
        if values.shape != (n, n):
            raise ScaleMismatch(f"kernel matrix must be {n}x{n}, got {values.shape}")
        lower = np.tril(np.ones((n, n), dtype=bool))
        values[~lower] = 0.0
        if not np.all(np.isfinite(values[lower])):
            raise InvalidInstance("kernel has non-finite values on s <= t")
        self.scale = scale
        self.values = values
        self.expr = expr
        mu = scale.graininess[:-1]
        diff = values[1:, :] - values[:-1, :]
        # column j+1 of row j+1 is the new diagonal entry, not a difference
        diff[~lower[:-1, :]] = 0.0
        self.delta1 = diff / mu[:, None]
        if check:
            self._validate(diff, lower)

    def _validate(self, diff, lower):
        n = len(self.scale)
        mag = max(1.0, float(np.max(np.abs(self.values))))
        if np.any(self.values[lower] < -1e-12 * mag):
            j, i = np.argwhere((self.values < -1e-12 * mag) & lower)[0]
            raise InvalidInstance(f"kernel is negative at t={self.scale.points[j]!r}, s={self.scale.points[i]!r}")
        if np.any(diff < -1e-12 * mag):
            j, i = np.argwhere(diff < -1e-12 * mag)[0]
            raise InvalidInstance(
                f"kernel first-argument delta derivative is negative at t={self.scale.points[j]!r}, "
                f"s={self.scale.points[i]!r}"
            )
        # t in T^kappa (j <= n-2), s in T^kappa^2 (i <= n-3), s <= t
        block = self.values[: n - 1, : n - 2]
        if not np.any(block[np.tril(np.ones(block.shape, dtype=bool))] > 0):
            raise InvalidInstance("kernel is identically zero on T^kappa x T^kappa^2")

    @classmethod
    def from_expr(cls, scale: TimeScale, expr: Expr | str, check: bool = True) -> "KernelMap":
        if isinstance(expr, (int, float)) and not isinstance(expr, bool):
            expr = repr(float(expr))
        if isinstance(expr, str):
            expr = parse(expr, ("t", "s"))
        n = len(scale)
        jj, ii = np.tril_indices(n)
        vals = np.zeros((n, n))
        vals[jj, ii] = np.broadcast_to(expr(t=scale.points[jj], s=scale.points[ii]), jj.shape)
        return cls(scale, vals, expr, check)

    @classmethod
    def from_function(cls, scale: TimeScale, fn: Callable, check: bool = True) -> "KernelMap":
        n = len(scale)
        jj, ii = np.tril_indices(n)
        vals = np.zeros((n, n))
        vals[jj, ii] = np.broadcast_to(fn(scale.points[jj], scale.points[ii]), jj.shape)
        return cls(scale, vals, None, check)

    @classmethod
    def separable(cls, b: GridFunction, check: bool = True) -> "KernelMap":
        """k(t, s) = b(s): constant in its first argument."""
        n = len(b.scale)
        vals = np.tril(np.broadcast_to(b.values[None, :], (n, n)))
        return cls(b.scale, vals, None, check)

    def __call__(self, t: float, s: float) -> float:
        j, i = self.scale.index(t), self.scale.index(s)
        if i > j:
            raise ValueError("kernel is only sampled for s <= t")
        return float(self.values[j, i])

    @property
    def text(self) -> str:
        return self.expr.text if self.expr is not None else "<sampled>"

    def __repr__(self):
        return f"KernelMap({self.text!r}, {self.scale!r})"


def _as_map(m, name) -> Optional[ScalarMap]:
    if m is None or isinstance(m, ScalarMap):
        return m
    return ScalarMap(m, name)


def _as_grid(v, scale, name) -> Optional[GridFunction]:
    if v is None or isinstance(v, GridFunction):
        return v
    if isinstance(v, (int, float)):
        return GridFunction.constant(scale, v)
    if isinstance(v, (str, Expr)):
        return sample(v, scale)
    return GridFunction(scale, np.asarray(v, dtype=float))


@dataclass(eq=False)
class ProblemInstance:
    """Complete input of one bound: scale, coefficients, nonlinearities."""

    scale: TimeScale
    theorem: str
    a: GridFunction
    f: GridFunction
    Phi: ScalarMap
    W: ScalarMap
    kernel: Optional[KernelMap] = None
    h: Optional[GridFunction] = None
    b: Optional[GridFunction] = None
    g: Optional[ScalarMap] = None
    x0: float = 1.0
    delta0: float = 1.0
    check_certificates: bool = True
    certificates: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.theorem = str(self.theorem).upper()
        if self.theorem not in THEOREMS:
            raise InvalidInstance(f"unknown theorem {self.theorem!r}; expected one of {THEOREMS}")
        self.validate()

    @classmethod
    def build(cls, scale: TimeScale, theorem: str, *, a, f, Phi, W, k=None, h=None, b=None,
              g=None, x0: float = 1.0, delta0: float = 1.0, check_certificates: bool = True):
        """Convenience constructor accepting expression strings and constants."""
        kernel = k if (k is None or isinstance(k, KernelMap)) else KernelMap.from_expr(scale, k)
        return cls(scale, theorem, _as_grid(a, scale, "a"), _as_grid(f, scale, "f"),
                   _as_map(Phi, "Phi"), _as_map(W, "W"), kernel, _as_grid(h, scale, "h"),
                   _as_grid(b, scale, "b"), _as_map(g, "g"), float(x0), float(delta0),
                   check_certificates)

    @property
    def n(self) -> int:
        return len(self.scale)

    @property
    def uses_g(self) -> bool:
        return self.theorem in ("THM3", "THM4")

    @property
    def separable(self) -> bool:
        return self.theorem in ("THM2", "THM4")

    def validate(self):
        present = {name for name in ("kernel", "h", "b", "g") if getattr(self, name) is not None}
        need = _REQUIRED[self.theorem]
        if present != need:
            missing, extra = sorted(need - present), sorted(present - need)
            raise InvalidInstance(f"{self.theorem} needs exactly {sorted(need)}; missing {missing}, unexpected {extra}")
        for name in ("a", "f", "h", "b", "kernel"):
            obj = getattr(self, name)
            if obj is not None and obj.scale != self.scale:
                raise ScaleMismatch(f"{name} lives on a different time scale")
        a = self.a.values
        if np.any(a < MIN_A):
            raise InvalidInstance("a(t) must be positive (values below 1e-300 are rejected)")
        if np.any(np.diff(a) < -1e-12 * np.abs(a[1:])):
            raise InvalidInstance("a(t) must be nondecreasing")
        for name in ("f", "h", "b"):
            obj = getattr(self, name)
            if obj is not None and np.any(obj.values < 0):
                raise InvalidInstance(f"{name}(t) must be nonnegative")
        if self.b is not None and not np.any(self.b.values[: self.n - 2] > 0):
            raise InvalidInstance("b(t) is identically zero on T^kappa^2")
        if not (self.x0 > 0 and self.delta0 > 0):
            raise InvalidInstance("x0 and delta0 must be positive")
        if self.check_certificates:
            self._check_certificates()

    def sample_domain(self) -> float:
        return 10.0 * max(1.0, float(np.max(self.a.values)), abs(self.scale.b), abs(self.scale.a))

    def _check_certificates(self):
        hi = self.sample_domain()
        checks = [("Phi", self.Phi, PHI_PROPS), ("W", self.W, W_PROPS)]
        if self.g is not None:
            checks.append(("g", self.g, ("classS",)))
        for label, m, props in checks:
            certs = check_properties(m, hi, CERT_SAMPLES, CERT_SEED, props)
            for prop, cert in certs.items():
                self.certificates[f"{label}.{prop}"] = cert
                if not cert.passed:
                    raise HypothesisFailed(f"{label}={m.text!r} fails {cert}")

    def psi(self) -> Any:
        return psi_transform(self.Phi, self.W, self.x0)

    def G(self) -> Any:
        if self.g is None:
            raise InvalidInstance(f"{self.theorem} has no g")
        return g_transform(self.g, self.delta0)


# -- ingredients ---------------------------------------------------------------

def compute_p(scale: TimeScale, f: GridFunction) -> GridFunction:
    """p(t) = 1 + int_a^t f(s) e_f(t, sigma(s)) Delta s, summed directly."""
    if f.scale != scale:
        raise ScaleMismatch("f lives on a different time scale")
    mu = scale.graininess
    fv = f.values
    factors = 1.0 + mu * fv
    n = len(scale)
    p = np.ones(n)
    for j in range(1, n):
        # tail[i] = prod_{m=i}^{j-1} factors[m]; e_f(t_j, sigma(t_i)) = tail[i+1]
        tail = np.empty(j + 1)
        tail[j] = 1.0
        tail[:j] = np.cumprod(factors[:j][::-1])[::-1]
        p[j] = 1.0 + float(np.dot(mu[:j] * fv[:j], tail[1:]))
    return GridFunction(scale, p)


def _q_values(scale: TimeScale, f: GridFunction, g: ScalarMap, delta0: float):
    G = g_transform(g, delta0)
    base = G(1.0)
    F = prefix_integral(scale, f.values)
    q = np.full(len(scale), np.nan)
    ok = np.zeros(len(scale), dtype=bool)
    for j, Fj in enumerate(F):
        try:
            q[j] = G.inverse(base + Fj)
            ok[j] = True
        except DomainExceeded:
            break
    return q, ok


def compute_q(scale: TimeScale, f: GridFunction, g: ScalarMap, delta0: float = 1.0) -> GridFunction:
    """q(t) = G^-1(G(1) + int_a^t f). Raises DomainExceeded if any point leaves Dom(G^-1)."""
    g = _as_map(g, "g")
    q, ok = _q_values(scale, f, g, delta0)
    if not ok.all():
        t = scale.points[np.argmin(ok)]
        raise DomainExceeded(f"G(1) + int f leaves Dom(G^-1) at t={t!r}")
    return GridFunction(scale, q)


@dataclass
class _Parts:
    mult: np.ndarray          # p or q
    lead: np.ndarray          # a or max(a, 1)
    weight: np.ndarray        # f or f*h (outer integrand weight)
    kmat: np.ndarray          # k(t_j, t_i) or b(t_i), lower triangle
    q_ok: np.ndarray


def _parts(inst: ProblemInstance) -> _Parts:
    n = inst.n
    if inst.uses_g:
        mult, q_ok = _q_values(inst.scale, inst.f, inst.g, inst.delta0)
        lead = np.maximum(inst.a.values, 1.0)
    else:
        mult = compute_p(inst.scale, inst.f).values
        q_ok = np.ones(n, dtype=bool)
        lead = inst.a.values
    if inst.separable:
        weight = inst.f.values * inst.h.values
        kmat = np.tril(np.broadcast_to(inst.b.values[None, :], (n, n)))
    else:
        weight = inst.f.values
        kmat = inst.kernel.values
    return _Parts(mult, lead, weight, kmat, q_ok)


def _constant(inst: ProblemInstance, parts: _Parts) -> float:
    n = inst.n
    if not parts.q_ok[: n - 2].all():
        raise DomainExceeded("q is undefined on part of [a, rho(b)); the constant cannot be formed")
    mu = inst.scale.graininess[: n - 2]
    row = parts.kmat[n - 2, : n - 2]
    arg = parts.mult[: n - 2] * parts.lead[: n - 2]
    c = float(np.dot(mu * row, inst.Phi(arg)))
    if not c > 0:
        raise NonpositiveZeta(f"integral constant is {c!r}; the kernel or b vanishes where it must not")
    return c


def _need(inst, theorems, what):
    if inst.theorem not in theorems:
        raise InvalidInstance(f"{what} is defined for {'/'.join(theorems)}, not {inst.theorem}")


def zeta(inst: ProblemInstance) -> float:
    """int_a^{rho(b)} k(rho(b), s) Phi(p(s) a(s)) Delta s."""
    _need(inst, ("THM1",), "zeta")
    return _constant(inst, _parts(inst))


def xi(inst: ProblemInstance) -> float:
    """int_a^{rho(b)} b(s) Phi(p(s) a(s)) Delta s."""
    _need(inst, ("THM2",), "xi")
    return _constant(inst, _parts(inst))


def zeta_bar(inst: ProblemInstance) -> float:
    """int_a^{rho(b)} k(rho(b), s) Phi(q(s) max{a(s), 1}) Delta s."""
    _need(inst, ("THM3",), "zeta_bar")
    return _constant(inst, _parts(inst))


def xi_bar(inst: ProblemInstance) -> float:
    """int_a^{rho(b)} b(s) Phi(q(s) max{a(s), 1}) Delta s."""
    _need(inst, ("THM4",), "xi_bar")
    return _constant(inst, _parts(inst))


CONSTANT_NAMES = {"THM1": "zeta", "THM2": "xi", "THM3": "zeta_bar", "THM4": "xi_bar"}


# -- reports -------------------------------------------------------------------

@dataclass
class BoundReport:
    theorem: str
    t: np.ndarray
    bound: np.ndarray                 # NaN where not in domain
    in_domain: np.ndarray
    condition: np.ndarray             # side condition evaluated at rho(t)
    multiplier: np.ndarray            # p or q
    leading: np.ndarray               # p*a or q*max(a, 1)
    constant: float
    constant_name: str
    psi_argument: np.ndarray          # Psi(const) + middle integral at rho(t)
    psi_supremum: float = math.inf
    q_in_domain: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def all_in_domain(self) -> bool:
        return bool(self.in_domain.all())

    def margins(self, u) -> np.ndarray:
        u = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
        return np.where(self.in_domain, self.bound - u, np.nan)

    def summary(self, u) -> dict:
        u = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
        m = self.margins(u)
        ok = self.in_domain
        if not ok.any():
            return {"worst_margin": math.nan, "tightness": math.nan, "points": 0}
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.bound[ok] > 0, u[ok] / self.bound[ok], np.nan)
        return {"worst_margin": float(np.min(m[ok])), "tightness": float(np.nanmax(ratio)),
                "points": int(ok.sum())}

    def rows(self, u=None):
        """(t, u, bound, margin, in_domain) tuples for CSV output."""
        uv = None if u is None else (u.values if isinstance(u, GridFunction) else np.asarray(u, float))
        margin = self.margins(uv) if uv is not None else np.full(self.t.size, np.nan)
        for j in range(self.t.size):
            yield (float(self.t[j]), None if uv is None else float(uv[j]),
                   float(self.bound[j]) if self.in_domain[j] else None,
                   float(margin[j]) if uv is not None and self.in_domain[j] else None,
                   bool(self.in_domain[j]))


def _evaluate(inst: ProblemInstance) -> BoundReport:
    n = inst.n
    ts = inst.scale
    mu = ts.graininess
    parts = _parts(inst)
    c = _constant(inst, parts)
    psi = inst.psi()
    base = psi(c)

    Fw = prefix_integral(ts, parts.weight)
    inner = np.zeros(n)
    ok_q = parts.q_ok
    # Phi(q) is only available where q is; later points are out of domain anyway
    mult_safe = np.where(ok_q, parts.mult, 1.0)
    inner[:] = mu * inst.Phi(mult_safe) * inst.Phi(Fw)
    inner[~ok_q] = np.nan
    strict = np.tril(parts.kmat, k=-1)
    with np.errstate(invalid="ignore"):
        middle = strict @ np.nan_to_num(inner, nan=0.0)
    first_bad_q = int(np.argmin(ok_q)) if not ok_q.all() else n
    middle[first_bad_q + 1:] = np.nan

    # R_j = Psi^-1(Psi(c) + M_j) for j = 0..n-2
    R = np.full(n, np.nan)
    r_ok = np.zeros(n, dtype=bool)
    target = base + middle
    sup = math.inf
    for j in range(n - 1):
        if not np.isfinite(target[j]):
            continue
        try:
            R[j] = psi.inverse(target[j])
            r_ok[j] = True
        except DomainExceeded as exc:
            if exc.supremum is not None:
                sup = min(sup, exc.supremum)

    W_R = np.full(n, np.nan)
    if r_ok.any():
        W_R[r_ok] = inst.W(R[r_ok])
    terms = mu * parts.weight * W_R
    outer = np.zeros(n)
    np.cumsum(terms[:-1], out=outer[1:])

    # in_domain[m] needs every R_j with j < m and q on [a, t_m]
    prefix_ok = np.concatenate([[True], np.logical_and.accumulate(r_ok[:-1])])
    in_domain = prefix_ok & np.logical_and.accumulate(ok_q)
    lead = np.where(ok_q, parts.mult * parts.lead, np.nan)
    bound = np.where(in_domain, np.where(ok_q, parts.mult, np.nan) * (parts.lead + outer), np.nan)

    rho_idx = np.maximum(np.arange(n) - 1, 0)
    condition = r_ok[rho_idx] & np.logical_and.accumulate(ok_q)
    return BoundReport(
        theorem=inst.theorem, t=ts.points.copy(), bound=bound, in_domain=in_domain,
        condition=condition, multiplier=parts.mult, leading=lead, constant=c,
        constant_name=CONSTANT_NAMES[inst.theorem], psi_argument=target[rho_idx],
        psi_supremum=sup, q_in_domain=ok_q if inst.uses_g else None,
        extra={"psi_constant": base, "inner_integral": middle, "R": R},
    )


def bound_thm1(inst: ProblemInstance) -> BoundReport:
    """u <= p a + p int_a^t f(s) W[Psi^-1(Psi(zeta) + int_a^s k(s,.) Phi(p) Phi(int f))] Delta s."""
    _need(inst, ("THM1",), "bound_thm1")
    return _evaluate(inst)


def bound_thm2(inst: ProblemInstance) -> BoundReport:
    _need(inst, ("THM2",), "bound_thm2")
    return _evaluate(inst)


def bound_thm3(inst: ProblemInstance) -> BoundReport:
    _need(inst, ("THM3",), "bound_thm3")
    return _evaluate(inst)


def bound_thm4(inst: ProblemInstance) -> BoundReport:
    _need(inst, ("THM4",), "bound_thm4")
    return _evaluate(inst)


def compute_bound(inst: ProblemInstance) -> BoundReport:
    """Dispatch on ``inst.theorem``."""
    return _evaluate(inst)


# -- closed forms on Z and hZ ----------------------------------------------------
#
# Written with explicit index loops over the sums as they appear for T = Z and
# T = hZ, sharing nothing with the generic engine except Psi/G and the sampled
# coefficient values. Used as oracles.

def _grid_step(ts: TimeScale, kinds) -> float:
    if ts.generator_tag not in kinds:
        raise WrongScaleKind(f"needs a {' or '.join(kinds)} scale, got {ts.generator_tag}")
    if ts.generator_tag == "integer":
        return 1.0
    return float(ts.spec["h"])


def bound_corollary_Z(inst: ProblemInstance) -> BoundReport:
    """THM1 on T = Z written as plain sums over integer ranges."""
    _need(inst, ("THM1",), "bound_corollary_Z")
    _grid_step(inst.scale, ("integer",))
    ts = inst.scale
    n = len(ts)
    a0 = int(ts.a)
    fv = [float(v) for v in inst.f.values]
    av = [float(v) for v in inst.a.values]
    K = inst.kernel.values
    Phi, W = inst.Phi, inst.W

    def f(s):
        return fv[s - a0]

    def k(t, s):
        return float(K[t - a0, s - a0])

    def e_f(t, s):
        out = 1.0
        for r in range(s, t):
            out *= 1.0 + f(r)
        return out

    T = list(range(a0, a0 + n))
    b = T[-1]
    p = {t: 1.0 + sum(f(s) * e_f(t, s + 1) for s in range(a0, t)) for t in T}
    zeta_c = sum(k(b - 1, s) * Phi(p[s] * av[s - a0]) for s in range(a0, b - 1))
    if not zeta_c > 0:
        raise NonpositiveZeta(f"zeta = {zeta_c!r}")
    psi = inst.psi()
    base = psi(zeta_c)

    def fsum(tau):
        return sum(f(theta) for theta in range(a0, tau))

    R = {}
    for s in range(a0, b):
        arg = base + sum(k(s, tau) * Phi(p[tau]) * Phi(fsum(tau)) for tau in range(a0, s))
        try:
            R[s] = psi.inverse(arg)
        except DomainExceeded:
            R[s] = None
    bound, ok = [], []
    for t in T:
        needed = [R[s] for s in range(a0, t)]
        if any(r is None for r in needed):
            bound.append(math.nan)
            ok.append(False)
            continue
        tail = sum(f(s) * W(R[s]) for s in range(a0, t))
        bound.append(p[t] * (av[t - a0] + tail))
        ok.append(True)
    return _oracle_report(inst, bound, ok, zeta_c, [p[t] for t in T])


def bound_corollary_hZ(inst: ProblemInstance) -> BoundReport:
    """THM3 on T = hZ with step-h sums; an integer scale is hZ with h = 1."""
    _need(inst, ("THM3",), "bound_corollary_hZ")
    h = _grid_step(inst.scale, ("hgrid", "integer"))
    n = inst.n
    fv = [float(v) for v in inst.f.values]
    am = [max(float(v), 1.0) for v in inst.a.values]
    K = inst.kernel.values
    Phi, W = inst.Phi, inst.W
    G = inst.G()
    psi = inst.psi()
    G1 = G(1.0)

    # index k stands for the point a + k*h
    def fh_sum(upto):
        return sum(fv[i] * h for i in range(upto))

    q = []
    for j in range(n):
        try:
            q.append(G.inverse(G1 + fh_sum(j)))
        except DomainExceeded:
            q.append(None)
    last = n - 1
    if any(v is None for v in q[: last - 1]):
        raise DomainExceeded("q undefined before rho(b)")
    zbar = sum(float(K[last - 1, s]) * Phi(q[s] * am[s]) * h for s in range(0, last - 1))
    if not zbar > 0:
        raise NonpositiveZeta(f"zeta_bar = {zbar!r}")
    base = psi(zbar)
    R = {}
    for s in range(0, last):
        if any(v is None for v in q[: s + 1]):
            R[s] = None
            continue
        arg = base + sum(float(K[s, tau]) * Phi(q[tau]) * Phi(fh_sum(tau)) * h for tau in range(0, s))
        try:
            R[s] = psi.inverse(arg)
        except DomainExceeded:
            R[s] = None
    bound, ok = [], []
    for t in range(n):
        if q[t] is None or any(R[s] is None for s in range(0, t)):
            bound.append(math.nan)
            ok.append(False)
            continue
        tail = sum(fv[s] * W(R[s]) * h for s in range(0, t))
        bound.append(q[t] * (am[t] + tail))
        ok.append(True)
    mult = [math.nan if v is None else v for v in q]
    return _oracle_report(inst, bound, ok, zbar, mult)


def _oracle_report(inst, bound, ok, const, mult) -> BoundReport:
    ok = np.array(ok, dtype=bool)
    n = inst.n
    rho_idx = np.maximum(np.arange(n) - 1, 0)
    return BoundReport(
        theorem=inst.theorem, t=inst.scale.points.copy(), bound=np.array(bound, dtype=float),
        in_domain=ok, condition=ok.copy(), multiplier=np.array(mult, dtype=float),
        leading=np.full(n, np.nan), constant=float(const),
        constant_name=CONSTANT_NAMES[inst.theorem], psi_argument=np.full(n, np.nan)[rho_idx],
    )


# -- comparison lemma -------------------------------------------------------------

@dataclass
class LemmaReport:
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    def holds(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.lhs <= self.rhs + tol))


def lemma1_check(scale: TimeScale, r: GridFunction, g, x0: float = 1.0) -> LemmaReport:
    """G(r(t)) versus G(r(a)) + int_a^t r^Delta / g(r) at every point."""
    g = _as_map(g, "g")
    rv = r.values
    if r.scale != scale:
        raise ScaleMismatch("r lives on a different time scale")
    if np.any(rv <= 0):
        raise NonmonotoneR("r must be positive")
    if np.any(np.diff(rv) < 0):
        raise NonmonotoneR("r must be nondecreasing (r^Delta >= 0)")
    hi = 10.0 * max(1.0, float(rv.max()))
    for prop, cert in check_properties(g, hi, CERT_SAMPLES, CERT_SEED, ("nondecreasing", "positive")).items():
        if not cert.passed:
            raise HypothesisFailed(f"g={g.text!r} fails {cert}")
    G = g_transform(g, x0)
    lhs = np.array([G(v) for v in rv])
    rdelta = np.diff(rv) / scale.graininess[:-1]
    integrand = np.append(rdelta / g(rv[:-1]), 0.0)
    rhs = lhs[0] + prefix_integral(scale, integrand)
    return LemmaReport(scale.points.copy(), lhs, rhs)
