"""Initial value problem u^Delta = F(t, u, int_a^t K(t, u(s)) Delta s) and its a-priori estimate.

On a finite time scale the integral equation is a recursion,

    u(sigma(t)) = u(t) + mu(t) * F(t, u(t), V(t)),
    V(t) = sum over tau < t of mu(tau) * K(t, u(tau)),

so the solver below is exact up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundReport, ProblemInstance, compute_bound
from .errors import EnvelopeViolated, EvalFault, InvalidInstance, Overflow
from .expr import Expr, ScalarMap, parse
from .timescale import GridFunction, TimeScale

OVERFLOW = 1e150
ENVELOPE_RTOL = 1e-12


@dataclass(eq=False)
class IvpSpec:
    scale: TimeScale
    F: Expr
    K: Expr
    u_a: float
    h: GridFunction
    Phi: ScalarMap

    @classmethod
    def build(cls, scale: TimeScale, F: str | Expr, K: str | Expr, u_a: float, h, Phi) -> "IvpSpec":
        F = parse(F, ("t", "u", "v")) if isinstance(F, str) else F
        K = parse(K, ("t", "u")) if isinstance(K, str) else K
        if not isinstance(h, GridFunction):
            from .bounds import _as_grid
            h = _as_grid(h, scale, "h")
        Phi = Phi if isinstance(Phi, ScalarMap) else ScalarMap(Phi, "Phi")
        return cls(scale, F, K, float(u_a), h, Phi)

    def __post_init__(self):
        if self.F.variables != ("t", "u", "v"):
            raise InvalidInstance("F must be an expression in t, u, v")
        if self.K.variables != ("t", "u"):
            raise InvalidInstance("K must be an expression in t, u")
        if self.h.scale != self.scale:
            raise InvalidInstance("h lives on a different time scale")


def _memory(spec: IvpSpec, u: np.ndarray, j: int) -> float:
    """V(t_j) = sum_{i<j} mu_i K(t_j, u_i)."""
    if j == 0:
        return 0.0
    mu = spec.scale.graininess
    kv = spec.K(t=np.full(j, spec.scale.points[j]), u=u[:j])
    return float(np.dot(mu[:j], kv))


def solve_ivp(spec: IvpSpec) -> GridFunction:
    ts = spec.scale
    n = len(ts)
    mu = ts.graininess
    u = np.empty(n)
    u[0] = spec.u_a
    for j in range(n - 1):
        t = float(ts.points[j])
        try:
            v = _memory(spec, u, j)
            step = spec.F(t=t, u=u[j], v=v)
        except EvalFault as exc:
            if exc.overflow:
                raise Overflow(f"rate overflows at t={t!r}: {exc}") from None
            raise EvalFault(f"at t={t!r}: {exc}") from None
        u[j + 1] = u[j] + mu[j] * step
        if not abs(u[j + 1]) <= OVERFLOW:
            raise Overflow(f"|u| exceeds {OVERFLOW:g} at t={float(ts.points[j + 1])!r}")
    return GridFunction(ts, u)


def ivp_residual(spec: IvpSpec, u: GridFunction) -> np.ndarray:
    """u(t) - [u_a + int_a^t F(s, u(s), int_a^s K(s, u(tau)) Delta tau) Delta s]."""
    ts = spec.scale
    n = len(ts)
    uv = u.values
    mu = ts.graininess
    integrand = np.zeros(n)
    for j in range(n):
        V = sum(mu[i] * spec.K(t=ts.points[j], u=uv[i]) for i in range(j))
        integrand[j] = spec.F(t=ts.points[j], u=uv[j], v=V)
    rhs = spec.u_a + np.concatenate([[0.0], np.cumsum(mu[:-1] * integrand[:-1])])
    return uv - rhs


@dataclass
class EnvelopeCheck:
    passed: bool
    worst_K: float      # max of |K(t,u)| - h(t) Phi(|u|)
    worst_F: float      # max of |F(t,u,v)| - (|u| + |v|)
    message: str = ""


def check_envelope(spec: IvpSpec, u: GridFunction) -> EnvelopeCheck:
    """Check |K(t,u)| <= h(t) Phi(|u|) and |F(t,u,v)| <= |u| + |v| along the trajectory."""
    ts = spec.scale
    n = len(ts)
    uv = u.values
    mu = ts.graininess
    worst_k = -np.inf
    worst_f = -np.inf
    msg = ""
    passed = True
    for j in range(n):
        t = float(ts.points[j])
        if j > 0:
            kv = np.abs(spec.K(t=np.full(j, t), u=uv[:j]))
            env = spec.h.values[j] * spec.Phi(np.abs(uv[:j]))
            excess = kv - env
            tol = ENVELOPE_RTOL * np.maximum(1.0, env)
            worst_k = max(worst_k, float(np.max(excess)))
            if passed and np.any(excess > tol):
                i = int(np.argmax(excess - tol))
                passed = False
                msg = f"|K(t,u)| > h(t) Phi(|u|) at t={t!r}, u={float(uv[i])!r}"
        if j < n - 1:
            v = float(np.dot(mu[:j], spec.K(t=np.full(j, t), u=uv[:j]))) if j else 0.0
            fv = abs(float(spec.F(t=t, u=uv[j], v=v)))
            env = abs(uv[j]) + abs(v)
            worst_f = max(worst_f, fv - env)
            if passed and fv - env > ENVELOPE_RTOL * max(1.0, env):
                passed = False
                msg = f"|F(t,u,v)| > |u| + |v| at t={t!r}, u={float(uv[j])!r}, v={v!r}"
    return EnvelopeCheck(passed, float(worst_k), float(worst_f), msg)


def application_instance(spec: IvpSpec, x0: float = 1.0) -> ProblemInstance:
    """The separable-kernel problem with a = |u_a|, f = b = 1 and W = identity."""
    if spec.u_a == 0:
        raise InvalidInstance("u_a = 0 makes a(t) = |u_a| vanish; a must be positive")
    ts = spec.scale
    return ProblemInstance(
        ts, "THM2", GridFunction.constant(ts, abs(spec.u_a)), GridFunction.constant(ts, 1.0),
        spec.Phi, ScalarMap("x", "W"), h=spec.h, b=GridFunction.constant(ts, 1.0), x0=x0,
    )


def application_bound(spec: IvpSpec, x0: float = 1.0) -> BoundReport:
    """|u*(t)| <= p(t){|u_a| + int_a^t h(s) Psi^-1(Psi(xi) + ...) Delta s}."""
    return compute_bound(application_instance(spec, x0))


@dataclass
class ApplicationReport:
    t: np.ndarray
    u: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    in_domain: np.ndarray
    passed: bool
    residual: float     # max |ivp_residual|, absolute
    envelope: EnvelopeCheck
    report: Optional[BoundReport] = None

    def rows(self):
        for j in range(self.t.size):
            ok = bool(self.in_domain[j])
            yield (float(self.t[j]), float(self.u[j]), float(self.bound[j]) if ok else None,
                   float(self.margin[j]) if ok else None, ok)


def verify_application(spec: IvpSpec, x0: float = 1.0) -> ApplicationReport:
    """Solve, check the envelope hypotheses, and compare |u*| with the estimate."""
    u = solve_ivp(spec)
    env = check_envelope(spec, u)
    if not env.passed:
        raise EnvelopeViolated(env.message)
    res = ivp_residual(spec, u)
    rep = application_bound(spec, x0)
    absu = np.abs(u.values)
    margin = np.where(rep.in_domain, rep.bound - absu, np.nan)
    ok = rep.in_domain
    passed = bool(np.all(margin[ok] >= -1e-9 * np.abs(rep.bound[ok])))
    return ApplicationReport(u.scale.points.copy(), u.values.copy(), rep.bound, margin,
                             rep.in_domain, passed, float(np.max(np.abs(res))), env, rep)
