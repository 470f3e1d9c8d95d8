"""Monotone integral transforms and their inverses.

Both Bihari-type transforms have the form

    T(x) = integral from base to x of ds / rate(s),    x > 0,

with ``rate`` positive and nondecreasing: ``rate = Phi o W`` for Psi and
``rate = g`` for G. T is then increasing and concave, so Newton's method
started left of the root never overshoots. Ranges may be bounded above
(Bihari blow-up); targets past the numerically detected supremum raise
:class:`DomainExceeded`, which is exactly the ``Dom(T^-1)`` side condition
of the bounds.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import Legendre, leggauss

from .errors import DomainExceeded, EvalFault, IntegrandFault, NonpositiveInput, Overflow



def _lobatto(n: int):
    """Gauss-Lobatto nodes and weights on [-1, 1] (endpoints included)."""
    p = Legendre.basis(n - 1)
    inner = np.sort(p.deriv().roots().real)
    x = np.concatenate([[-1.0], inner, [1.0]])
    w = 2.0 / (n * (n - 1) * p(x) ** 2)
    return x, w


# coarse rule samples the panel ends, so a kink hiding between an end and
# the outermost Gauss node still shows up as a disagreement
_X_LO, _W_LO = _lobatto(12)
_X_HI, _W_HI = leggauss(20)
_NODES = np.concatenate([_X_LO, _X_HI])
_N_LO = _X_LO.size

QUAD_RTOL = 1e-13
MAX_DEPTH = 60
X_CEILING = 1e300
X_FLOOR = 1e-300


def integrate(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              rtol: float = QUAD_RTOL, max_depth: int = MAX_DEPTH) -> float:
    """Adaptive Gauss-Legendre quadrature of a vectorised integrand.

    Panels are bisected until a 12-point Lobatto and a 20-point Gauss rule agree to ``rtol``
    relative. On (0, inf) the integral is taken in v = log(s), which makes
    power-law integrands smooth over wide ranges without pre-splitting the
    interval (pre-set panel edges can hide a kink sitting just inside one).
    """
    if lo == hi:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    if lo > 0:
        def g(v):
            s = np.exp(v)
            return np.asarray(fn(s), dtype=float) * s
        a, b = np.array([math.log(lo)]), np.array([math.log(hi)])
    else:
        g = fn
        a, b = np.array([lo]), np.array([hi])
    pieces = []
    depth = 0
    while a.size:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        y = np.asarray(g(x.ravel()), dtype=float).reshape(x.shape)
        coarse = half * (y[:, :_N_LO] @ _W_LO)
        fine = half * (y[:, _N_LO:] @ _W_HI)
        done = np.abs(fine - coarse) <= np.maximum(rtol * np.abs(fine), 1e-300)
        if depth >= max_depth:
            done[:] = True
        pieces.extend(fine[done].tolist())
        a, b, mid = a[~done], b[~done], mid[~done]
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        depth += 1
    return sign * math.fsum(pieces)


class MonotoneTransform:
    """T(x) = int_base^x ds / rate(s) with inversion and range detection."""

    def __init__(self, rate: Callable, base: float, name: str = "T",
                 stall_doublings: int = 8, stall_tol: float = 1e-13,
                 max_iter: int = 200):
        if not base > 0:
            raise NonpositiveInput(f"{name} base point must be positive, got {base!r}")
        self.rate = rate
        self.base = float(base)
        self.name = name
        self.stall_doublings = int(stall_doublings)
        self.stall_tol = float(stall_tol)
        self.max_iter = int(max_iter)
        self._ladder = {0: 0.0}

    def __repr__(self):
        return f"MonotoneTransform({self.name}, base={self.base!r})"

    def integrand(self, s):
        try:
            r = np.asarray(self.rate(s), dtype=float)
        except EvalFault as exc:
            if exc.overflow:
                raise Overflow(f"{self.name} integrand overflows: {exc}") from None
            raise IntegrandFault(f"{self.name} integrand: {exc}") from None
        if np.any(~(r > 0)):
            bad = np.ravel(np.asarray(s, dtype=float))[np.argmax(np.ravel(~(r > 0)))]
            raise IntegrandFault(f"{self.name} integrand denominator is not positive at s={bad!r}")
        return 1.0 / r

    def __call__(self, x: float) -> float:
        x = float(x)
        if not x > 0:
            raise NonpositiveInput(f"{self.name}({x!r}) is undefined; argument must be positive")
        return integrate(self.integrand, self.base, x)

    value = __call__

    def _rung(self, k: int) -> float:
        """T(base * 2**k), built one doubling at a time and cached."""
        if k in self._ladder:
            return self._ladder[k]
        step = 1 if k > 0 else -1
        j = k - step
        prev = self._rung(j)
        x_prev, x_k = self.base * 2.0 ** j, self.base * 2.0 ** k
        val = prev + integrate(self.integrand, x_prev, x_k)
        self._ladder[k] = val
        return val

    def supremum(self) -> float:
        """Numerical supremum of the range (inf if none is detected)."""
        try:
            self.inverse(math.inf)
        except DomainExceeded as exc:
            return exc.supremum
        except Overflow:
            pass
        return math.inf

    def inverse(self, y: float) -> float:
        y = float(y)
        if math.isnan(y):
            raise ValueError("cannot invert NaN")
        if y == 0.0:
            return self.base
        lo, hi, t_lo = self._bracket(y)
        return self._newton(y, lo, hi, t_lo)

    def _bracket(self, y: float):
        k = 0
        t_k = 0.0
        stalls = 0
        step = 1 if y > 0 else -1
        while True:
            t_next = self._rung(k + step)
            if (step > 0 and t_next >= y) or (step < 0 and t_next <= y):
                if step > 0:
                    return self.base * 2.0 ** k, self.base * 2.0 ** (k + 1), t_k
                return self.base * 2.0 ** (k - 1), self.base * 2.0 ** k, t_next
            growth = abs(t_next - t_k)
            thresh = self.stall_tol * max(1.0, abs(y)) if math.isfinite(y) else self.stall_tol
            stalls = stalls + 1 if growth < thresh else 0
            x_next = self.base * 2.0 ** (k + 2 * step)
            if stalls < self.stall_doublings and (x_next > X_CEILING or x_next < X_FLOOR):
                # still growing at the edge of floating range: unbounded as far as we can tell
                raise Overflow(f"{self.name}^-1({y!r}) lies outside the floating-point range")
            if stalls >= self.stall_doublings:
                side = "above the supremum" if step > 0 else "below the infimum"
                raise DomainExceeded(
                    f"{self.name}^-1({y!r}): target lies {side} of the range (~{t_next!r})",
                    target=y, supremum=t_next if step > 0 else None,
                )
            k += step
            t_k = t_next

    def _newton(self, y, lo, hi, t_lo):
        x, tx = lo, t_lo
        a, b = lo, hi
        for _ in range(self.max_iter):
            r = float(1.0 / self.integrand(x))
            x_new = x + (y - tx) * r
            if not (a <= x_new <= b):
                x_new = 0.5 * (a + b)
            t_new = tx + integrate(self.integrand, x, x_new)
            if t_new <= y:
                a = x_new
            else:
                b = x_new
            converged = abs(x_new - x) <= 1e-15 * abs(x_new) or b - a <= 1e-15 * b
            x, tx = x_new, t_new
            if converged:
                break
        return x


def compose(Phi, W) -> Callable:
    """s -> Phi(W(s)), the rate of Psi."""
    def rate(s):
        return Phi(W(s))
    rate.__name__ = f"Phi∘W[{getattr(Phi, 'text', Phi)}, {getattr(W, 'text', W)}]"
    return rate


_CACHE: dict = {}


def psi_transform(Phi, W, x0: float = 1.0, **kw) -> MonotoneTransform:
    """Psi(x) = int_{x0}^x ds / Phi(W(s)); cached per (Phi, W, x0)."""
    key = ("psi", Phi, W, float(x0), tuple(sorted(kw.items())))
    if key not in _CACHE:
        _CACHE[key] = MonotoneTransform(compose(Phi, W), x0, name="Psi", **kw)
    return _CACHE[key]


def g_transform(g, delta0: float = 1.0, **kw) -> MonotoneTransform:
    """G(x) = int_{delta0}^x ds / g(s); cached per (g, delta0)."""
    key = ("G", g, float(delta0), tuple(sorted(kw.items())))
    if key not in _CACHE:
        _CACHE[key] = MonotoneTransform(g, delta0, name="G", **kw)
    return _CACHE[key]


def psi(PhiW: Callable, x: float, x0: float) -> float:
    return MonotoneTransform(PhiW, x0, name="Psi")(x)


def psi_inverse(PhiW: Callable, y: float, x0: float) -> float:
    return MonotoneTransform(PhiW, x0, name="Psi").inverse(y)


def G_of(g: Callable, x: float, delta0: float) -> float:
    return g_transform(g, delta0)(x)


def G_inverse(g: Callable, y: float, delta0: float) -> float:
    return g_transform(g, delta0).inverse(y)
