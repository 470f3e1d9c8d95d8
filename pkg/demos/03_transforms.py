"""
Monotone transforms and blow-up
===============================

Psi(x) = int_{x0}^x ds / Phi(W(s)) and G(x) = int ds / g(s), computed by
adaptive quadrature and inverted by a safeguarded Newton search. When the
target lies beyond the range of the transform the bound stops existing, and
the library says so.
"""

import math

from tsgronwall.errors import DomainExceeded
from tsgronwall.expr import ScalarMap
from tsgronwall.transforms import g_transform, psi_transform

x = ScalarMap("x")

# Phi = W = id: Psi is a logarithm
T = psi_transform(x, x, 1.0)
for v in (0.5, 2.0, 100.0):
    print(f"Psi({v}) = {T(v):.15f}   log = {math.log(v):.15f}")
print("Psi^-1(1) =", T.inverse(1.0))

# W(x) = x^2: Psi(x) = 1/x0 - 1/x is bounded by 1/x0
T = psi_transform(x, ScalarMap("pow(x,2)"), 2.0)
print("\nsupremum of Psi:", T.supremum())
print("Psi^-1(0.49) =", T.inverse(0.49))
try:
    T.inverse(0.6)
except DomainExceeded as exc:
    print("DomainExceeded:", exc)

# a kinked W still round-trips
T = psi_transform(ScalarMap("sqrt(x)"), ScalarMap("min(x,1)"), 0.5)
for v in (0.3, 1.0, 7.0):
    print(f"round trip {v}: {T.inverse(T(v))!r}")

# G for g(x) = x/(1+x)
G = g_transform(ScalarMap("x/(1+x)"), 1.0)
print("\nG(3) =", G(3.0), " closed form:", 2.0 + math.log(3.0))
