"""
Finite time scales
==================

Jumps, graininess, delta integrals and the time-scale exponential on the
point sets the library ships with.
"""

import math

import numpy as np

from tsgronwall.timescale import (
    GridFunction,
    delta_derivative_array,
    delta_integral,
    hgrid,
    integer,
    qgeometric,
    ts_exponential,
    uniform,
)

# a scale is a strictly increasing point set; sigma jumps forward, mu is the gap
ts = qgeometric(2.0, 1.0, 6)
print(ts.points)
print("sigma(4) =", ts.sigma(4.0), " mu(4) =", ts.mu(4.0), " rho(1) =", ts.rho(1.0))

# the last point jumps to itself
print("sigma(b) =", ts.sigma(ts.b), " mu(b) =", ts.mu(ts.b))

# integrals are sums of mu * f over [from, to)
z = integer(0, 4)
ident = GridFunction(z, z.points)
print("sum_{t<4} t =", delta_integral(ident, 0, 4))

# forward differences invert the integral
square = GridFunction(z, z.points ** 2)
print("delta derivative of t^2 on Z:", delta_derivative_array(square))   # 2t + 1

# the exponential is a product of (1 + mu f)
one = GridFunction.constant(z, 1.0)
print("e_1(4, 0) on Z =", ts_exponential(one, 4, 0))

# on a fine uniform grid it approaches exp
for n in (10, 100, 1000):
    u = uniform(0, 1, n)
    val = ts_exponential(GridFunction.constant(u, 1.0), 1, 0)
    print(f"n={n:5d}  e_1(1,0)={val:.6f}  |error|={abs(val - math.e):.2e}  2/n={2 / n:.0e}")

# hZ sits between the two
h = hgrid(0, 1, 0.25)
print("e_1(1,0) on 0.25Z =", ts_exponential(GridFunction.constant(h, 1.0), 1, 0), "=", 1.25 ** 4)
print("same answer from numpy:", np.prod(1 + h.graininess[:-1]))
