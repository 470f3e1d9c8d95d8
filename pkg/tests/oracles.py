"""Reference implementations used by the tests.

Plain Python loops over point lists and closed-form transforms. Nothing here
imports the package's calculus, quadrature or bound code.
"""

import math


def graininess(points):
    return [points[i + 1] - points[i] for i in range(len(points) - 1)] + [0.0]


def e_prod(points, f, j, i):
    """e_f(t_j, t_i) for i <= j by the product formula."""
    mu = graininess(points)
    out = 1.0
    for m in range(i, j):
        out *= 1.0 + mu[m] * f[m]
    return out


def p_direct(points, f):
    """1 + sum_{s < t} mu(s) f(s) e_f(t, sigma(s)), term by term."""
    mu = graininess(points)
    n = len(points)
    return [1.0 + sum(mu[i] * f[i] * e_prod(points, f, j, i + 1) for i in range(j)) for j in range(n)]


def cumulative(points, vals):
    mu = graininess(points)
    out = [0.0]
    for i in range(len(points) - 1):
        out.append(out[-1] + mu[i] * vals[i])
    return out


# closed-form transforms: (Psi, Psi^-1, sup of range) for a given base point
def log_transform(x0):
    return (lambda x: math.log(x / x0)), (lambda y: x0 * math.exp(y)), math.inf


def reciprocal_transform(x0):
    """int_{x0}^x s^-2 ds = 1/x0 - 1/x, the transform of Phi = x, W = x^2."""
    def inv(y):
        if y >= 1.0 / x0:
            return None
        return 1.0 / (1.0 / x0 - y)
    return (lambda x: 1.0 / x0 - 1.0 / x), inv, 1.0 / x0


def sqrt_transform(x0):
    """int_{x0}^x s^-1/2 ds, the transform of rate sqrt(s)."""
    return (lambda x: 2.0 * (math.sqrt(x) - math.sqrt(x0))), \
        (lambda y: (math.sqrt(x0) + 0.5 * y) ** 2), math.inf


def linear_transform(d0):
    """int_{d0}^x ds = x - d0, the transform of g = 1."""
    return (lambda x: x - d0), (lambda y: y + d0), math.inf


def bound_oracle(points, theorem, a, f, Phi, W, Psi, Psi_inv, kernel=None, h=None, b=None,
                 G=None, G_inv=None):
    """The four conclusions evaluated literally with closed-form transforms.

    Returns a list with ``None`` where some needed Psi^-1 argument is outside
    the range.
    """
    n = len(points)
    mu = graininess(points)
    separable = theorem in ("THM2", "THM4")
    weight = [f[i] * h[i] for i in range(n)] if separable else list(f)

    def k(j, i):
        return b[i] if separable else kernel(points[j], points[i])

    if theorem in ("THM3", "THM4"):
        F = cumulative(points, f)
        mult = [G_inv(G(1.0) + F[j]) for j in range(n)]
        lead = [max(x, 1.0) for x in a]
    else:
        mult = p_direct(points, f)
        lead = list(a)
    rb = n - 2
    const = sum(mu[i] * k(rb, i) * Phi(mult[i] * lead[i]) for i in range(rb))
    Fw = cumulative(points, weight)
    out = []
    for m in range(n):
        total = lead[m]
        ok = True
        for s in range(m):
            middle = sum(mu[t] * k(s, t) * Phi(mult[t]) * Phi(Fw[t]) for t in range(s))
            R = Psi_inv(Psi(const) + middle)
            if R is None:
                ok = False
                break
            total += mu[s] * weight[s] * W(R)
        out.append(mult[m] * total if ok else None)
    return out


def equality_u(points, theorem, a, f, Phi, W, kernel=None, h=None, b=None, g=None):
    """Forward recursion for the equality case of the hypothesis inequality."""
    n = len(points)
    mu = graininess(points)
    separable = theorem in ("THM2", "THM4")
    lin = g if theorem in ("THM3", "THM4") else (lambda x: x)
    u = []
    for m in range(n):
        total = a[m]
        for s in range(m):
            inner = sum(mu[t] * (b[t] if separable else kernel(points[s], points[t])) * Phi(u[t])
                        for t in range(s))
            w = f[s] * h[s] if separable else f[s]
            total += mu[s] * (f[s] * lin(u[s]) + w * W(inner))
        u.append(total)
    return u
