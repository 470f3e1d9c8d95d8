"""
Bounds for the four inequality families
=======================================

Each family takes its own ingredients: a kernel k(t, s) or a product
h(t) b(s), with or without an extra nonlinearity g. The extremal function
meets the hypothesis with equality; the bound must still sit above it.
"""

from tsgronwall.bounds import ProblemInstance, compute_bound
from tsgronwall.harness import synthesize_u_equality, verify_domination
from tsgronwall.timescale import hgrid, integer, qgeometric, uniform

common = dict(a="1 + t/10", f="0.3", Phi="sqrt(x)", W="x/(1+x)")
cases = [
    ("THM1", integer(0, 8), dict(k="exp(-s)")),
    ("THM2", uniform(0, 2, 16), dict(h="1", b="1 + t")),
    ("THM3", hgrid(0, 2, 0.25), dict(k="1 + t - s", g="sqrt(x) + 1")),
    ("THM4", qgeometric(1.5, 1, 8), dict(h="0.5", b="1/t", g="x/(1+x)")),
]

for theorem, ts, extra in cases:
    inst = ProblemInstance.build(ts, theorem, **common, **extra)
    rep = verify_domination(inst, synthesize_u_equality(inst))
    print(f"{theorem} on {ts!r}: constant={rep.report.constant:.4g} "
          f"worst margin={rep.worst_margin:.3e} tightness={rep.tightness:.3f}")

# a bound can stop existing: with W = x^2 the transform range is bounded
inst = ProblemInstance.build(integer(0, 8), "THM1", a=1, f=1, Phi="x", W="pow(x,2)", k=1)
rep = compute_bound(inst)
print("\nblow-up example")
for t, b, ok in zip(rep.t, rep.bound, rep.in_domain):
    print(f"  t={t:.0f}  bound={b if ok else float('nan'):.6g}  in domain={ok}")
