"""
An integro-dynamic initial value problem
========================================

u^Delta(t) = F(t, u, int_a^t K(s, u(s)) Delta s), u(a) = u_a.

The solver steps forward exactly. Under the envelope conditions
|F(t, u, v)| <= h(t) Phi(|u|) + |v| and |K(t, u)| <= h(t) Phi(|u|), the
solution is bounded a priori by one of the kernel bounds.
"""

import numpy as np

from tsgronwall.dynamics import IvpSpec, verify_application
from tsgronwall.errors import EnvelopeViolated
from tsgronwall.timescale import integer, uniform

for ts in (uniform(0, 1, 100), integer(0, 5)):
    spec = IvpSpec.build(ts, "(u+v)/2", "u", 1.0, 1, "x")
    rep = verify_application(spec)
    print(f"{ts!r}: u(b)={rep.u[-1]:.6g} estimate={rep.bound[-1]:.6g} "
          f"residual={rep.residual:.1e} envelope={'PASS' if rep.envelope.passed else 'FAIL'}")
    assert np.all(np.abs(rep.u) <= rep.bound)

# breaking the envelope is caught before any estimate is claimed
try:
    verify_application(IvpSpec.build(integer(0, 4), "u*u", "u", 2.0, 1, "x"))
except EnvelopeViolated as exc:
    print("EnvelopeViolated:", exc)
