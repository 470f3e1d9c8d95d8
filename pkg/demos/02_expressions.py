"""
Expressions and property certificates
=====================================

Nonlinearities are typed as text. Before a bound is computed the library
samples their structural hypotheses and keeps the evidence.
"""

import numpy as np

from tsgronwall.expr import ScalarMap, check_properties, parse, to_text

e = parse("x^2 + 3*x")
print(e.tree)
print(to_text(e.tree), "->", e(np.array([0.0, 1.0, 2.0])))

# -x^2 is (-x)^2 here
print("-x^2 at 3:", parse("-x^2")(3.0))

# domain errors are loud
try:
    parse("log(x - 1)")(0.5)
except Exception as exc:
    print(type(exc).__name__, exc)

# certificates: sampled evidence, with a witness when a property fails
for text in ("sqrt(x)", "x/(1+x)", "pow(x,2)"):
    certs = check_properties(ScalarMap(text), props=["nondec", "sub", "submul", "classS"])
    print(f"\n{text}")
    for cert in certs.values():
        print("   ", cert)
