"""
Randomized sweeps and refinement studies
========================================

The sweep draws admissible instances from fixed function libraries, builds
the extremal function for each and checks domination. Same seeds, same
bytes. A refinement study shows the discrete quantities approaching their
continuous limits.
"""

import sys

from tsgronwall.harness import (
    CONVERGENCE_COLUMNS,
    SWEEP_COLUMNS,
    convergence_study,
    sweep,
    write_csv,
)

res = sweep(range(10))
write_csv(sys.stdout, SWEEP_COLUMNS, (r.as_tuple() for r in res.rows[:8]))
print(f"... checked={res.checked} violations={res.violations} overflow_skipped={res.skipped}\n")

# e_f(1, 0) with f = 1 + t against exp(3/2)
rows = convergence_study({"kind": "uniform", "a": 0, "b": 1, "n": 10}, [1, 2, 4, 8, 16, 32], "exp",
                         {"f": "1 + t"})
write_csv(sys.stdout, CONVERGENCE_COLUMNS, (r.as_tuple() for r in rows))
print()

# the kernel bound on refined grids
rows = convergence_study({"kind": "uniform", "a": 0, "b": 1, "n": 10}, [1, 2, 4, 8, 16], "bound",
                         {"a": "1", "f": "1", "Phi": "x", "W": "x", "k": "exp(-s)"}, "THM1")
write_csv(sys.stdout, CONVERGENCE_COLUMNS, (r.as_tuple() for r in rows))
