"""Gronwall-Bihari bounds on finite time scales."""

from .bounds import (
    THEOREMS,
    BoundReport,
    KernelMap,
    LemmaReport,
    ProblemInstance,
    bound_corollary_hZ,
    bound_corollary_Z,
    bound_thm1,
    bound_thm2,
    bound_thm3,
    bound_thm4,
    compute_bound,
    compute_p,
    compute_q,
    lemma1_check,
    xi,
    xi_bar,
    zeta,
    zeta_bar,
)
from .dynamics import IvpSpec, application_bound, check_envelope, solve_ivp, verify_application
from .errors import GronwallError
from .expr import Certificate, Expr, ScalarMap, check_properties, parse, sample
from .harness import (
    convergence_study,
    random_instance,
    synthesize_u_equality,
    sweep,
    verify_domination,
)
from .timescale import (
    GridFunction,
    TimeScale,
    build_timescale,
    delta_derivative,
    delta_integral,
    explicit,
    hgrid,
    hybrid,
    integer,
    qgeometric,
    refine,
    ts_exponential,
    uniform,
)
from .transforms import G_inverse, G_of, MonotoneTransform, psi, psi_inverse

__version__ = "0.1.0"
