import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsgronwall.bounds import (
    KernelMap,
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
from tsgronwall.errors import (
    DomainExceeded,
    HypothesisFailed,
    InvalidInstance,
    NonmonotoneR,
    ScaleMismatch,
    WrongScaleKind,
)
from tsgronwall.expr import ScalarMap
from tsgronwall.timescale import GridFunction, explicit, hgrid, integer, qgeometric, ts_exponential, uniform
from tsgronwall.transforms import MonotoneTransform, compose

import oracles

E = math.e


def thm1(ts, **kw):
    base = dict(a=1, f=1, Phi="x", W="x", k="1")
    base.update(kw)
    return ProblemInstance.build(ts, "THM1", **base)


# -- p and q -----------------------------------------------------------------------

def test_p_is_one_without_f():
    ts = qgeometric(1.5, 1, 6)
    assert np.all(compute_p(ts, GridFunction.constant(ts, 0.0)).values == 1)


def test_p_powers_of_two():
    ts = integer(0, 5)
    p = compute_p(ts, GridFunction.constant(ts, 1.0))
    assert p.values.tolist() == [1, 2, 4, 8, 16, 32]


@st.composite
def positive_scales(draw, max_points=20):
    n = draw(st.integers(3, max_points))
    gaps = draw(st.lists(st.floats(0.01, 2.0), min_size=n - 1, max_size=n - 1))
    pts = np.concatenate([[0.0], np.cumsum(gaps)])
    f = draw(st.lists(st.one_of(st.just(0.0), st.floats(0, 3)), min_size=n, max_size=n))
    return explicit(pts), np.array(f)


@settings(max_examples=60, deadline=None)
@given(positive_scales())
def test_p_matches_exponential_and_direct_sum(sf):
    ts, f = sf
    p = compute_p(ts, GridFunction(ts, f)).values
    direct = oracles.p_direct(ts.points.tolist(), f.tolist())
    np.testing.assert_allclose(p, direct, rtol=1e-12)
    expo = [ts_exponential(GridFunction(ts, f), t, ts.a) for t in ts.points]
    np.testing.assert_allclose(p, expo, rtol=1e-10)
    assert np.all(np.diff(p) >= -1e-12 * p[1:])   # flat stretches may wobble by an ulp


def test_q_trivial_without_f():
    ts = integer(0, 4)
    q = compute_q(ts, GridFunction.constant(ts, 0.0), ScalarMap("sqrt(x)"))
    np.testing.assert_allclose(q.values, 1.0, rtol=1e-12)


def test_q_for_identity_g_is_exp_not_e_f():
    ts = integer(0, 4)
    q = compute_q(ts, GridFunction.constant(ts, 1.0), ScalarMap("x"))
    assert q(2) == pytest.approx(7.389056098930650, rel=1e-10)
    np.testing.assert_allclose(q.values, np.exp(ts.points), rtol=1e-10)
    assert q(2) != compute_p(ts, GridFunction.constant(ts, 1.0))(2)


def test_q_independent_of_delta0():
    ts = uniform(0, 2, 15)
    f = GridFunction(ts, 0.5 + np.sin(ts.points) ** 2)
    g = ScalarMap("sqrt(x)+1")
    q1 = compute_q(ts, f, g, 0.5).values
    q2 = compute_q(ts, f, g, 2.0).values
    np.testing.assert_allclose(q1, q2, rtol=1e-9)


def test_q_constant_g():
    ts = hgrid(0, 2, 0.5)
    f = GridFunction(ts, [1, 2, 0, 3, 1])
    q = compute_q(ts, f, ScalarMap("1"), 3.0)
    np.testing.assert_allclose(q.values, 1 + np.array([0, 0.5, 1.5, 1.5, 3.0]), rtol=1e-12)


def test_q_domain_exceeded():
    # g = x^2: G(x) = 1/delta - 1/x is bounded above, so q stops existing
    ts = integer(0, 4)
    with pytest.raises(DomainExceeded):
        compute_q(ts, GridFunction.constant(ts, 1.0), ScalarMap("pow(x,2)"))


# -- constants -------------------------------------------------------------------------

def test_zeta_counting_measure():
    ts = integer(0, 5)
    assert zeta(thm1(ts, f=0)) == 4


@pytest.mark.parametrize("n, c", [(4, 1.0), (7, 2.5)])
def test_xi_direct_sum(n, c):
    ts = integer(0, n)
    inst = ProblemInstance.build(ts, "THM2", a=c, f=0, Phi="x", W="x", h=1, b=1)
    assert xi(inst) == pytest.approx(c * (n - 1), rel=1e-15)


def test_constants_need_matching_theorem():
    inst = thm1(integer(0, 4))
    with pytest.raises(InvalidInstance):
        xi(inst)
    with pytest.raises(InvalidInstance):
        zeta_bar(inst)
    with pytest.raises(InvalidInstance):
        bound_thm2(inst)


def test_zeta_bar_and_xi_bar():
    ts = integer(0, 3)
    i3 = ProblemInstance.build(ts, "THM3", a=1, f=1, Phi="x", W="x", k="1", g="x")
    assert zeta_bar(i3) == pytest.approx(1 + E, rel=1e-12)
    i4 = ProblemInstance.build(ts, "THM4", a=1, f=1, Phi="x", W="x", h=1, b=1, g="1")
    assert xi_bar(i4) == pytest.approx(3.0, rel=1e-12)


# -- kernels and instances ------------------------------------------------------------------

def test_zero_kernel_rejected():
    with pytest.raises(InvalidInstance):
        KernelMap.from_expr(integer(0, 4), "0")


def test_kernel_zero_off_the_relevant_block_rejected():
    # nonzero only in the last column, which lies outside T^kappa x T^kappa^2
    ts = integer(0, 3)
    with pytest.raises(InvalidInstance):
        KernelMap.from_function(ts, lambda t, s: (s >= 2).astype(float) * (1 + t))


def test_negative_kernel_rejected():
    with pytest.raises(InvalidInstance):
        KernelMap.from_expr(integer(0, 4), "s - 1")


def test_decreasing_first_argument_rejected():
    with pytest.raises(InvalidInstance):
        KernelMap.from_expr(integer(0, 4), "exp(-t)")


def test_kernel_delta1_sampled():
    k = KernelMap.from_expr(integer(0, 3), "t*t + s")
    assert k.delta1[1, 0] == 3     # k(2,0) - k(1,0)
    assert k(2, 1) == 5


@pytest.mark.parametrize("kw, match", [
    (dict(a=0), "positive"),
    (dict(a="5 - t"), "nondecreasing"),
    (dict(f="-1"), "nonnegative"),
    (dict(x0=0), "positive"),
])
def test_instance_invariants(kw, match):
    with pytest.raises(InvalidInstance, match=match):
        thm1(integer(0, 4), **kw)


def test_instance_field_set_per_theorem():
    ts = integer(0, 4)
    with pytest.raises(InvalidInstance):
        ProblemInstance.build(ts, "THM1", a=1, f=1, Phi="x", W="x", h=1, b=1)
    with pytest.raises(InvalidInstance):
        ProblemInstance.build(ts, "THM3", a=1, f=1, Phi="x", W="x", k="1")
    with pytest.raises(InvalidInstance):
        ProblemInstance.build(ts, "THM2", a=1, f=1, Phi="x", W="x", h=1, b=1, k="1")
    with pytest.raises(InvalidInstance):
        ProblemInstance.build(ts, "THM5", a=1, f=1, Phi="x", W="x", k="1")


def test_b_zero_on_kappa2_rejected():
    ts = integer(0, 4)
    with pytest.raises(InvalidInstance):
        ProblemInstance.build(ts, "THM2", a=1, f=1, Phi="x", W="x", h=1, b=[0, 0, 0, 1, 1])


def test_failed_certificates_block():
    with pytest.raises(HypothesisFailed):
        thm1(integer(0, 4), Phi="pow(x,2)")
    with pytest.raises(HypothesisFailed):
        thm1(integer(0, 4), W="1-x/100")
    with pytest.raises(HypothesisFailed):
        ProblemInstance.build(integer(0, 4), "THM3", a=1, f=1, Phi="x", W="x", k="1", g="pow(x,2)")


def test_scale_mismatch():
    ts = integer(0, 4)
    with pytest.raises(ScaleMismatch):
        ProblemInstance(ts, "THM1", GridFunction.constant(ts, 1), GridFunction.constant(integer(0, 5), 1),
                        ScalarMap("x"), ScalarMap("x"), kernel=KernelMap.from_expr(ts, "1"))


# -- pinned bounds ------------------------------------------------------------------------
#
# Phi = W = id and Psi = log: R(s) = const * exp(middle(s)); these closed forms
# were worked out by hand from the conclusions.

def test_thm1_pinned():
    rep = bound_thm1(thm1(integer(0, 3)))
    expected = [1.0, 8.0, 28.0, 56.0 + 24.0 * E ** 2]
    np.testing.assert_allclose(rep.bound, expected, rtol=1e-12)
    assert rep.constant == 3.0
    assert rep.constant_name == "zeta"


def test_thm3_pinned():
    inst = ProblemInstance.build(integer(0, 3), "THM3", a=1, f=1, Phi="x", W="x", k="1", g="x")
    rep = bound_thm3(inst)
    c = 1 + E
    expected = [1.0, E * (1 + c), E ** 2 * (1 + 2 * c), E ** 3 * (1 + 2 * c + c * E ** E)]
    np.testing.assert_allclose(rep.bound, expected, rtol=1e-10)


def test_thm4_constant_g_pinned():
    inst = ProblemInstance.build(integer(0, 3), "THM4", a=1, f=1, Phi="x", W="x", h=1, b=1, g="1")
    rep = bound_thm4(inst)
    np.testing.assert_allclose(rep.bound, [1.0, 8.0, 21.0, 28.0 + 12.0 * E ** 2], rtol=1e-10)


def test_no_f_gives_leading_term():
    ts = hgrid(0, 2, 0.25)
    a = "1 + t*t"
    rep = compute_bound(thm1(ts, a=a, f=0, k="1+t-s"))
    np.testing.assert_allclose(rep.bound, 1 + ts.points ** 2, rtol=1e-14)
    inst = ProblemInstance.build(ts, "THM3", a="0.5 + t", f=0, Phi="x", W="x", k="1", g="sqrt(x)")
    np.testing.assert_allclose(compute_bound(inst).bound, np.maximum(0.5 + ts.points, 1), rtol=1e-12)


def test_no_h_gives_leading_term():
    ts = integer(0, 5)
    inst = ProblemInstance.build(ts, "THM2", a="1+t", f="0.5", Phi="x", W="x", h=0, b=1)
    rep = compute_bound(inst)
    np.testing.assert_allclose(rep.bound, 1.5 ** ts.points * (1 + ts.points), rtol=1e-13)
    inst = ProblemInstance.build(ts, "THM4", a="0.5", f="0.5", Phi="x", W="x", h=0, b=1, g="x")
    np.testing.assert_allclose(compute_bound(inst).bound, np.exp(0.5 * ts.points), rtol=1e-10)


@pytest.mark.parametrize("ts", [integer(0, 6), qgeometric(1.4, 1, 7), uniform(0, 1, 12)])
def test_separable_matches_kernel_form(ts):
    b = "exp(-t) + 0.5"
    common = dict(a="1 + t/3", f="0.4", Phi="sqrt(x)", W="x/(1+x)")
    r2 = compute_bound(ProblemInstance.build(ts, "THM2", h=1, b=b, **common))
    r1 = compute_bound(ProblemInstance.build(ts, "THM1", k="exp(-s) + 0.5", **common))
    np.testing.assert_allclose(r2.bound, r1.bound, rtol=1e-12)
    r4 = compute_bound(ProblemInstance.build(ts, "THM4", h=1, b=b, g="sqrt(x)", **common))
    r3 = compute_bound(ProblemInstance.build(ts, "THM3", k="exp(-s) + 0.5", g="sqrt(x)", **common))
    np.testing.assert_allclose(r4.bound, r3.bound, rtol=1e-12)


# -- generic engine versus the literal closed-form oracle ----------------------------------

PAIRS = {
    ("x", "x"): oracles.log_transform,
    ("x", "pow(x,2)"): oracles.reciprocal_transform,
    ("sqrt(x)", "x"): oracles.sqrt_transform,
    ("x", "sqrt(x)"): oracles.sqrt_transform,
}
GS = {"x": oracles.log_transform, "1": oracles.linear_transform, "sqrt(x)": oracles.sqrt_transform}
KERNELS = {"1": lambda t, s: 1.0, "1+t-s": lambda t, s: 1 + t - s, "exp(-s)": lambda t, s: math.exp(-s)}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["THM1", "THM2", "THM3", "THM4"]), st.sampled_from(sorted(PAIRS)),
       st.sampled_from(sorted(GS)), st.sampled_from(sorted(KERNELS)),
       st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 10 ** 6))
def test_engine_matches_literal_oracle(theorem, pair, g, kernel, x0, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    pts = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1.0, n - 1))])
    ts = explicit(pts)
    a = 0.5 + np.cumsum(rng.uniform(0, 0.4, n))
    f = rng.uniform(0, 0.6, n) * (rng.random(n) > 0.2)
    h = rng.uniform(0, 1.5, n)
    b = rng.uniform(0.1, 1.5, n)
    Phi, W = pair
    kw = {}
    if theorem in ("THM1", "THM3"):
        kw["k"] = kernel
    else:
        kw.update(h=h, b=b)
    if theorem in ("THM3", "THM4"):
        kw["g"] = g
    inst = ProblemInstance.build(ts, theorem, a=a, f=f, Phi=Phi, W=W, x0=x0, delta0=x0, **kw)
    rep = compute_bound(inst)
    Psi, Psi_inv, _ = PAIRS[pair](x0)
    G, G_inv, _ = GS[g](x0)
    phi_fn, w_fn = ScalarMap(Phi), ScalarMap(W)
    expected = oracles.bound_oracle(
        pts.tolist(), theorem, a.tolist(), f.tolist(), phi_fn, w_fn, Psi, Psi_inv,
        kernel=KERNELS[kernel], h=h.tolist(), b=b.tolist(), G=G, G_inv=G_inv)
    for j, want in enumerate(expected):
        if want is None:
            assert not rep.in_domain[j]
        else:
            assert rep.in_domain[j]
            assert rep.bound[j] == pytest.approx(want, rel=1e-9)


# -- blow-up and domain flags -----------------------------------------------------------------

def test_blowup_flags_points():
    rep = compute_bound(thm1(integer(0, 8), W="pow(x,2)"))
    assert rep.in_domain.tolist() == [True, True, True] + [False] * 6
    assert np.all(np.isnan(rep.bound[3:]))
    assert rep.psi_supremum == pytest.approx(1.0, rel=1e-6)
    assert not rep.all_in_domain
    assert rep.condition[:3].all()


def test_domain_flags_sound_under_wider_probe():
    # every out-of-domain Psi^-1 argument is still out of range with a longer probe
    for W in ("pow(x,2)", "x+pow(x,2)"):
        inst = thm1(integer(0, 8), W=W, f="0.3")
        rep = compute_bound(inst)
        target = rep.extra["psi_constant"] + rep.extra["inner_integral"]
        strict = MonotoneTransform(compose(inst.Phi, inst.W), inst.x0, stall_doublings=16, stall_tol=1e-15)
        bad = [j for j in range(inst.n - 1) if np.isnan(rep.extra["R"][j]) and np.isfinite(target[j])]
        assert bad
        for j in bad:
            with pytest.raises(DomainExceeded):
                strict.inverse(target[j])


def test_bound_dominates_leading_term():
    ts = qgeometric(1.5, 1, 8)
    inst = ProblemInstance.build(ts, "THM3", a="0.5 + t/10", f="0.2", Phi="sqrt(x)", W="log(1+x)",
                                 k="1+t-s", g="x/(1+x)")
    rep = compute_bound(inst)
    ok = rep.in_domain
    assert np.all(rep.bound[ok] >= rep.leading[ok])
    assert np.all(np.diff(rep.multiplier[ok]) >= 0)


def test_report_summary_and_rows():
    rep = compute_bound(thm1(integer(0, 3)))
    u = np.array([1.0, 4.0, 28.0, 100.0])
    s = rep.summary(u)
    assert s["worst_margin"] == 0.0
    assert s["tightness"] == 1.0
    rows = list(rep.rows(u))
    assert rows[1] == (1.0, 4.0, 8.0, 4.0, True)


# -- closed forms on Z and hZ ---------------------------------------------------------------------

def test_corollary_Z_p_powers_of_two():
    rep = bound_corollary_Z(thm1(integer(0, 6)))
    assert rep.multiplier.tolist() == [1, 2, 4, 8, 16, 32, 64]


def test_corollary_Z_pinned_matches_generic():
    inst = thm1(integer(0, 3))
    np.testing.assert_allclose(bound_corollary_Z(inst).bound, [1, 8, 28, 56 + 24 * E ** 2], rtol=1e-12)


def test_corollary_hZ_step_one_is_integer():
    common = dict(a="1+t/5", f="0.3", Phi="sqrt(x)", W="x", k="1+t-s", g="sqrt(x)")
    on_z = bound_corollary_hZ(ProblemInstance.build(integer(0, 6), "THM3", **common))
    on_h = bound_corollary_hZ(ProblemInstance.build(hgrid(0, 6, 1.0), "THM3", **common))
    assert on_z.bound.tolist() == on_h.bound.tolist()


def test_corollaries_refuse_other_scales():
    with pytest.raises(WrongScaleKind):
        bound_corollary_Z(thm1(hgrid(0, 2, 0.5)))
    inst = ProblemInstance.build(uniform(0, 1, 5), "THM3", a=1, f=1, Phi="x", W="x", k="1", g="x")
    with pytest.raises(WrongScaleKind):
        bound_corollary_hZ(inst)


@pytest.mark.parametrize("h", [0.1, 0.5, 2.0])
def test_corollary_hZ_matches_generic(h):
    ts = hgrid(0, 8 * h, h)
    inst = ProblemInstance.build(ts, "THM3", a="2 + t", f="0.4", Phi="pow(x,0.75)", W="sqrt(x)",
                                 k="exp(-s)", g="log(1+x)")
    g, o = compute_bound(inst), bound_corollary_hZ(inst)
    assert g.in_domain.tolist() == o.in_domain.tolist()
    np.testing.assert_allclose(g.bound, o.bound, rtol=1e-12)


# -- comparison lemma ----------------------------------------------------------------------------

def test_lemma_constant_r():
    ts = integer(0, 5)
    rep = lemma1_check(ts, GridFunction.constant(ts, 3.0), "sqrt(x)")
    np.testing.assert_allclose(rep.lhs, rep.rhs, rtol=0, atol=0)


def test_lemma_geometric_r():
    ts = integer(0, 5)
    rep = lemma1_check(ts, GridFunction(ts, 2.0 ** ts.points), "x")
    np.testing.assert_allclose(rep.lhs, ts.points * math.log(2), rtol=1e-12)
    np.testing.assert_allclose(rep.rhs, ts.points, rtol=1e-12)
    np.testing.assert_allclose(rep.slack, (1 - math.log(2)) * ts.points, atol=1e-12)
    assert rep.holds()


def test_lemma_continuum_limit():
    gaps = []
    for n in (10, 100, 1000):
        ts = uniform(0, 1, n)
        rep = lemma1_check(ts, GridFunction(ts, np.exp(ts.points)), "x")
        gaps.append(float(np.max(rep.slack)))
    assert gaps[0] > gaps[1] > gaps[2] >= 0
    assert gaps[2] < 1e-3


def test_lemma_rejects_decreasing_r():
    ts = integer(0, 3)
    with pytest.raises(NonmonotoneR):
        lemma1_check(ts, GridFunction(ts, [3, 2, 2, 4]), "x")
    with pytest.raises(HypothesisFailed):
        lemma1_check(ts, GridFunction(ts, [1, 2, 2, 4]), "1-x/100")


def test_numeric_kernel_accepted():
    a = compute_bound(thm1(integer(0, 3), k=1)).bound
    b = compute_bound(thm1(integer(0, 3), k="1")).bound
    assert np.array_equal(a, b)
