import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsgronwall.errors import EvalFault, ExprSyntaxError, UnknownIdentifier
from tsgronwall.expr import (
    BinOp,
    Call,
    Neg,
    Num,
    ScalarMap,
    Var,
    check_properties,
    from_tree,
    parse,
    sample,
    to_text,
)
from tsgronwall.timescale import integer


def test_identity():
    e = parse("x")
    assert e.tree == Var("x")
    assert e(3.5) == 3.5


def test_arithmetic():
    assert parse("pow(x,2)+3*x")(2) == 10


def test_unbalanced_paren_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse("log(x")
    assert err.value.offset == 6


@pytest.mark.parametrize("text, offset", [("x +* 2", 4), ("2 x", 3), ("", 1), ("sqrt()", 6),
                                           ("x @ 1", 3)])
def test_syntax_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as err:
        parse(text)
    assert err.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("y + 1")
    with pytest.raises(UnknownIdentifier):
        parse("x + t")          # kernel variables are not allowed in a map
    with pytest.raises(UnknownIdentifier):
        parse("foo(x)")


def test_arity_checked():
    with pytest.raises(ExprSyntaxError):
        parse("pow(x)")
    with pytest.raises(ExprSyntaxError):
        parse("exp(x, 1)")
    assert parse("max(x, 1, 3)")(2) == 3


def test_precedence():
    assert parse("2+3*x")(4) == 14
    assert parse("-x^2")(3) == 9          # unary minus binds tighter than ^
    assert parse("2^3^2")(0) == 512       # ^ is right-associative
    assert parse("pow(2, pow(3, 2))")(0) == 512
    assert parse("8/4/2")(0) == 1
    assert parse("1-2-3")(0) == -4


def test_caret_and_pow_share_a_node():
    assert parse("x^2").tree == parse("pow(x, 2)").tree


def test_scientific_literals():
    assert parse("1.5e-3*x")(1000) == pytest.approx(1.5)


def test_vectorised_evaluation():
    e = parse("t - s + 1", ("t", "s"))
    out = e(t=np.array([1.0, 2.0]), s=0.5)
    np.testing.assert_allclose(out, [1.5, 2.5])
    assert parse("3")(np.zeros(4)).shape == (4,)


@pytest.mark.parametrize("text, x", [("log(x)", 0.0), ("log(x)", -1.0), ("1/x", 0.0),
                                     ("sqrt(x)", -4.0), ("exp(x)", 1000.0)])
def test_domain_faults_are_loud(text, x):
    with pytest.raises(EvalFault) as err:
        parse(text)(x)
    assert err.value.inputs == {"x": x}


def test_fault_locates_offending_entry():
    with pytest.raises(EvalFault) as err:
        parse("1/(x-2)")(np.array([0.0, 1.0, 2.0, 3.0]))
    assert err.value.inputs == {"x": 2.0}


def test_sample_on_scale():
    gf = sample("t^2", integer(0, 3))
    assert gf.values.tolist() == [0, 1, 4, 9]


# -- round trip ------------------------------------------------------------------

_leaf = st.one_of(
    st.floats(-50, 50, allow_nan=False).map(Num),
    st.just(Var("x")),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["exp", "log", "sqrt", "abs"]), children).map(lambda t: Call(t[0], (t[1],))),
        st.tuples(children, children).map(lambda t: Call("pow", t)),
        st.lists(children, min_size=2, max_size=3).map(lambda a: Call("min", tuple(a))),
        st.lists(children, min_size=2, max_size=3).map(lambda a: Call("max", tuple(a))),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)


def _canonical(node):
    # the parser folds a minus sign into a literal
    if isinstance(node, Neg):
        inner = _canonical(node.arg)
        if isinstance(inner, Num):
            return Num(-inner.value)
        return Neg(inner)
    if isinstance(node, BinOp):
        return BinOp(node.op, _canonical(node.left), _canonical(node.right))
    if isinstance(node, Call):
        return Call(node.name, tuple(_canonical(a) for a in node.args))
    return node


def _value(expr, x):
    try:
        return expr(x)
    except EvalFault:
        return "fault"


@settings(max_examples=1000, deadline=None)
@given(trees, st.floats(-20, 20, allow_nan=False))
def test_print_parse_round_trip(tree, x):
    text = to_text(tree)
    again = parse(text)
    assert again.tree == _canonical(tree)
    assert parse(to_text(again.tree)).tree == again.tree
    assert _value(from_tree(tree), x) == _value(again, x)


# -- certificates ------------------------------------------------------------------

def test_identity_passes_phi_properties():
    certs = check_properties(ScalarMap("x"), props=["nondec", "sub", "submul"])
    assert all(c.passed for c in certs.values())


def test_identity_is_class_s():
    assert check_properties(ScalarMap("x"), props=["classS"])["classS"].passed


def test_square_fails_subadditivity_with_witness():
    certs = check_properties(ScalarMap("pow(x,2)"), props=["sub", "submul"])
    assert certs["submultiplicative"].passed
    sub = certs["subadditive"]
    assert not sub.passed
    x, y = sub.witness
    assert (x + y) ** 2 > x ** 2 + y ** 2
    assert sub.witness == (1.0, 1.0)
    assert sub.worst == pytest.approx(0.5)   # Phi(2) - 2 Phi(1), scaled by Phi(2) = 4


@pytest.mark.parametrize("text", ["sqrt(x)", "x/(1+x)", "log(1+x)", "min(x,1)", "pow(x,0.75)"])
def test_concave_maps_are_subadditive(text):
    assert check_properties(ScalarMap(text), props=["sub", "nondec", "pos"])["subadditive"].passed


@pytest.mark.parametrize("text, prop", [("1-x", "nondecreasing"), ("x-1", "positive"),
                                        ("0.5*x", "submultiplicative"), ("exp(x)", "classS")])
def test_failures(text, prop):
    assert not check_properties(ScalarMap(text), props=[prop])[prop].passed


def test_class_s_requires_growth_condition():
    # x^2 is nondecreasing and positive but g(x)/z <= g(x/z) fails
    cert = check_properties(ScalarMap("pow(x,2)"), props=["classS"])["classS"]
    assert not cert.passed


def test_certificates_are_deterministic():
    a = check_properties(ScalarMap("sqrt(x) + x/(1+x)"), 25.0, 300, 11)
    b = check_properties(ScalarMap("sqrt(x) + x/(1+x)"), 25.0, 300, 11)
    assert {k: (v.passed, v.worst, v.witness, v.samples) for k, v in a.items()} == \
        {k: (v.passed, v.worst, v.witness, v.samples) for k, v in b.items()}


def test_undefined_at_zero_is_flagged_not_rejected():
    cert = check_properties(ScalarMap("1/x + 1"), props=["pos"])["positive"]
    assert cert.passed
    assert "undefined at 0" in cert.note


def test_too_few_samples():
    with pytest.raises(ValueError):
        check_properties(ScalarMap("x"), samples=50)


def test_domain_fault_during_sampling():
    with pytest.raises(EvalFault):
        check_properties(ScalarMap("log(x - 1)"), props=["pos"])
