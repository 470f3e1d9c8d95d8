"""A small expression language for nonlinearities and coefficient functions.

Grammar (see docs/grammar.md)::

    expr   := term (("+" | "-") term)*
    term   := power (("*" | "/") power)*
    power  := unary ("^" power)?
    unary  := "-" unary | atom
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Unary minus binds tighter than ``^`` so ``-x^2`` is ``pow(-x, 2)``. The
infix ``^`` and ``pow(a, b)`` build the same tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import EvalFault, ExprSyntaxError, UnknownIdentifier

FUNCTIONS = {
    "exp": (1, 1),
    "log": (1, 1),
    "sqrt": (1, 1),
    "abs": (1, 1),
    "pow": (2, 2),
    "min": (2, None),
    "max": (2, None),
}

PROPERTY_TOL = 1e-9
_FP_ERRORS = dict(divide="raise", over="raise", invalid="raise", under="ignore")


# -- tree --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Neg, BinOp, Call]


def to_text(node: Node) -> str:
    """Print a tree so that parsing the output rebuilds the same tree."""
    if isinstance(node, Num):
        v = node.value
        if v < 0 or (v == 0 and math.copysign(1.0, v) < 0):
            return f"({v!r})"
        return repr(v)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


def variables_of(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return variables_of(node.arg)
    if isinstance(node, BinOp):
        return variables_of(node.left) | variables_of(node.right)
    return set().union(*(variables_of(a) for a in node.args))


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            offset = pos + len(rest) - len(rest.lstrip()) + 1
            raise ExprSyntaxError(f"unexpected character {text[offset - 1]!r}", offset)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, offset = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", offset)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.power())
        return node

    def power(self):
        base = self.unary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Call("pow", (base, self.power()))
        return base

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            arg = self.unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        return self.atom()

    def atom(self):
        kind, text, offset = self.take()
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"literal {text} is not a finite float", offset)
            return Num(value)
        if kind == "name":
            if text in FUNCTIONS:
                if self.peek()[:2] != ("op", "("):
                    raise ExprSyntaxError(f"function {text!r} needs an argument list", offset)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                lo, hi = FUNCTIONS[text]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    raise ExprSyntaxError(f"{text} takes {lo}{'' if hi == lo else '+'} arguments", offset)
                return Call(text, tuple(args))
            if text in self.variables:
                return Var(text)
            allowed = ", ".join(self.variables) or "none"
            raise UnknownIdentifier(f"unknown identifier {text!r} (variables: {allowed})", offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", offset)


# -- compiled expressions ----------------------------------------------------

_NUMPY_NAMES = {
    "exp": "np.exp",
    "log": "np.log",
    "sqrt": "np.sqrt",
    "abs": "np.abs",
    "pow": "np.power",
}


def _codegen(node: Node, consts: list) -> str:
    if isinstance(node, Num):
        consts.append(np.float64(node.value))
        return f"_c{len(consts) - 1}"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_codegen(node.arg, consts)})"
    if isinstance(node, BinOp):
        return f"({_codegen(node.left, consts)} {node.op} {_codegen(node.right, consts)})"
    args = [_codegen(a, consts) for a in node.args]
    if node.name in ("min", "max"):
        fn = "np.minimum" if node.name == "min" else "np.maximum"
        code = args[0]
        for a in args[1:]:
            code = f"{fn}({code}, {a})"
        return code
    if node.name == "log":
        # log(0) is only a divide warning in numpy; treat it as a domain fault
        return f"_log({args[0]})"
    return f"{_NUMPY_NAMES[node.name]}({', '.join(args)})"


def _strict_log(x):
    if np.any(np.asarray(x) <= 0):
        raise FloatingPointError("log of nonpositive argument")
    return np.log(x)


@dataclass(frozen=True, eq=False)
class Expr:
    """A parsed expression over a fixed tuple of variable names."""

    tree: Node
    variables: tuple
    source: str = ""
    _fn: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        consts: list = []
        body = _codegen(self.tree, consts)
        namespace = {"np": np, "_log": _strict_log}
        namespace.update({f"_c{i}": c for i, c in enumerate(consts)})
        fn = eval(f"lambda {', '.join(self.variables)}: {body}", namespace)  # noqa: S307
        object.__setattr__(self, "_fn", fn)

    def __eq__(self, other):
        return isinstance(other, Expr) and self.tree == other.tree and self.variables == other.variables

    def __hash__(self):
        return hash((self.tree, self.variables))

    @property
    def text(self) -> str:
        return self.source or to_text(self.tree)

    def __str__(self):
        return self.text

    def __call__(self, *args, **kwargs):
        """Vectorised evaluation; domain faults raise :class:`EvalFault`."""
        if args:
            if kwargs or len(args) != len(self.variables):
                raise TypeError(f"expected arguments {self.variables}")
            kwargs = dict(zip(self.variables, args))
        env = {name: np.asarray(kwargs[name], dtype=float) for name in self.variables}
        try:
            with np.errstate(**_FP_ERRORS):
                out = self._fn(**env)
        except (FloatingPointError, ZeroDivisionError, ValueError, OverflowError) as exc:
            raise self._locate_fault(env, exc) from None
        out = np.asarray(out, dtype=float)
        shape = np.broadcast_shapes(*(v.shape for v in env.values())) if env else ()
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        if not np.all(np.isfinite(out)):
            raise self._locate_fault(env, FloatingPointError("non-finite result"))
        return out if out.ndim else float(out)

    def _locate_fault(self, env: Mapping[str, np.ndarray], exc) -> EvalFault:
        arrays = np.broadcast_arrays(*env.values()) if env else []
        names = list(env)
        if arrays and arrays[0].size > 1:
            for idx in np.ndindex(arrays[0].shape):
                point = {n: np.float64(a[idx]) for n, a in zip(names, arrays)}
                try:
                    with np.errstate(**_FP_ERRORS):
                        val = self._fn(**point)
                    if not np.isfinite(val):
                        raise FloatingPointError("non-finite result")
                except (FloatingPointError, ZeroDivisionError, ValueError, OverflowError) as inner:
                    return EvalFault(f"{self.text}: {inner}", {n: float(v) for n, v in point.items()},
                                     overflow=_is_overflow(inner))
        point = {n: float(np.ravel(a)[0]) for n, a in zip(names, arrays)} if arrays else {}
        return EvalFault(f"{self.text}: {exc}", point, overflow=_is_overflow(exc))


def _is_overflow(exc) -> bool:
    return isinstance(exc, OverflowError) or "overflow" in str(exc)


def parse(text: str, variables: Iterable[str] = ("x",)) -> Expr:
    """Parse ``text`` into an :class:`Expr` over the given variables."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    variables = tuple(variables)
    tree = _Parser(text, variables).parse()
    return Expr(tree, variables, text.strip())


def from_tree(tree: Node, variables: Iterable[str] = ("x",)) -> Expr:
    return Expr(tree, tuple(variables))


# -- one-variable maps and their certificates --------------------------------

@dataclass(frozen=True)
class Certificate:
    prop: str
    passed: bool
    samples: int
    worst: float
    witness: tuple = ()
    note: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def __str__(self):
        wit = ", ".join(f"{w:.6g}" for w in self.witness)
        extra = f" note={self.note}" if self.note else ""
        return f"{self.prop}: {self.status} samples={self.samples} worst={self.worst:.3e} witness=({wit}){extra}"


PROPERTIES = ("nondecreasing", "positive", "subadditive", "submultiplicative", "classS")
PROPERTY_ALIASES = {
    "nondec": "nondecreasing",
    "pos": "positive",
    "sub": "subadditive",
    "submul": "submultiplicative",
    "classS": "classS",
    "classs": "classS",
}


class ScalarMap:
    """A nonlinearity x -> m(x) given as an expression in ``x``."""

    def __init__(self, expr: Expr | str, name: str = ""):
        if isinstance(expr, str):
            expr = parse(expr, ("x",))
        if expr.variables != ("x",):
            raise ExprSyntaxError(f"a scalar map must be an expression in x only, got {expr.variables}", 1)
        self.expr = expr
        self.name = name
        self.certificates: dict = {}
        self._cache: dict = {}

    def __call__(self, x):
        return self.expr(x=x)

    @property
    def text(self) -> str:
        return self.expr.text

    def __repr__(self):
        label = f"{self.name}=" if self.name else ""
        return f"ScalarMap({label}{self.text!r})"

    def __eq__(self, other):
        return isinstance(other, ScalarMap) and self.expr == other.expr

    def __hash__(self):
        return hash(self.expr)


def _draw(rng: np.random.Generator, n: int, hi: float) -> np.ndarray:
    half = n // 2
    lin = hi * (1.0 - rng.random(half))
    logu = hi * np.power(10.0, -6.0 * rng.random(n - half))
    return np.concatenate([lin, logu])


def _relative(diff: np.ndarray, *terms) -> np.ndarray:
    # absolute tolerance below magnitude 1, relative above
    scale = np.maximum.reduce([np.ones_like(diff)] + [np.abs(t) for t in terms])
    return diff / scale


def _worst(viol: np.ndarray, *cols):
    k = int(np.argmax(viol))
    return float(viol[k]), tuple(float(c[k]) for c in cols)


def check_properties(m: ScalarMap, domain_hi: float = 10.0, samples: int = 200,
                     seed: int = 0, props: Iterable[str] | None = None) -> dict:
    """Sample the structural hypotheses of ``m`` on (0, domain_hi].

    Returns ``{property: Certificate}``. The same seed always gives the same
    certificates. Results are also stored on ``m.certificates``.
    """
    if samples < 100:
        raise ValueError("at least 100 samples are required")
    if not domain_hi > 0:
        raise ValueError("domain_hi must be positive")
    names = PROPERTIES if props is None else tuple(PROPERTY_ALIASES.get(p, p) for p in props)
    unknown = set(names) - set(PROPERTIES)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")
    key = (float(domain_hi), int(samples), int(seed))
    out = {}
    note = ""
    try:
        m(0.0)
    except EvalFault:
        note = "undefined at 0"
    for prop in names:
        ck = key + (prop,)
        if ck not in m._cache:
            m._cache[ck] = _check_one(m, prop, float(domain_hi), int(samples), int(seed), note)
        out[prop] = m._cache[ck]
    m.certificates.update(out)
    return out


def _check_one(m: ScalarMap, prop: str, hi: float, n: int, seed: int, note: str) -> Certificate:
    # one independent stream per property keeps certificates stable when
    # a caller asks for a subset
    rng = np.random.default_rng([seed, PROPERTIES.index(prop)])
    probes = np.array([1.0, 0.5, 2.0, hi])
    if prop == "nondecreasing":
        x1, x2 = _draw(rng, n, hi), _draw(rng, n, hi)
        lo, up = np.minimum(x1, x2), np.maximum(x1, x2)
        mlo, mup = m(lo), m(up)
        worst, wit = _worst(_relative(mlo - mup, mlo, mup), lo, up)
        return Certificate(prop, worst <= PROPERTY_TOL, n, worst, wit, note)
    if prop == "positive":
        x = np.concatenate([probes, _draw(rng, n, hi)])
        vals = m(x)
        worst, wit = _worst(-vals, x)
        return Certificate(prop, bool(np.min(vals) > 0), x.size, worst, wit, note)
    if prop == "subadditive":
        x = np.concatenate([probes, _draw(rng, n, hi)])
        y = np.concatenate([probes, _draw(rng, n, hi)])
        mxy, mx, my = m(x + y), m(x), m(y)
        worst, wit = _worst(_relative(mxy - mx - my, mxy, mx, my), x, y)
        return Certificate(prop, worst <= PROPERTY_TOL, x.size, worst, wit, note)
    if prop == "submultiplicative":
        x = np.concatenate([probes, _draw(rng, n, hi)])
        y = np.concatenate([probes, _draw(rng, n, hi)])
        mxy, mx, my = m(x * y), m(x), m(y)
        worst, wit = _worst(_relative(mxy - mx * my, mxy, mx * my), x, y)
        return Certificate(prop, worst <= PROPERTY_TOL, x.size, worst, wit, note)
    # class S: nondecreasing, positive on (0, inf), and g(x)/z <= g(x/z) for z >= 1
    x = np.concatenate([probes, _draw(rng, n, hi)])
    z = np.concatenate([np.array([1.0, 2.0, 1.5, max(hi, 1.0)]),
                        np.power(max(hi, 1.0), rng.random(n))])
    lhs, rhs = m(x) / z, m(x / z)
    scaling, wit = _worst(_relative(lhs - rhs, lhs, rhs), x, z)
    mono = _check_one(m, "nondecreasing", hi, n, seed, note)
    pos = _check_one(m, "positive", hi, n, seed, note)
    worst = max(scaling, mono.worst, pos.worst)
    if mono.worst == worst and mono.worst > scaling:
        wit = mono.witness
    elif pos.worst == worst and pos.worst > scaling:
        wit = pos.witness
    passed = scaling <= PROPERTY_TOL and mono.passed and pos.passed
    return Certificate(prop, passed, x.size, worst, wit, note)


def sample(text: str | Expr, scale, variable: str = "t"):
    """Sample a coefficient expression in ``t`` on every point of ``scale``."""
    from .timescale import GridFunction

    expr = parse(text, (variable,)) if isinstance(text, str) else text
    return GridFunction(scale, np.broadcast_to(expr(scale.points), (len(scale),)))
