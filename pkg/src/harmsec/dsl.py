"""A small arithmetic expression language for config-defined structures.

Grammar, loosest binding first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is allowed.  Expressions compile to
plain Python closures over :mod:`math`; domain errors surface as
:class:`EvalError`.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, EvalError, ParseError, UnboundVariable

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
}


# ---------------------------------------------------------------------------
# AST

class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    left: Expr
    right: Expr
    symbol = "?"


class Add(Binary):
    symbol = "+"


class Sub(Binary):
    symbol = "-"


class Mul(Binary):
    symbol = "*"


class Div(Binary):
    symbol = "/"


class Pow(Binary):
    symbol = "^"


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div, "^": Pow}
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = len(text) - len(text[pos:].lstrip())
            if rest == len(text):
                break
            raise ParseError(f"unexpected character {text[rest]!r}", rest, {"number", "name", "operator"})
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text.rstrip()) if text.strip() else len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.peek()
        if t[0] != "op" or t[1] != op:
            raise ParseError(f"expected {op!r}", t[2], {op})
        self.i += 1

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = _BINARY[op](node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = _BINARY[op](node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "name":
            self.take()
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            return Var(text)
        if (kind, text) == ("op", "("):
            self.take()
            inner = self.expr()
            self.expect_op(")")
            return inner
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", off, {"number", "name", "function", "(", "-"})


def parse_expression(text: str) -> Expr:
    if not text or not text.strip():
        raise ParseError("empty expression", 0, {"number", "name", "function", "(", "-"})
    p = _Parser(text)
    node = p.expr()
    kind, tok, off = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", off, {"+", "-", "*", "/", "^", "end of input"})
    return node


# ---------------------------------------------------------------------------
# printing

def _num_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    """Print with the fewest parentheses that parse back to the same tree."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return "-" + (f"({inner})" if _prec(e.operand) < 3 else inner)
    if isinstance(e, Pow):
        left, right = to_text(e.left), to_text(e.right)
        if _prec(e.left) <= 4:
            left = f"({left})"
        if _prec(e.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if isinstance(e, Binary):
        p = _prec(e)
        left, right = to_text(e.left), to_text(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.symbol} {right}"
    raise TypeError(f"not an expression: {e!r}")


def free_variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, Call):
        return free_variables(e.arg)
    return free_variables(e.left) | free_variables(e.right)


# ---------------------------------------------------------------------------
# evaluation

def _div(a, b):
    if b == 0:
        raise EvalError("division by zero")
    return a / b


def _pow(a, b):
    try:
        r = a ** b
    except ZeroDivisionError as exc:
        raise EvalError("zero raised to a negative power") from exc
    if isinstance(r, complex):
        raise EvalError(f"{a}^{b} is not real")
    return r


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Evaluate in IEEE double precision."""
    try:
        return float(_eval(e, bindings))
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise EvalError(f"{to_text(e)}: {exc}") from exc


def _eval(e, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariable(f"unbound variable {e.name!r}")
        return float(env[e.name])
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, Call):
        return FUNCTIONS[e.func](_eval(e.arg, env))
    a, b = _eval(e.left, env), _eval(e.right, env)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        return _div(a, b)
    return _pow(a, b)


def _py(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"_v_{e.name}"
    if isinstance(e, Neg):
        return f"(-{_py(e.operand)})"
    if isinstance(e, Call):
        return f"_f_{e.func}({_py(e.arg)})"
    if isinstance(e, Div):
        return f"_div({_py(e.left)}, {_py(e.right)})"
    if isinstance(e, Pow):
        return f"_pow({_py(e.left)}, {_py(e.right)})"
    return f"({_py(e.left)} {e.symbol} {_py(e.right)})"


def compile_expression(e: Union[Expr, str], variables: Sequence[str],
                       params: Mapping[str, float] = None) -> Callable[..., float]:
    """Compile to a positional function of ``variables``; parameters are baked in."""
    if isinstance(e, str):
        e = parse_expression(e)
    params = dict(params or {})
    unbound = free_variables(e) - set(variables) - set(params)
    if unbound:
        raise UnboundVariable(f"unbound variable(s) {sorted(unbound)} in {to_text(e)!r}")
    ns = {f"_f_{k}": v for k, v in FUNCTIONS.items()}
    ns.update(_div=_div, _pow=_pow)
    ns.update({f"_v_{k}": float(v) for k, v in params.items() if k not in variables})
    args = ", ".join(f"_v_{v}" for v in variables)
    raw = eval(f"lambda {args}: {_py(e)}", ns)  # noqa: S307 - source is generated from the AST above
    text = to_text(e)

    def fn(*xs):
        try:
            return float(raw(*xs))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvalError(f"{text}: {exc}") from exc

    fn.expression = e
    return fn


def compile_function(text: str, variables: Sequence[str], params: Mapping[str, float] = None):
    return compile_expression(parse_expression(text), variables, params)


# ---------------------------------------------------------------------------
# structure configs

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:  # pragma: no cover - depends on interpreter
    import tomli as _toml


@dataclass(frozen=True)
class StructureConfig:
    name: str
    coordinates: tuple
    domain: tuple
    metric: tuple  # rows of Expr
    xi: tuple
    phi: tuple
    parameters: tuple  # (name, value) pairs
    fd: tuple  # (key, value) overrides

    @property
    def dim(self) -> int:
        return len(self.coordinates)


def _expr_entry(v, where):
    if isinstance(v, bool) or not isinstance(v, (str, int, float)):
        raise ConfigError(f"{where}: expected an expression string or number, got {v!r}")
    try:
        return parse_expression(str(v))
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _matrix(raw, dim, where):
    if not isinstance(raw, list) or len(raw) != dim or any(not isinstance(r, list) or len(r) != dim for r in raw):
        raise ConfigError(f"{where}: expected a {dim}x{dim} array of expressions")
    return tuple(tuple(_expr_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)) for i, r in enumerate(raw))


def parse_config(data: Mapping) -> StructureConfig:
    """Validate the shape of a config mapping and parse its expressions."""
    known = {"name", "coordinates", "domain", "metric", "xi", "phi", "parameters", "fd"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    for key in ("coordinates", "domain", "metric", "xi", "phi"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    coords = data["coordinates"]
    if not isinstance(coords, list) or not coords or not all(isinstance(c, str) for c in coords):
        raise ConfigError("coordinates must be a nonempty list of names")
    if len(set(coords)) != len(coords) or any(c in FUNCTIONS for c in coords):
        raise ConfigError("coordinate names must be distinct and not function names")
    dim = len(coords)
    dom = data["domain"]
    if not isinstance(dom, Mapping) or set(dom) != set(coords):
        raise ConfigError("domain must give [lo, hi] for every coordinate")
    bounds = []
    for c in coords:
        b = dom[c]
        if not isinstance(b, list) or len(b) != 2 or not all(isinstance(v, (int, float)) for v in b) or not b[0] < b[1]:
            raise ConfigError(f"domain.{c} must be [lo, hi] with lo < hi")
        bounds.append((float(b[0]), float(b[1])))
    xi = data["xi"]
    if not isinstance(xi, list) or len(xi) != dim:
        raise ConfigError(f"xi must have {dim} entries")
    params = data.get("parameters", {})
    if not isinstance(params, Mapping) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in params.values()):
        raise ConfigError("parameters must map names to numbers")
    if set(params) & set(coords):
        raise ConfigError("parameter names clash with coordinate names")
    fd = data.get("fd", {})
    if not isinstance(fd, Mapping) or set(fd) - {"step", "order"}:
        raise ConfigError("fd accepts only 'step' and 'order'")
    cfg = StructureConfig(
        name=str(data.get("name", "config")),
        coordinates=tuple(coords),
        domain=tuple(bounds),
        metric=_matrix(data["metric"], dim, "metric"),
        xi=tuple(_expr_entry(v, f"xi[{i}]") for i, v in enumerate(xi)),
        phi=_matrix(data["phi"], dim, "phi"),
        parameters=tuple(sorted((k, float(v)) for k, v in params.items())),
        fd=tuple(sorted(fd.items())),
    )
    allowed = set(coords) | set(params)
    for e in [x for row in cfg.metric for x in row] + list(cfg.xi) + [x for row in cfg.phi for x in row]:
        unbound = free_variables(e) - allowed
        if unbound:
            raise ConfigError(f"unknown name(s) {sorted(unbound)} in {to_text(e)!r}")
    return cfg


def _compile_array(rows, coords, params):
    fns = [[compile_expression(e, coords, params) for e in row] for row in rows]

    def ev(p):
        return np.array([[f(*p) for f in row] for row in fns])

    return ev


def build_structure(cfg: StructureConfig, validate_points: int = 8, seed: int = 0):
    """Compile a parsed config into an almost contact structure (``eta = g xi``)."""
    from .chart import DEFAULT_FD, Chart, TensorFieldHandle
    from .contact import AlmostContactStructure, validate_structure

    params = dict(cfg.parameters)
    coords = cfg.coordinates
    metric = _compile_array(cfg.metric, coords, params)
    xi_row = _compile_array([cfg.xi], coords, params)
    phi = _compile_array(cfg.phi, coords, params)

    def xi(p):
        return xi_row(p)[0]

    def eta(p):
        return metric(p) @ xi(p)

    chart = Chart(cfg.dim, metric, cfg.name, box=cfg.domain, coords=coords)
    s = AlmostContactStructure(chart, TensorFieldHandle((1, 0), xi, "xi"), TensorFieldHandle((0, 1), eta, "eta"),
                               TensorFieldHandle((1, 1), phi, "phi"), cfg.name)
    pts = chart.sample_points(validate_points, seed, DEFAULT_FD)
    for p in pts:
        try:
            g = metric(p)
        except EvalError as exc:
            raise ConfigError(f"metric cannot be evaluated at {tuple(p)}: {exc}") from exc
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-14 * max(1.0, float(np.abs(g).max()))):
            raise ConfigError(f"metric is not symmetric at {tuple(p)}")
    validate_structure(s, pts)
    return s


def fd_overrides(cfg: StructureConfig) -> Dict[str, float]:
    return dict(cfg.fd)


def load_config(path: Union[str, Path]) -> StructureConfig:
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)


def load_structure(path: Union[str, Path]):
    """Load a TOML structure config, compile it and validate at 8 seeded points."""
    return build_structure(load_config(path))
