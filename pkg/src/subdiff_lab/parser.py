"""Text format for PL functions.

Grammar (whitespace-insensitive)::

    function := expr [ "on" box ]
    expr     := term (("+" | "-") term)*
    term     := unary ("*" unary)*
    unary    := "-" unary | atom
    atom     := number | var | "(" expr ")"
              | ("max" | "min") "(" expr ("," expr)* ")" | "abs" "(" expr ")"
    box      := "box" "(" num "," num (";" num "," num)* ")"

Variables are ``x``, ``y``, ``z`` or ``x1``, ``x2``, ``x3`` (``x`` is ``x1``);
the dimension is the highest index used. Products need a constant factor,
negation and ``abs`` need an affine argument.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import NegativeScaleError, NonlinearityError, ParseError, PieceCapExceeded
from .plfunc import MAX_DIM, AffinePiece, Box, MaxAffine, PLFunction, _num

PIECE_CAP = 4096

_VARS = {"x": 1, "y": 2, "z": 3, "x1": 1, "x2": 2, "x3": 3}


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Scale:
    factor: float
    expr: "Expr"


@dataclass(frozen=True)
class Max:
    args: tuple


@dataclass(frozen=True)
class Min:
    args: tuple


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


Expr = Union[Var, Const, Sum, Scale, Max, Min, Abs]


@dataclass(frozen=True)
class FunctionAST:
    body: Expr
    box: Optional[tuple]  # ((l1, u1), (l2, u2), ...)
    dim: int


def is_affine(e: Expr) -> bool:
    if isinstance(e, (Var, Const)):
        return True
    if isinstance(e, Sum):
        return all(is_affine(t) for t in e.terms)
    if isinstance(e, Scale):
        return is_affine(e.expr)
    return False


def max_var(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return 0
    if isinstance(e, (Scale, Abs)):
        return max_var(e.expr if isinstance(e, Scale) else e.arg)
    return max(max_var(a) for a in (e.terms if isinstance(e, Sum) else e.args))


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = pos + m.group().rfind("\n") + 1
        else:
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# -- recursive descent -------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        raise cls(msg, tok.line, tok.col)

    def accept(self, text) -> Optional[Token]:
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            self.i += 1
            return self.toks[self.i - 1]
        return None

    def expect(self, text) -> Token:
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        return tok

    def function(self) -> FunctionAST:
        body = self.expr()
        box = None
        if self.accept("on"):
            box = self.box()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        dim = max(max_var(body), len(box) if box else 0, 1)
        if box is not None and len(box) != dim:
            self.fail(f"box has {len(box)} intervals for a {dim}-variable function")
        return FunctionAST(body, box, dim)

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            if self.accept("+"):
                terms.append(self.term())
            elif self.accept("-"):
                tok = self.tok
                terms.append(self.negate(self.term(), tok))
            else:
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def negate(self, e: Expr, tok: Token) -> Expr:
        if not is_affine(e):
            self.fail("negative scale of a non-affine expression", tok, NegativeScaleError)
        return Scale(-1.0, e)

    def term(self) -> Expr:
        start = self.tok
        e = self.unary()
        while True:
            op = self.accept("*")
            if op is None:
                if self.tok.text == "/":
                    self.fail("division is not supported")
                return e
            rhs = self.unary()
            if isinstance(e, Const):
                e = self.scale(e.value, rhs, start)
            elif isinstance(rhs, Const):
                e = self.scale(rhs.value, e, start)
            else:
                self.fail("product of two non-constant expressions", op, NonlinearityError)

    def scale(self, c: float, e: Expr, tok: Token) -> Expr:
        if isinstance(e, Const):
            return Const(c * e.value)
        if c < 0 and not is_affine(e):
            self.fail("negative scale of a non-affine expression", tok, NegativeScaleError)
        return Scale(c, e)

    def unary(self) -> Expr:
        tok = self.tok
        if self.accept("-"):
            e = self.unary()
            if isinstance(e, Const):
                return Const(-e.value)
            return self.negate(e, tok)
        if self.accept("+"):
            return self.unary()
        return self.atom()

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(float(tok.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            name = tok.text
            if name in ("max", "min", "abs"):
                self.i += 1
                self.expect("(")
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                if name == "abs":
                    if len(args) != 1:
                        self.fail("abs takes one argument", tok)
                    if not is_affine(args[0]):
                        self.fail("abs needs an affine argument", tok)
                    return Abs(args[0])
                if len(args) == 1:
                    return args[0]
                return (Max if name == "max" else Min)(tuple(args))
            if name in _VARS:
                self.i += 1
                return Var(_VARS[name])
            self.fail(f"unknown name {name!r}")
        found = tok.text or "end of input"
        self.fail(f"unexpected {found!r}")

    def number(self) -> float:
        sign = -1.0 if self.accept("-") else 1.0
        if sign > 0:
            self.accept("+")
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return sign * float(tok.text)
        self.fail("expected a number")

    def box(self) -> tuple:
        self.expect("box")
        self.expect("(")
        bounds = []
        while True:
            tok = self.tok
            lo = self.number()
            self.expect(",")
            hi = self.number()
            if not lo <= hi:
                self.fail(f"empty interval [{lo}, {hi}]", tok)
            bounds.append((lo, hi))
            if not self.accept(";"):
                break
        self.expect(")")
        if len(bounds) > MAX_DIM:
            self.fail(f"at most {MAX_DIM} dimensions are supported")
        return tuple(bounds)


def parse(text: str) -> FunctionAST:
    """Parse DSL text into a :class:`FunctionAST`."""
    ast = _Parser(text).function()
    if ast.dim > MAX_DIM:
        raise ParseError(f"at most {MAX_DIM} variables are supported")
    return ast


def parse_box(text: str) -> Box:
    """Parse a stand-alone ``box(l1,u1; ...)`` clause."""
    p = _Parser(text)
    bounds = p.box()
    if p.tok.kind != "end":
        p.fail(f"unexpected {p.tok.text!r}")
    lo, hi = zip(*bounds)
    return Box(lo, hi)


# -- normalization -----------------------------------------------------------

# A normal form is a list of components, each a list of (gradient, offset)
# pieces, read as min over components of max over pieces.


def _count(nf) -> int:
    return sum(len(c) for c in nf)


def _check_cap(n: int):
    if n > PIECE_CAP:
        raise PieceCapExceeded(f"normalization needs {n} pieces (cap {PIECE_CAP})")


def _dedupe(comp):
    seen, out = set(), []
    for g, b in comp:
        key = (tuple(g), b)
        if key not in seen:
            seen.add(key)
            out.append((g, b))
    return out


def _add(a, b):
    _check_cap(sum(len(ca) * len(cb) for ca in a for cb in b))
    return [_dedupe([(ga + gb, oa + ob) for (ga, oa), (gb, ob) in itertools.product(ca, cb)])
            for ca, cb in itertools.product(a, b)]


def _max(forms):
    sizes = [sum(len(c) for c in choice) for choice in itertools.product(*forms)]
    _check_cap(sum(sizes))
    return [_dedupe([p for c in choice for p in c]) for choice in itertools.product(*forms)]


def _nf(e: Expr, n: int):
    if isinstance(e, Var):
        g = np.zeros(n)
        g[e.index - 1] = 1.0
        return [[(g, 0.0)]]
    if isinstance(e, Const):
        return [[(np.zeros(n), float(e.value))]]
    if isinstance(e, Sum):
        out = _nf(e.terms[0], n)
        for t in e.terms[1:]:
            out = _add(out, _nf(t, n))
        return out
    if isinstance(e, Scale):
        c = float(e.factor)
        inner = _nf(e.expr, n)
        if c == 0:
            return [[(np.zeros(n), 0.0)]]
        if c < 0 and not (len(inner) == 1 and len(inner[0]) == 1):
            raise NegativeScaleError("negative scale of a non-affine expression")
        return [[(c * g, c * b) for g, b in comp] for comp in inner]
    if isinstance(e, Abs):
        (((g, b),),) = _nf(e.arg, n)
        return [_dedupe([(g, b), (-g, -b)])]
    if isinstance(e, Max):
        return _max([_nf(a, n) for a in e.args])
    if isinstance(e, Min):
        out = [comp for a in e.args for comp in _nf(a, n)]
        _check_cap(_count(out))
        return out
    raise TypeError(f"not an expression node: {e!r}")


def normalize(ast: FunctionAST) -> PLFunction:
    """Rewrite the AST as a min of max-affine components."""
    nf = _nf(ast.body, ast.dim)
    _check_cap(_count(nf))
    comps, seen = [], set()
    for comp in nf:
        key = tuple(sorted((tuple(g), b) for g, b in comp))
        if key in seen:
            continue
        seen.add(key)
        comps.append(MaxAffine(tuple(AffinePiece(g + 0.0, b + 0.0) for g, b in comp)))
    domain = None
    if ast.box is not None:
        lo, hi = zip(*ast.box)
        domain = Box(lo, hi)
    return PLFunction(tuple(comps), domain)


def parse_function(text: str) -> PLFunction:
    """``normalize(parse(text))``; text starting with ``@`` names a .plf file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    return normalize(parse(text))


def load_plf(path) -> PLFunction:
    return normalize(parse(Path(path).read_text(encoding="utf-8")))


def save_plf(f: PLFunction, path) -> None:
    Path(path).write_text(format_function(f) + "\n", encoding="utf-8")


def evaluate_ast(ast: Union[FunctionAST, Expr], x) -> float:
    """Direct recursive evaluation; ``+inf`` off the box clause."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(ast, FunctionAST):
        if ast.box is not None and any(not lo <= v <= hi for v, (lo, hi) in zip(x, ast.box)):
            return math.inf
        return evaluate_ast(ast.body, x)
    e = ast
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Sum):
        return sum(evaluate_ast(t, x) for t in e.terms)
    if isinstance(e, Scale):
        return e.factor * evaluate_ast(e.expr, x)
    if isinstance(e, Abs):
        return abs(evaluate_ast(e.arg, x))
    vals = [evaluate_ast(a, x) for a in e.args]
    return max(vals) if isinstance(e, Max) else min(vals)


# -- formatting --------------------------------------------------------------

def _var_names(n: int) -> list:
    return ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]


def _affine_text(p: AffinePiece, names) -> str:
    parts = []
    for k, (c, name) in enumerate(zip(p.gradient, names)):
        c = float(c)
        if k == 0:
            parts.append(f"{_num(c)}*{name}")
        else:
            parts.append(f"{'-' if c < 0 else '+'} {_num(abs(c))}*{name}")
    b = float(p.offset)
    parts.append(f"{'-' if b < 0 else '+'} {_num(abs(b))}")
    return " ".join(parts)


def _comp_text(comp: MaxAffine, names) -> str:
    if len(comp.pieces) == 1:
        return _affine_text(comp.pieces[0], names)
    return "max(" + ", ".join(_affine_text(p, names) for p in comp.pieces) + ")"


def unparse(ast: Union[FunctionAST, Expr]) -> str:
    """Text for an AST, re-parsable to the same tree up to unary wrappers."""
    if isinstance(ast, FunctionAST):
        names = _var_names(ast.dim)
        body = _unparse(ast.body, names)
        if ast.box is None:
            return body
        return body + " on box(" + "; ".join(f"{_num(l)},{_num(u)}" for l, u in ast.box) + ")"
    return _unparse(ast, _var_names(max(max_var(ast), 1)))


def _unparse(e: Expr, names) -> str:
    if isinstance(e, Var):
        return names[e.index - 1]
    if isinstance(e, Const):
        return _num(e.value) if e.value >= 0 else f"({_num(e.value)})"
    if isinstance(e, Sum):
        return "(" + " + ".join(_unparse(t, names) for t in e.terms) + ")"
    if isinstance(e, Scale):
        return f"({_num(e.factor)})*{_unparse(e.expr, names)}"
    if isinstance(e, Abs):
        return f"abs({_unparse(e.arg, names)})"
    name = "max" if isinstance(e, Max) else "min"
    return name + "(" + ", ".join(_unparse(a, names) for a in e.args) + ")"


def format_function(f: PLFunction) -> str:
    """Canonical text, e.g. ``max(1*x + 0, -1*x + 0) on box(-1,1)``."""
    names = _var_names(f.dim)
    if len(f.components) == 1:
        body = _comp_text(f.components[0], names)
    else:
        body = "min(" + ", ".join(_comp_text(c, names) for c in f.components) + ")"
    if f.domain is not None:
        body += " on " + f.domain.text()
    return body
