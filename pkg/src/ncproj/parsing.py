"""Expression grammar shared by the CLI and the chain-file loader.

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := unary ('^' nat)?
    unary   := '-' unary | atom
    atom    := name | rational | bracket | '(' expr ')'
    bracket := '[' expr ',' expr ']'
    suffix  := '@U' nat | '@' name          (optional, once, at the end)

The parser produces a small tuple AST; evaluators turn it into Lie
elements, enveloping-algebra elements or chart elements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col


class UnknownSymbol(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))", re.S)


@dataclass(frozen=True)
class Parsed:
    ast: Tuple
    chart: Optional[str] = None


def _tokenize(text: str) -> List[Tuple[str, Any, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            out.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), start))
        elif m.group(3) is not None:
            if m.group(3).strip():
                out.append(("op", m.group(3), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected '{op}'", tok)

    def is_op(self, *ops):
        tok = self.peek()
        return tok[0] == "op" and tok[1] in ops

    def parse(self) -> Parsed:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        ast = self.expr()
        chart = None
        if self.is_op("@"):
            self.take()
            tok = self.take()
            if tok[0] != "name":
                self.fail("expected chart name after '@'", tok)
            chart = tok[1]
            if chart == "U" and self.peek()[0] == "num":
                chart = f"U{self.take()[1]}"
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return Parsed(ast, chart)

    def expr(self):
        node = self.term()
        while self.is_op("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.is_op("*", "/"):
            op = self.take()[1]
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        node = self.unary()
        if self.is_op("^"):
            self.take()
            tok = self.take()
            if tok[0] != "num":
                self.fail("exponent must be a natural number", tok)
            node = ("pow", node, tok[1])
        return node

    def unary(self):
        if self.is_op("-"):
            self.take()
            return ("neg", self.unary())
        if self.is_op("+"):
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return ("num", Fraction(val))
        if kind == "name":
            return ("name", val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "op" and val == "[":
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("]")
            return ("br", a, b)
        self.fail("unexpected token", tok)


def parse(text: str) -> Parsed:
    return _Parser(text).parse()


def substitute_params(text: str, params: Dict[str, int]) -> str:
    """Expand "{d-1}" style integer templates using the given parameters."""
    def repl(m):
        return str(eval_int(m.group(1), params))
    return re.sub(r"\{([^{}]*)\}", repl, text)


def eval_int(text: str, params: Dict[str, int]) -> int:
    """Integer arithmetic over named parameters (+, -, *, parentheses)."""
    node = parse(text).ast

    def ev(n):
        tag = n[0]
        if tag == "num":
            if n[1].denominator != 1:
                raise ValueError("non-integer template value")
            return int(n[1])
        if tag == "name":
            if n[1] not in params:
                raise UnknownSymbol(f"unknown parameter '{n[1]}'")
            return int(params[n[1]])
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "mul":
            return ev(n[1]) * ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "pow":
            return ev(n[1]) ** n[2]
        raise ValueError(f"operation '{tag}' not allowed in integer templates")

    return ev(node)


def fold(node, leaf: Callable, ops: Dict[str, Callable]):
    """Generic bottom-up evaluation of an AST."""
    tag = node[0]
    if tag in ("num", "name"):
        return leaf(node)
    if tag == "pow":
        return ops["pow"](fold(node[1], leaf, ops), node[2])
    if tag == "neg":
        return ops["neg"](fold(node[1], leaf, ops))
    return ops[tag](fold(node[1], leaf, ops), fold(node[2], leaf, ops))


def _scalar_of(node) -> Optional[Fraction]:
    """Value of a purely numeric subtree, else None."""
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "name":
        return None
    if tag == "neg":
        v = _scalar_of(node[1])
        return None if v is None else -v
    if tag == "pow":
        v = _scalar_of(node[1])
        return None if v is None else v ** node[2]
    if tag == "br":
        return None
    a, b = _scalar_of(node[1]), _scalar_of(node[2])
    if a is None or b is None:
        return None
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return a / b
    return None


def evaluate_lie(parsed, basis, names: Dict[str, Any]):
    """Evaluate to a LieElement; products are allowed only with scalars."""
    from .hall_lie import LieElement, bracket

    node = parsed.ast if isinstance(parsed, Parsed) else parsed
    gens = {basis.label(i): LieElement.generator(basis, i) for i in range(basis.size)}

    def ev(n):
        s = _scalar_of(n)
        if s is not None:
            return s
        tag = n[0]
        if tag == "name":
            if n[1] in names:
                return names[n[1]]
            if n[1] in gens:
                return gens[n[1]]
            raise UnknownSymbol(f"unknown symbol '{n[1]}'")
        if tag == "br":
            a, b = ev(n[1]), ev(n[2])
            if not isinstance(a, LieElement) or not isinstance(b, LieElement):
                raise ValueError("bracket of a scalar")
            return bracket(a, b)
        if tag in ("add", "sub"):
            a, b = ev(n[1]), ev(n[2])
            if not isinstance(a, LieElement) or not isinstance(b, LieElement):
                raise ValueError("cannot add a scalar to a Lie element")
            return a + b if tag == "add" else a - b
        if tag == "neg":
            return -ev(n[1])
        if tag == "mul":
            a, b = ev(n[1]), ev(n[2])
            if isinstance(a, LieElement) and isinstance(b, LieElement):
                raise ValueError("associative product is not a Lie operation; use [a,b]")
            return a.scale(b) if isinstance(a, LieElement) else b.scale(a)
        if tag == "div":
            a, b = ev(n[1]), ev(n[2])
            if isinstance(b, LieElement):
                raise ValueError("division by a Lie element")
            return a.scale(1 / Fraction(b))
        raise ValueError(f"operation '{tag}' not allowed in a Lie expression")

    out = ev(node)
    if not isinstance(out, LieElement):
        raise ValueError("expression is a scalar, not a Lie element")
    return out


def default_names(alg) -> Dict[str, Any]:
    """Basis labels (x0, y01, ...) mapped to the algebra generators."""
    return {alg.basis.label(i): alg.gen(i) for i in range(alg.nvars)}


def evaluate_nc(parsed, alg, names: Optional[Dict[str, Any]] = None):
    """Evaluate to an NCPoly; '*' is the straightened product, '/' only by scalars."""
    from .hall_lie import LieElement
    from .nc_algebra import NCPoly, commutator, multiply

    node = parsed.ast if isinstance(parsed, Parsed) else parsed
    table = default_names(alg)
    for key, val in (names or {}).items():
        table[key] = alg.from_lie(val) if isinstance(val, LieElement) else val

    def ev(n):
        s = _scalar_of(n)
        if s is not None:
            return alg.scalar(s)
        tag = n[0]
        if tag == "name":
            if n[1] not in table:
                raise UnknownSymbol(f"unknown symbol '{n[1]}'")
            return table[n[1]]
        if tag == "br":
            return commutator(ev(n[1]), ev(n[2]))
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "mul":
            return multiply(ev(n[1]), ev(n[2]))
        if tag == "pow":
            return ev(n[1]) ** n[2]
        if tag == "div":
            d = _scalar_of(n[2])
            if d is None:
                raise ValueError("division by a non-scalar needs a chart (append @U<i>)")
            if d == 0:
                raise ZeroDivisionError("division by zero")
            return ev(n[1]).scale(1 / d)
        raise ValueError(f"unsupported operation '{tag}'")

    return ev(node)


def evaluate_chart(parsed, chart, M: int, names: Optional[Dict[str, Any]] = None):
    """Evaluate to a ChartElement; '*' is the chart product, '/' divides coefficients
    by a product of chart factors."""
    from .hall_lie import LieElement
    from .localization import ChartError, ChartElement, chart_multiply, from_ncpoly, scalar

    alg = chart.alg
    node = parsed.ast if isinstance(parsed, Parsed) else parsed
    table = default_names(alg)
    for key, val in (names or {}).items():
        table[key] = alg.from_lie(val) if isinstance(val, LieElement) else val

    def lift(v):
        return v if isinstance(v, ChartElement) else from_ncpoly(chart, M, v)

    def ev(n):
        s = _scalar_of(n)
        if s is not None:
            return scalar(chart, M, s)
        tag = n[0]
        if tag == "name":
            if n[1] not in table:
                raise UnknownSymbol(f"unknown symbol '{n[1]}'")
            return lift(table[n[1]])
        if tag == "br":
            a, b = ev(n[1]), ev(n[2])
            return chart_multiply(a, b) - chart_multiply(b, a)
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "mul":
            return chart_multiply(ev(n[1]), ev(n[2]))
        if tag == "pow":
            base = ev(n[1])
            out = scalar(chart, M, 1)
            for _ in range(n[2]):
                out = chart_multiply(out, base)
            return out
        if tag == "div":
            den = ev(n[2])
            alpha0 = (0,) * (alg.nvars - alg.n_plus_1)
            if set(den.layers) - {alpha0} or alpha0 not in den.layers:
                raise ChartError("divisor must be a nonzero polynomial in x")
            r = den.layers[alpha0]
            if not r.is_polynomial():
                raise ChartError("divisor must be a polynomial")
            fe = chart.factor_exponents(r.num)
            if fe is None:
                raise ChartError(f"divisor {r} is not a product of chart factors")
            c, exps = fe
            num = ev(n[1]).scale(1 / c)
            return ChartElement(chart, M, {a: v.divide_by_factors(exps) for a, v in num.layers.items()})
        raise ValueError(f"unsupported operation '{tag}'")

    return ev(node)


def parse_poly(text: str, nvars: int, params: Optional[Dict[str, int]] = None):
    """Commutative polynomial in x0..x{nvars-1}."""
    from .poly import Poly

    if params:
        text = substitute_params(text, params)
    gens = {f"x{i}": Poly.var(nvars, i) for i in range(nvars)}
    return evaluate_commutative(parse(text), nvars, gens)


def evaluate_ordered(parsed, alg, names: Optional[Dict[str, Any]] = None):
    """Evaluate with commuting z-variables, then read the result as ordered monomials.

    This is the S (x) R^m coefficient model used for layer generators: the
    text "x1*y2" is the PBW monomial x1 y2 whatever the factor order.
    """
    from .hall_lie import LieElement
    from .poly import Poly

    nz = alg.nvars
    gens = {alg.basis.label(i): Poly.var(nz, i) for i in range(nz)}
    for key, val in (names or {}).items():
        if isinstance(val, LieElement):
            p = Poly(nz)
            for i, c in val.terms:
                p = p + Poly.var(nz, i) * c
            gens[key] = p
    return alg.ordered(evaluate_commutative(parsed, nz, gens))


def evaluate_commutative(parsed, nvars: int, gens: Dict[str, Any]):
    from .poly import Poly

    node = parsed.ast if isinstance(parsed, Parsed) else parsed

    def ev(n):
        s = _scalar_of(n)
        if s is not None:
            return Poly.constant(nvars, s)
        tag = n[0]
        if tag == "name":
            if n[1] not in gens:
                raise UnknownSymbol(f"unknown symbol '{n[1]}'")
            return gens[n[1]]
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "mul":
            return ev(n[1]) * ev(n[2])
        if tag == "pow":
            return ev(n[1]) ** n[2]
        if tag == "div":
            d = _scalar_of(n[2])
            if not d:
                raise ValueError("polynomial division only by nonzero scalars")
            return ev(n[1]) * (1 / d)
        if tag == "br":
            raise ValueError("brackets are not allowed in a commutative expression")
        raise ValueError(f"operation '{tag}' not allowed in a commutative polynomial")

    return ev(node)
