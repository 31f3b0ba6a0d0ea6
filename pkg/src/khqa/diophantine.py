"""Diophantine polynomials: parsing, exact evaluation and a bounded search oracle."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError, BudgetExceeded, ExpressionSyntaxError, ParameterError

MAX_VARS = 8
DEFAULT_BUDGET = 2_000_000
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class Polynomial:
    """Canonical multivariate integer polynomial.

    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    integer coefficients; ``names`` are used only for printing.
    """

    num_vars: int
    terms: dict = field(default_factory=dict)
    names: tuple = ()

    def __post_init__(self):
        clean = {}
        for exps, c in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.num_vars:
                raise ArityError("exponent vector length differs from num_vars",
                                 exponents=exps, num_vars=self.num_vars)
            if any(e < 0 for e in exps):
                raise ParameterError("negative exponent", exponents=exps)
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c})
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.num_vars)))
        elif len(self.names) != self.num_vars:
            raise ArityError("names length differs from num_vars", names=self.names)

    # -- algebra used by the parser ------------------------------------------------
    @classmethod
    def constant(cls, c, num_vars, names=()):
        return cls(num_vars, {(0,) * num_vars: c}, names)

    @classmethod
    def variable(cls, i, num_vars, names=()):
        exps = [0] * num_vars
        exps[i] = 1
        return cls(num_vars, {tuple(exps): 1}, names)

    def _check(self, other):
        if other.num_vars != self.num_vars:
            raise ArityError("polynomials over different variable sets")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(self.num_vars, terms, self.names)

    def __neg__(self):
        return Polynomial(self.num_vars, {e: -c for e, c in self.terms.items()}, self.names)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        terms = {}
        for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            e = tuple(a + b for a, b in zip(e1, e2))
            terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial(self.num_vars, terms, self.names)

    def __pow__(self, k):
        if k < 0:
            raise ParameterError("negative exponent", exponent=k)
        result = Polynomial.constant(1, self.num_vars, self.names)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def __str__(self):
        return format_polynomial(self)


def format_polynomial(p: Polynomial) -> str:
    """Render in the input grammar; ``parse(format_polynomial(p)) == p``."""
    if p.is_zero():
        return "0"
    out = []
    # graded lexicographic, highest degree first
    for exps in sorted(p.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
        c = p.terms[exps]
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(p.names, exps) if e]
        mag = abs(c)
        body = "*".join(([str(mag)] if mag != 1 or not factors else []) + factors)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


# ---------------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^()]))")
_XNAME = re.compile(r"x([1-9]\d*)$")


def _tokenize(text):
    tokens = []
    pos = 0
    text_len = len(text)
    while pos < text_len:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[col]!r}", col, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "num" and "." in value:
            raise ExpressionSyntaxError(f"non-integer coefficient {value!r}", start, text)
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, index, num_vars, names):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.index = index
        self.k = num_vars
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ExpressionSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos, self.text)

    def expr(self):
        negate = False
        if self.peek()[1] == "-":
            self.take()
            negate = True
        acc = self.term()
        if negate:
            acc = -acc
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self):
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            kind, v, pos = self.take()
            if v == "-":
                raise ExpressionSyntaxError("negative exponent", pos, self.text)
            if kind != "num":
                raise ExpressionSyntaxError("exponent must be a nonnegative integer", pos, self.text)
            base = base ** int(v)
        return base

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Polynomial.constant(int(v), self.k, self.names)
        if kind == "ident":
            return Polynomial.variable(self.index[v], self.k, self.names)
        if v == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExpressionSyntaxError(f"unexpected {v or 'end of input'!r}", pos, self.text)


def _variable_order(tokens, num_vars, max_vars):
    idents = []
    for kind, v, _ in tokens:
        if kind == "ident" and v not in idents:
            idents.append(v)
    if idents and all(_XNAME.match(v) for v in idents):
        k = max(int(_XNAME.match(v).group(1)) for v in idents)
        if num_vars is not None:
            if num_vars < k:
                raise ArityError(f"expression uses x{k} but num_vars={num_vars}", num_vars=num_vars)
            k = num_vars
        index = {v: int(_XNAME.match(v).group(1)) - 1 for v in idents}
        names = tuple(f"x{i + 1}" for i in range(k))
    else:
        k = len(idents)
        if num_vars is not None:
            if num_vars < k:
                raise ArityError(f"expression has {k} variables but num_vars={num_vars}", num_vars=num_vars)
            extra = [f"_{i}" for i in range(num_vars - k)]
            idents = idents + extra
            k = num_vars
        index = {v: i for i, v in enumerate(idents)}
        names = tuple(idents)
    if k > max_vars:
        raise ParameterError(f"{k} variables exceeds the configured maximum {max_vars}", num_vars=k)
    return index, k, names


def parse(text: str, num_vars: int | None = None, max_vars: int = MAX_VARS) -> Polynomial:
    """Parse an integer polynomial expression.

    Variables named ``x1 .. xk`` map to modes by index; any other naming is
    ordered by first appearance. ``num_vars`` pads the variable set (useful
    for constant polynomials).

    >>> parse("(x1 - 1)^2 + 2").terms == {(2,): 1, (1,): -2, (0,): 3}
    True
    """
    tokens = _tokenize(text)
    index, k, names = _variable_order(tokens, num_vars, max_vars)
    parser = _Parser(text, index, k, names)
    if parser.peek()[0] == "end":
        raise ExpressionSyntaxError("empty expression", 0, text)
    poly = parser.expr()
    kind, v, pos = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {v!r}", pos, text)
    return poly


# ---------------------------------------------------------------------------------
# evaluation

def _horner(terms, point):
    """Nested evaluation on the first variable, recursing on the rest."""
    if not point:
        return sum(terms.values())
    by_power = {}
    for exps, c in terms.items():
        by_power.setdefault(exps[0], {})[exps[1:]] = c
    x = point[0]
    acc = 0
    for power in range(max(by_power), -1, -1):
        acc *= x
        if power in by_power:
            acc += _horner(by_power[power], point[1:])
    return acc


def evaluate(p: Polynomial, point) -> int:
    """Exact integer value of ``p`` at a point of nonnegative integers."""
    point = tuple(int(x) for x in point)
    if len(point) != p.num_vars:
        raise ArityError(f"point has {len(point)} coordinates, polynomial has {p.num_vars} variables",
                         point=point, num_vars=p.num_vars)
    if not p.terms:
        return 0
    return _horner(p.terms, point)


def magnitude_bound(p: Polynomial, dims) -> int:
    """Upper bound of |p| over the box ``prod(range(d) for d in dims)``."""
    total = 0
    for exps, c in p.terms.items():
        m = abs(c)
        for e, d in zip(exps, dims):
            m *= (d - 1) ** e
        total += m
    return total


def evaluate_grid(p: Polynomial, dims) -> np.ndarray:
    """Values of ``p`` on the whole box, C-ordered (first variable slowest).

    Uses int64 arithmetic when the magnitude bound permits, Python integers
    (object arrays) otherwise. Either way the result is exact.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != p.num_vars:
        raise ArityError("dims length differs from num_vars", dims=dims, num_vars=p.num_vars)
    bound = magnitude_bound(p, dims)
    dtype = np.int64 if bound < _INT64_SAFE else object
    out = np.zeros(dims, dtype=dtype)
    axes = [np.arange(d, dtype=np.int64).astype(dtype) for d in dims]
    for exps, c in p.terms.items():
        term = np.array(c, dtype=dtype)
        for i, e in enumerate(exps):
            if e:
                shape = [1] * len(dims)
                shape[i] = dims[i]
                term = term * (axes[i] ** e).reshape(shape)
        out = out + term
    return out


def square_exact(values: np.ndarray, bound: int) -> np.ndarray:
    """Elementwise square without int64 wrap-around."""
    if values.dtype != object and bound * bound < _INT64_SAFE:
        return values * values
    obj = values.astype(object)
    return obj * obj


# ---------------------------------------------------------------------------------
# oracle

@dataclass(frozen=True)
class OracleVerdict:
    solvable_in_box: bool
    witness: tuple | None
    min_value: int
    minimizers: list
    box_bound: int

    def to_dict(self):
        return {
            "solvable_in_box": self.solvable_in_box,
            "witness": list(self.witness) if self.witness is not None else None,
            "min_value": self.min_value,
            "minimizers": [list(m) for m in self.minimizers],
            "box_bound": self.box_bound,
        }


def oracle_search(p: Polynomial, bound: int, budget: int = DEFAULT_BUDGET) -> OracleVerdict:
    """Exhaustive minimization of ``D^2`` over ``{0..bound}^k``."""
    if bound < 0:
        raise ParameterError("bound must be nonnegative", bound=bound)
    size = (bound + 1) ** p.num_vars
    if size > budget:
        raise BudgetExceeded(f"box of {size} points exceeds the enumeration budget {budget}",
                             size=size, budget=budget)
    dims = (bound + 1,) * p.num_vars
    values = evaluate_grid(p, dims).reshape(-1)
    squares = square_exact(values, magnitude_bound(p, dims))
    min_value = int(squares.min())
    flat = np.flatnonzero(squares == min_value)
    minimizers = [tuple(int(i) for i in np.unravel_index(f, dims)) for f in flat]
    solvable = min_value == 0
    return OracleVerdict(solvable, minimizers[0] if solvable else None, min_value, minimizers, bound)
