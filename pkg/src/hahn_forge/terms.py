"""One-variable term language over the series field.

Grammar (sums of products of signed powers of atoms):

    term  := sum
    sum   := prod (('+'|'-') prod)*
    prod  := unary (('*'|'/') unary)*
    unary := atom | '-' unary
    atom  := rational | 't^(' exp ')' | 'x' | ident '(' term (',' term)* ')'
           | '(' term ')' | atom '^' integer

Application arities are checked against the function registry at parse
time; ``inv`` is the built-in field inversion.  The printer emits a
canonical spacing that the parser maps back to the identical tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .analytic import default_registry, evaluate_analytic
from .errors import (
    ArityMismatch,
    BudgetExhausted,
    DivisionByZero,
    DomainError,
    NotInfinitesimal,
    TermSyntaxError,
    UnknownFunction,
)
from .series import (
    GroupElement,
    INFINITE,
    TruncatedSeries,
    format_exponent,
    format_rational,
    invert,
)


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Term):
    value: Fraction


@dataclass(frozen=True)
class Mono(Term):
    exponent: GroupElement


@dataclass(frozen=True)
class Var(Term):
    pass


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Div(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg(Term):
    operand: Term


@dataclass(frozen=True)
class Pow(Term):
    base: Term
    exponent: int


@dataclass(frozen=True)
class App(Term):
    name: str
    args: tuple


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def _line_col(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        start = self.text.rfind("\n", 0, pos) + 1
        return line, pos - start + 1

    def error(self, message, pos=None):
        line, col = self._line_col(self.pos if pos is None else pos)
        raise TermSyntaxError(message, line, col)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n":
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, literal):
        self.skip_ws()
        return self.text.startswith(literal, self.pos)

    def take(self, literal):
        if not self.startswith(literal):
            self.error(f"expected {literal!r}")
        self.pos += len(literal)

    def integer(self):
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer")
        return int(self.text[start : self.pos])

    def rational(self):
        num = self.integer()
        save = self.pos
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "/":
            # a denominator only if digits follow directly
            probe = self.pos + 1
            while probe < len(self.text) and self.text[probe] in " \t":
                probe += 1
            if probe < len(self.text) and self.text[probe].isdigit():
                self.pos += 1
                den = self.integer()
                if den <= 0:
                    self.error("denominator must be positive")
                return Fraction(num, den)
        self.pos = save
        return Fraction(num)

    def ident(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start : self.pos]

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)


class _Parser:
    def __init__(self, text, registry, rank):
        self.sc = _Scanner(text)
        self.registry = registry
        self.rank = rank

    def parse(self):
        node = self.sum()
        if not self.sc.at_end():
            self.sc.error("trailing input after the term")
        return node

    def sum(self):
        node = self.prod()
        while True:
            ch = self.sc.peek()
            if ch == "+":
                self.sc.pos += 1
                node = Add(node, self.prod())
            elif ch == "-":
                self.sc.pos += 1
                node = Sub(node, self.prod())
            else:
                return node

    def prod(self):
        node = self.unary()
        while True:
            ch = self.sc.peek()
            if ch == "*":
                self.sc.pos += 1
                node = Mul(node, self.unary())
            elif ch == "/":
                self.sc.pos += 1
                denom = self.unary()
                if _is_literal_zero(denom):
                    self.sc.error("division by the literal zero")
                node = Div(node, denom)
            else:
                return node

    def unary(self):
        if self.sc.peek() == "-":
            self.sc.pos += 1
            return Neg(self.unary())
        return self.atom_with_power()

    def atom_with_power(self):
        node = self.atom()
        while self.sc.peek() == "^":
            self.sc.pos += 1
            node = Pow(node, self.sc.integer())
        return node

    def atom(self):
        ch = self.sc.peek()
        if ch == "(":
            self.sc.pos += 1
            node = self.sum()
            self.sc.take(")")
            return node
        if ch.isdigit():
            return Lit(self.sc.rational())
        if ch == "t" and self.sc.startswith("t^("):
            self.sc.take("t^(")
            coords = [self.sc.rational()]
            while self.sc.peek() == ",":
                self.sc.pos += 1
                coords.append(self.sc.rational())
            self.sc.take(")")
            if len(coords) != self.rank:
                self.sc.error(f"exponent rank {len(coords)}, expected {self.rank}")
            return Mono(GroupElement(coords))
        if ch == "x" and not self._ident_continues(1):
            self.sc.pos += 1
            return Var()
        if ch.isalpha() or ch == "_":
            start = self.sc.pos
            name = self.sc.ident()
            if self.sc.peek() != "(":
                self.sc.error(f"unknown atom {name!r}", pos=start)
            self.sc.take("(")
            args = [self.sum()]
            while self.sc.peek() == ",":
                self.sc.pos += 1
                args.append(self.sum())
            self.sc.take(")")
            self._check_application(name, args, start)
            return App(name, tuple(args))
        self.sc.error(f"unexpected character {ch!r}" if ch else "unexpected end of input")

    def _ident_continues(self, offset):
        pos = self.sc.pos + offset
        return pos < len(self.sc.text) and (self.sc.text[pos].isalnum() or self.sc.text[pos] == "_")

    def _check_application(self, name, args, pos):
        if name == "inv":
            if len(args) != 1:
                raise ArityMismatch("inv takes exactly one argument")
            if _is_literal_zero(args[0]):
                self.sc.error("inversion of the literal zero")
            return
        fn = self.registry.get(name)
        if fn is None:
            raise UnknownFunction(f"function {name!r} is not registered")
        if fn.nvars != len(args):
            raise ArityMismatch(f"{name} takes {fn.nvars} arguments, got {len(args)}")


def _is_literal_zero(node):
    if isinstance(node, Lit):
        return node.value == 0
    if isinstance(node, Neg):
        return _is_literal_zero(node.operand)
    return False


def parse_term(text, registry=None, rank=1):
    registry = registry if registry is not None else default_registry()
    return _Parser(text, registry, rank).parse()


_SUM, _PROD, _UNARY, _POW, _ATOM = range(5)


def print_term(node, level=_SUM):
    if isinstance(node, Lit):
        body = format_rational(node.value)
        needs = _ATOM if node.value >= 0 else _UNARY
        return _wrap(body, needs, level)
    if isinstance(node, Mono):
        return f"t^({format_exponent(node.exponent)})"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Add):
        return _wrap(f"{print_term(node.left, _SUM)} + {print_term(node.right, _PROD)}", _SUM, level)
    if isinstance(node, Sub):
        return _wrap(f"{print_term(node.left, _SUM)} - {print_term(node.right, _PROD)}", _SUM, level)
    if isinstance(node, Mul):
        return _wrap(f"{print_term(node.left, _PROD)}*{print_term(node.right, _UNARY)}", _PROD, level)
    if isinstance(node, Div):
        right = print_term(node.right, _UNARY)
        if right[0].isdigit():
            # keep the divisor from lexing as the tail of a rational literal
            right = f"({right})"
        return _wrap(f"{print_term(node.left, _PROD)}/{right}", _PROD, level)
    if isinstance(node, Neg):
        return _wrap(f"-{print_term(node.operand, _UNARY)}", _UNARY, level)
    if isinstance(node, Pow):
        return _wrap(f"{print_term(node.base, _ATOM)}^{node.exponent}", _POW, level)
    if isinstance(node, App):
        args = ", ".join(print_term(a, _SUM) for a in node.args)
        return f"{node.name}({args})"
    raise TypeError(f"not a term node: {node!r}")


def _wrap(body, have, want):
    return body if have >= want else f"({body})"


def eval_term(node, x, target_prec, registry=None, inv_zero_is_zero=False):
    """Exact-mode evaluation at a point, precision propagated per operation."""
    registry = registry if registry is not None else default_registry()
    rank = x.rank

    def ev(node):
        if isinstance(node, Lit):
            return TruncatedSeries.constant(node.value, rank)
        if isinstance(node, Mono):
            return TruncatedSeries.monomial(Fraction(1), node.exponent)
        if isinstance(node, Var):
            return x
        if isinstance(node, Add):
            return ev(node.left) + ev(node.right)
        if isinstance(node, Sub):
            return ev(node.left) - ev(node.right)
        if isinstance(node, Mul):
            return ev(node.left) * ev(node.right)
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Div):
            return _divide(ev(node.left), ev(node.right))
        if isinstance(node, Pow):
            return _power(ev(node.base), node.exponent)
        if isinstance(node, App):
            if node.name == "inv":
                return _divide(TruncatedSeries.one(rank), ev(node.args[0]))
            fn = registry.get(node.name)
            if fn is None:
                raise UnknownFunction(f"function {node.name!r} is not registered")
            args = [ev(a) for a in node.args]
            try:
                return evaluate_analytic(fn, args, target_prec)
            except NotInfinitesimal as exc:
                raise DomainError(str(exc)) from exc
        raise TypeError(f"not a term node: {node!r}")

    def _divide(a, b):
        if b.is_exact_zero():
            if inv_zero_is_zero:
                return TruncatedSeries.zero(rank)
            raise DivisionByZero("exact zero denominator")
        return a * invert(b, target_prec)

    def _power(base, n):
        if n < 0:
            return _divide(TruncatedSeries.one(rank), _power(base, -n))
        out = TruncatedSeries.one(rank)
        for _ in range(n):
            out = out * base
        return out

    value = ev(node)
    # clip stored data to the target, keeping exact values exact
    if any(e >= target_prec for e, _ in value.approx.terms):
        value = value.truncate(target_prec)
    return value


# ---------------------------------------------------------------------------
# polynomial skeleton extraction and preparation


def _poly_pad(a, b):
    n = max(len(a), len(b))
    zero = TruncatedSeries.zero()
    a = list(a) + [zero] * (n - len(a))
    b = list(b) + [zero] * (n - len(b))
    return a, b


def _poly_of(node, rank):
    """Dense coefficient list when the subterm is polynomial in x, else None."""
    if isinstance(node, Lit):
        return [TruncatedSeries.constant(node.value, rank)]
    if isinstance(node, Mono):
        return [TruncatedSeries.monomial(Fraction(1), node.exponent)]
    if isinstance(node, Var):
        return [TruncatedSeries.zero(rank), TruncatedSeries.one(rank)]
    if isinstance(node, (Add, Sub)):
        left = _poly_of(node.left, rank)
        right = _poly_of(node.right, rank)
        if left is None or right is None:
            return None
        left, right = _poly_pad(left, right)
        op = (lambda a, b: a + b) if isinstance(node, Add) else (lambda a, b: a - b)
        return [op(a, b) for a, b in zip(left, right)]
    if isinstance(node, Mul):
        left = _poly_of(node.left, rank)
        right = _poly_of(node.right, rank)
        if left is None or right is None:
            return None
        out = [TruncatedSeries.zero(rank) for _ in range(len(left) + len(right) - 1)]
        for i, a in enumerate(left):
            for j, b in enumerate(right):
                out[i + j] = out[i + j] + a * b
        return out
    if isinstance(node, Neg):
        inner = _poly_of(node.operand, rank)
        return None if inner is None else [-c for c in inner]
    if isinstance(node, Pow):
        if node.exponent < 0:
            return None
        base = _poly_of(node.base, rank)
        if base is None:
            return None
        out = [TruncatedSeries.one(rank)]
        for _ in range(node.exponent):
            mul = [TruncatedSeries.zero(rank) for _ in range(len(out) + len(base) - 1)]
            for i, a in enumerate(out):
                for j, b in enumerate(base):
                    mul[i + j] = mul[i + j] + a * b
            out = mul
        return out
    return None


def _trim_poly(coeffs):
    while coeffs and coeffs[-1].is_exact_zero():
        coeffs.pop()
    return coeffs


def candidate_polynomials(node, rank=1):
    """Maximal polynomial subterms, denominators, and analytic arguments."""
    out = []

    def visit(node):
        coeffs = _poly_of(node, rank)
        if coeffs is not None:
            coeffs = _trim_poly(coeffs)
            if len(coeffs) >= 2:
                out.append(coeffs)
            return
        if isinstance(node, (Add, Sub, Mul)):
            visit(node.left)
            visit(node.right)
        elif isinstance(node, Div):
            visit(node.left)
            visit(node.right)
        elif isinstance(node, Neg):
            visit(node.operand)
        elif isinstance(node, Pow):
            visit(node.base)
        elif isinstance(node, App):
            for a in node.args:
                visit(a)

    visit(node)
    return out


def prepare_term(node, lam, budget=3, trials=300, rng_seed=0, registry=None):
    """Preparing set for a term: candidate points from its polynomial parts.

    The candidate set is the union of the polynomial preparing sets of all
    maximal polynomial subterms, denominators, and analytic arguments; it
    is returned only with a passing verification report, deepening within
    the budget otherwise.
    """
    from .prepare import PreparingPoint, PreparingSet, poly_text, puiseux_roots
    from .prepare import verify_preparation

    registry = registry if registry is not None else default_registry()
    candidates = candidate_polynomials(node, rank=1)
    lam_first = lam.first()

    def term_fn(x, prec):
        return eval_term(node, x, prec, registry)

    depth = lam_first + 4
    best = None
    for _ in range(max(1, budget)):
        points = []
        for coeffs in candidates:
            chain = list(coeffs)
            order = 0
            while len(chain) >= 2:
                text = poly_text(chain)
                for root in puiseux_roots(chain, depth):
                    if root.is_real():
                        points.append(PreparingPoint(root.to_series(), root.depth, text, order))
                chain = [c.scale(k) for k, c in enumerate(chain)][1:]
                order += 1
        if not points:
            points = [PreparingPoint(TruncatedSeries.zero(), INFINITE, "0", 0)]
        seen = {}
        for pt in points:
            seen.setdefault(pt.series, pt)
        prep = PreparingSet(list(seen.values()))
        report = verify_preparation(term_fn, prep, lam, trials, rng_seed)
        if report.passed():
            return prep, report
        best = report
        depth += 4
    raise BudgetExhausted("preparation budget exhausted", report=best)

