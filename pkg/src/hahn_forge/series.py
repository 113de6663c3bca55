"""Exact arithmetic for ordered Hahn series with finite support.

The scalar field is the rationals; exponents live in the group Q^d with
lexicographic order (rank d fixed per value, default 1).  A value of the
field is stored as a finite sum of monomials plus an optional precision
bound: ``TruncatedSeries(approx, prec)`` represents any x with
``v(x - approx) >= prec``.  All stored exponents sit strictly below the
precision bound, so arithmetic never has to guess hidden terms.

The order is the one that makes t a positive infinitesimal: the sign of a
nonzero element is the sign of its lowest-exponent coefficient.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    InsufficientPrecision,
    IrrationalLeadingCoefficient,
    NotInValuationRing,
    NotPositive,
    PrecisionStall,
    TermSyntaxError,
    UndecidableAtPrecision,
    ZeroOrUncertainLeadingTerm,
)

NEGATIVE = -1
ZERO = 0
POSITIVE = 1


class _Infinite:
    """Top element adjoined to the value group (valuation of zero)."""

    __slots__ = ()

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is INFINITE

    def __gt__(self, other):
        return other is not INFINITE

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return INFINITE

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("cannot negate the infinite valuation")

    def __repr__(self):
        return "Infinite"


INFINITE = _Infinite()


class GroupElement(tuple):
    """Point of Q^d with lexicographic order and componentwise addition.

    Subclasses tuple so comparisons and hashing run at C speed; ``+`` is
    redefined componentwise (no tuple concatenation on these).
    """

    __slots__ = ()

    def __new__(cls, coords):
        return tuple.__new__(cls, (q if isinstance(q, Fraction) else Fraction(q) for q in coords))

    @classmethod
    def zero(cls, rank=1):
        return cls([Fraction(0)] * rank)

    @classmethod
    def scalar(cls, q, rank=1):
        """Embed a rational as (q, 0, ..., 0)."""
        q = q if isinstance(q, Fraction) else Fraction(q)
        return cls([q] + [Fraction(0)] * (rank - 1))

    @property
    def rank(self):
        return len(self)

    def __add__(self, other):
        if isinstance(other, _Infinite):
            return INFINITE
        if len(self) == 1:
            return tuple.__new__(GroupElement, (self[0] + other[0],))
        return tuple.__new__(GroupElement, tuple(a + b for a, b in zip(self, other)))

    __radd__ = __add__

    def __sub__(self, other):
        if len(self) == 1:
            return tuple.__new__(GroupElement, (self[0] - other[0],))
        return tuple.__new__(GroupElement, tuple(a - b for a, b in zip(self, other)))

    def __neg__(self):
        return tuple.__new__(GroupElement, tuple(-a for a in self))

    def __mul__(self, k):
        return GroupElement(a * k for a in self)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return GroupElement(a / k for a in self)

    def is_zero(self):
        return not any(self)

    def first(self):
        return self[0]

    def __repr__(self):
        return f"GroupElement({format_exponent(self)!r})"


def _sign(q):
    return (q > 0) - (q < 0)


class HahnSeries:
    """Finite sum of monomials ``c * t^e`` with strictly ascending exponents.

    Immutable.  Zero is the empty term list.  ``rank`` is the rank of the
    exponent group and is carried explicitly so that the zero series knows
    where it lives.
    """

    __slots__ = ("terms", "rank")

    def __init__(self, terms, rank=1, _clean=True):
        if _clean:
            acc = {}
            for e, c in terms:
                if not isinstance(e, GroupElement):
                    e = GroupElement.scalar(e, rank)
                c = c if isinstance(c, Fraction) else Fraction(c)
                acc[e] = acc.get(e, Fraction(0)) + c
            cleaned = tuple(sorted((e, c) for e, c in acc.items() if c))
        else:
            cleaned = tuple(terms)
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "rank", rank)

    def __setattr__(self, *a):
        raise AttributeError("HahnSeries is immutable")

    @classmethod
    def zero(cls, rank=1):
        return cls((), rank, _clean=False)

    @classmethod
    def constant(cls, q, rank=1):
        q = q if isinstance(q, Fraction) else Fraction(q)
        if not q:
            return cls.zero(rank)
        return cls(((GroupElement.zero(rank), q),), rank, _clean=False)

    @classmethod
    def monomial(cls, coeff, exponent):
        coeff = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
        if not coeff:
            return cls.zero(exponent.rank)
        return cls(((exponent, coeff),), exponent.rank, _clean=False)

    def is_zero(self):
        return not self.terms

    def valuation(self):
        """Least exponent of the support; INFINITE for the zero series."""
        return self.terms[0][0] if self.terms else INFINITE

    def leading_coeff(self):
        return self.terms[0][1] if self.terms else Fraction(0)

    def coefficient(self, exponent):
        for e, c in self.terms:
            if e == exponent:
                return c
            if e > exponent:
                break
        return Fraction(0)

    def truncate_below(self, bound):
        """Drop all terms with exponent >= bound."""
        if bound is INFINITE:
            return self
        if self.rank == 1:
            p, q = None, None
            b0 = bound[0]
            p, q = b0.numerator, b0.denominator
            kept = tuple((e, c) for e, c in self.terms if e[0].numerator * q < p * e[0].denominator)
        else:
            kept = tuple((e, c) for e, c in self.terms if e < bound)
        return self if len(kept) == len(self.terms) else HahnSeries(kept, self.rank, _clean=False)

    def slice_window(self, lo, hi):
        """Terms with exponent in the closed window [lo, hi]."""
        return tuple((e, c) for e, c in self.terms if lo <= e <= hi)

    def __add__(self, other):
        a, b = self.terms, other.terms
        if not a:
            return other
        if not b:
            return self
        out = []
        i = j = 0
        na, nb = len(a), len(b)
        if self.rank == 1:
            # integer cross-comparison dodges the Fraction comparison overhead
            while i < na and j < nb:
                ea, ca = a[i]
                eb, cb = b[j]
                p, q = ea[0], eb[0]
                key = p.numerator * q.denominator - q.numerator * p.denominator
                if key < 0:
                    out.append((ea, ca))
                    i += 1
                elif key > 0:
                    out.append((eb, cb))
                    j += 1
                else:
                    c = ca + cb
                    if c:
                        out.append((ea, c))
                    i += 1
                    j += 1
        else:
            while i < na and j < nb:
                ea, ca = a[i]
                eb, cb = b[j]
                if ea < eb:
                    out.append((ea, ca))
                    i += 1
                elif eb < ea:
                    out.append((eb, cb))
                    j += 1
                else:
                    c = ca + cb
                    if c:
                        out.append((ea, c))
                    i += 1
                    j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return HahnSeries(tuple(out), self.rank, _clean=False)

    def __neg__(self):
        return HahnSeries(tuple((e, -c) for e, c in self.terms), self.rank, _clean=False)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a, b = self.terms, other.terms
        if not a or not b:
            return HahnSeries.zero(self.rank)
        if len(a) > len(b):
            a, b = b, a
        if len(a) == 1:
            ea, ca = a[0]
            return HahnSeries(tuple((ea + eb, ca * cb) for eb, cb in b), self.rank, _clean=False)
        if self.rank == 1:
            return self._mul_rank1(a, b)
        # hash-free accumulation: exponent comparison is cheap, hashing is not
        pairs = sorted(((ea + eb, ca * cb) for ea, ca in a for eb, cb in b), key=lambda t: t[0])
        out = []
        last_e, acc = pairs[0]
        for e, c in pairs[1:]:
            if e == last_e:
                acc += c
            else:
                if acc:
                    out.append((last_e, acc))
                last_e, acc = e, c
        if acc:
            out.append((last_e, acc))
        return HahnSeries(tuple(out), self.rank, _clean=False)

    def _mul_rank1(self, a, b):
        # put every exponent on one integer grid; int sort keys are cheap
        from math import lcm

        den = 1
        for e, _ in a:
            den = lcm(den, e[0].denominator)
        for e, _ in b:
            den = lcm(den, e[0].denominator)
        ia = [(e[0].numerator * (den // e[0].denominator), c) for e, c in a]
        ib = [(e[0].numerator * (den // e[0].denominator), c) for e, c in b]
        pairs = sorted(
            ((ka + kb, ca * cb) for ka, ca in ia for kb, cb in ib),
            key=lambda t: t[0],
        )
        out = []
        last_k, acc = pairs[0]
        for k, c in pairs[1:]:
            if k == last_k:
                acc += c
            else:
                if acc:
                    out.append((tuple.__new__(GroupElement, (Fraction(last_k, den),)), acc))
                last_k, acc = k, c
        if acc:
            out.append((tuple.__new__(GroupElement, (Fraction(last_k, den),)), acc))
        return HahnSeries(tuple(out), 1, _clean=False)

    def scale(self, q):
        q = q if isinstance(q, Fraction) else Fraction(q)
        if not q:
            return HahnSeries.zero(self.rank)
        return HahnSeries(tuple((e, c * q) for e, c in self.terms), self.rank, _clean=False)

    def shift(self, exponent):
        """Multiply by the monomial t^exponent."""
        return HahnSeries(tuple((e + exponent, c) for e, c in self.terms), self.rank, _clean=False)

    def __eq__(self, other):
        return isinstance(other, HahnSeries) and self.terms == other.terms and self.rank == other.rank

    def __hash__(self):
        return hash((self.terms, self.rank))

    def __repr__(self):
        return f"HahnSeries({format_series_body(self.terms, self.rank)!r})"


class TruncatedSeries:
    """A Hahn series known below a precision bound.

    Represents any field element x with ``v(x - approx) >= prec``.  With
    ``prec`` INFINITE the value is exact.  Stored exponents are strictly
    below ``prec``.
    """

    __slots__ = ("approx", "prec", "rank")

    def __init__(self, approx, prec=INFINITE):
        if prec is not INFINITE:
            approx = approx.truncate_below(prec)
        object.__setattr__(self, "approx", approx)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "rank", approx.rank)

    def __setattr__(self, *a):
        raise AttributeError("TruncatedSeries is immutable")

    @classmethod
    def exact(cls, approx):
        return cls(approx, INFINITE)

    @classmethod
    def zero(cls, rank=1):
        return cls(HahnSeries.zero(rank), INFINITE)

    @classmethod
    def one(cls, rank=1):
        return cls(HahnSeries.constant(1, rank), INFINITE)

    @classmethod
    def constant(cls, q, rank=1):
        return cls(HahnSeries.constant(q, rank), INFINITE)

    @classmethod
    def monomial(cls, coeff, exponent):
        return cls(HahnSeries.monomial(coeff, exponent), INFINITE)

    def is_exact(self):
        return self.prec is INFINITE

    def is_exact_zero(self):
        return self.prec is INFINITE and self.approx.is_zero()

    def valuation_lower_bound(self):
        """v of the true value is at least this (exactly v(approx) if nonempty)."""
        return self.approx.valuation() if self.approx.terms else self.prec

    def truncate(self, prec):
        new = prec if self.prec is INFINITE else min(self.prec, prec)
        return TruncatedSeries(self.approx, new)

    def __add__(self, other):
        return field_op("add", self, other)

    def __sub__(self, other):
        return field_op("sub", self, other)

    def __mul__(self, other):
        return field_op("mul", self, other)

    def __neg__(self):
        return TruncatedSeries(-self.approx, self.prec)

    def scale(self, q):
        return TruncatedSeries(self.approx.scale(q), self.prec)

    def shift(self, exponent):
        p = self.prec if self.prec is INFINITE else self.prec + exponent
        return TruncatedSeries(self.approx.shift(exponent), p)

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSeries)
            and self.approx == other.approx
            and (self.prec is other.prec or self.prec == other.prec)
        )

    def __hash__(self):
        key = None if self.prec is INFINITE else self.prec
        return hash((self.approx, key))

    def __repr__(self):
        return f"TruncatedSeries({format_series(self)!r})"


def field_op(kind, a, b):
    """Ring operation with precision propagation.

    add/sub: result precision is min of the operand precisions.  mul: the
    unknown tail of one factor meets the known part of the other at
    ``prec_a + v(b)`` (and symmetrically), and the two tails meet at
    ``prec_a + prec_b``; the result precision is the min of the three.
    """
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    if kind == "add":
        return TruncatedSeries(a.approx + b.approx, _min_prec(a.prec, b.prec))
    if kind == "sub":
        return TruncatedSeries(a.approx - b.approx, _min_prec(a.prec, b.prec))
    if kind == "mul":
        if a.is_exact_zero() or b.is_exact_zero():
            return TruncatedSeries.zero(a.rank)
        prec = _min_prec(
            a.prec + b.valuation_lower_bound(),
            b.prec + a.valuation_lower_bound(),
            a.prec + b.prec,
        )
        return TruncatedSeries(a.approx * b.approx, prec)
    raise ValueError(f"unknown field op {kind!r}")


def _min_prec(*precs):
    out = INFINITE
    for p in precs:
        if p is INFINITE:
            continue
        if out is INFINITE or p < out:
            out = p
    return out


def compare_sign(a):
    """Sign of the element: the sign of its leading coefficient.

    Zero only for the exact zero series; an all-unknown truncation cannot
    be signed and raises instead of guessing.
    """
    if a.approx.terms:
        return _sign(a.approx.leading_coeff())
    if a.prec is INFINITE:
        return ZERO
    raise UndecidableAtPrecision("sign of 0 + O(...) is not determined")


def valuation(a):
    """Least exponent of the support; INFINITE for exact zero."""
    if a.approx.terms:
        return a.approx.valuation()
    if a.prec is INFINITE:
        return INFINITE
    raise UndecidableAtPrecision("valuation of 0 + O(...) is not determined")


def standard_part(a):
    """The rational closest to a finite element: its coefficient at exponent 0."""
    v = valuation(a)
    if v is not INFINITE and _sign_of_exponent(v) < 0:
        raise NotInValuationRing("element has negative valuation")
    zero_exp = GroupElement.zero(a.rank)
    if a.prec is not INFINITE and not (a.prec > zero_exp):
        raise UndecidableAtPrecision("constant term lies beyond the stored precision")
    return a.approx.coefficient(zero_exp)


def _sign_of_exponent(e):
    for q in e:
        if q:
            return 1 if q > 0 else -1
    return 0


def invert(a, target_prec):
    """Multiplicative inverse with residual ``v(a*x - 1) >= target_prec - 2 v(a)``.

    Exact monomials invert exactly.  Otherwise the leading term is split
    off and the unit part is inverted by a truncated geometric series.
    """
    if not a.approx.terms:
        raise ZeroOrUncertainLeadingTerm("no determined leading term to invert")
    g = a.approx.valuation()
    c = a.approx.leading_coeff()
    if len(a.approx.terms) == 1 and a.prec is INFINITE:
        return TruncatedSeries.monomial(1 / c, -g)
    if target_prec is INFINITE:
        raise ValueError("invert needs a finite target precision for non-monomials")
    rel_needed = target_prec - g - g  # relative precision of the unit part
    rel_have = INFINITE if a.prec is INFINITE else a.prec - g
    if rel_have is not INFINITE and rel_have < rel_needed:
        raise InsufficientPrecision("operand precision cannot support the requested inverse")
    # u = unit part minus one: exponents strictly positive
    unit = a.approx.shift(-g).scale(1 / c)
    u = unit - HahnSeries.constant(1, a.rank)
    neg_u = -u
    acc = HahnSeries.constant(1, a.rank)
    power = HahnSeries.constant(1, a.rank)
    guard = _geometric_guard(u, rel_needed)
    for _ in range(guard):
        power = (power * neg_u).truncate_below(rel_needed)
        if power.is_zero():
            break
        acc = acc + power
    else:
        raise PrecisionStall("geometric refinement did not reach the requested depth")
    x = acc.shift(-g).scale(1 / c)
    return TruncatedSeries(x, rel_needed - g)


def _geometric_guard(u, rel_needed):
    """Iteration cap for the geometric series: valuations of u-powers grow by v(u)."""
    vu = u.valuation()
    if vu is INFINITE:
        return 1
    v1, r1 = vu.first(), rel_needed.first()
    if v1 <= 0:
        if r1 > 0:
            raise PrecisionStall(
                "leading gap of the unit part has zero first coordinate; "
                "cannot bound the refinement depth in lexicographic rank > 1"
            )
        return 4
    import math

    return max(2, math.ceil(r1 / v1) + 2)


def _integer_nth_root(m, n):
    """Exact integer n-th root, or None."""
    if m == 0:
        return 0
    r = round(m ** (1.0 / n)) if m.bit_length() < 512 else 1 << (m.bit_length() // n)
    # fix up float error; loop is short
    while r ** n > m:
        r -= 1
    while (r + 1) ** n <= m:
        r += 1
    return r if r ** n == m else None


def _rational_nth_root(q, n):
    num = _integer_nth_root(q.numerator, n)
    den = _integer_nth_root(q.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def nth_root(a, n, target_prec):
    """Unique positive n-th root of a positive element.

    Splits off the monomial carrying v(a)/n, then lifts the unit part by
    Newton iteration for y^n = u starting at the residue root.  Exact when
    the iteration lands on an exact finite-support root.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if compare_sign(a) != POSITIVE:
        raise NotPositive("n-th root requires a positive element")
    g = a.approx.valuation()
    c0 = a.approx.leading_coeff()
    root_c = _rational_nth_root(c0, n)
    if root_c is None:
        raise IrrationalLeadingCoefficient(
            f"{c0} has no rational {n}-th root; rational-coefficient values only"
        )
    g_over_n = g / n
    b = TruncatedSeries.monomial(root_c, g_over_n)
    unit = TruncatedSeries(a.approx.shift(-g).scale(1 / c0), INFINITE if a.prec is INFINITE else a.prec - g)
    one = TruncatedSeries.one(a.rank)
    if unit == one:
        return b
    res_target = target_prec - g  # v(y^n - u) >= this
    if a.prec is not INFINITE and a.prec - g < res_target:
        raise InsufficientPrecision("operand precision cannot support the requested root")
    work = res_target
    y = one
    for _ in range(64):
        yn = _int_pow(y, n, work)
        residual = yn - unit
        if residual.approx.is_zero():
            if residual.is_exact() and a.is_exact():
                return b * y
            break
        if residual.approx.valuation() >= res_target:
            break
        deriv = _int_pow(y, n - 1, work).scale(n)
        y = (y - residual * invert(deriv, work)).truncate(work)
    x = b * y
    if a.is_exact():
        # the iterate may have landed on the exact root plus junk at the
        # precision edge; trim from the top and test by powering back
        terms = x.approx.terms
        for cut in range(len(terms), 0, -1):
            cand = TruncatedSeries.exact(HahnSeries(terms[:cut], a.rank, _clean=False))
            if _int_pow(cand, n, INFINITE).approx == a.approx:
                return cand
    return x.truncate(res_target + g_over_n)


def _int_pow(x, k, prec):
    out = TruncatedSeries.one(x.rank)
    for _ in range(k):
        out = out * x
        if prec is not INFINITE:
            out = out.truncate(prec)
    return out


# ---------------------------------------------------------------------------
# text format


def format_rational(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_exponent(e):
    return ",".join(format_rational(q) for q in e)


def format_series_body(terms, rank):
    if not terms:
        return "0"
    zero_exp = GroupElement.zero(rank)
    parts = []
    for i, (e, c) in enumerate(terms):
        body = format_rational(abs(c)) if e == zero_exp else f"{format_rational(abs(c))}*t^({format_exponent(e)})"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(parts)


def format_series(ts):
    body = format_series_body(ts.approx.terms, ts.rank)
    if ts.prec is INFINITE:
        return body
    return f"{body} + O(t^({format_exponent(ts.prec)}))"


def parse_rational(text):
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise TermSyntaxError(f"bad rational {text!r}") from exc


def parse_exponent(text, rank=1):
    parts = [parse_rational(p) for p in text.split(",")]
    if len(parts) != rank:
        raise TermSyntaxError(f"exponent {text!r} has rank {len(parts)}, expected {rank}")
    return GroupElement(parts)


class _SeriesScanner:
    """Tokenizer for the series grammar; whitespace-insensitive."""

    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message):
        raise TermSyntaxError(message, col=self.pos + 1)

    def expect(self, literal):
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            self.error(f"expected {literal!r}")
        self.pos += len(literal)

    def integer(self):
        self.skip_ws()
        start = self.pos
        ch = self.peek()
        if ch and ch in "+-":
            self.pos += 1
        digits_start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits_start:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def rational(self):
        num = self.integer()
        if self.peek() == "/":
            self.pos += 1
            den = self.integer()
            if den <= 0:
                self.error("denominator must be positive")
            return Fraction(num, den)
        return Fraction(num)

    def exponent(self, rank):
        self.expect("t^(")
        coords = [self.rational()]
        while self.peek() == ",":
            self.pos += 1
            coords.append(self.rational())
        self.expect(")")
        if len(coords) != rank:
            self.error(f"exponent rank {len(coords)}, expected {rank}")
        return GroupElement(coords)

    def term(self, rank):
        if self.peek() == "t":
            return self.exponent(rank), Fraction(1)
        coeff = self.rational()
        if self.peek() == "*":
            self.pos += 1
            return self.exponent(rank), coeff
        return GroupElement.zero(rank), coeff

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)


def parse_series(text, rank=1):
    """Parse the series text grammar, with optional trailing ``+ O(t^(p))``."""
    text = text.strip()
    prec = INFINITE
    marker = text.rfind("O(t^(")
    if marker != -1:
        head = text[:marker].rstrip()
        if not head.endswith("+"):
            raise TermSyntaxError("precision annotation must be added with '+'", col=marker)
        tail = text[marker:]
        if not tail.endswith("))"):
            raise TermSyntaxError("unterminated precision annotation", col=len(text))
        prec = parse_exponent(tail[len("O(t^(") : -2], rank)
        text = head[:-1].strip()
    sc = _SeriesScanner(text)
    if sc.peek() == "" and prec is not INFINITE:
        return TruncatedSeries(HahnSeries.zero(rank), prec)
    if sc.peek() == "0" and len(text) == 1:
        return TruncatedSeries(HahnSeries.zero(rank), prec)
    terms = []
    e, c = sc.term(rank)
    terms.append((e, c))
    while not sc.at_end():
        op = sc.peek()
        if op not in "+-":
            sc.error(f"expected '+' or '-', found {op!r}")
        sc.pos += 1
        e, c = sc.term(rank)
        terms.append((e, -c if op == "-" else c))
    return TruncatedSeries(HahnSeries(terms, rank), prec)
