"""Exact arithmetic for real algebraic numbers, sized for root expansion.

A number is a polynomial in one generator theta, reduced modulo a
squarefree integer annihilator of theta; theta itself is pinned by an
isolating interval with rational endpoints.  Ring operations are exact.
Sign queries refine the interval by bisection against the witness
polynomial; zero tests run a gcd against the witness, and any nontrivial
gcd lets us shrink the witness to the factor that actually vanishes at
theta, so the representation sharpens as it is used.

Polynomials here are dense coefficient lists, lowest degree first.  The
helpers are generic over the coefficient field: plain rationals or the
algebraic numbers themselves (for resultant-free Sturm counting in an
extension).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import UndecidedSign

_MAX_REFINE = 160


def ptrim(p):
    while p and not p[-1]:
        p.pop()
    return p


def pdeg(p):
    return len(p) - 1


def padd(a, b):
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] = out[i] + c
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return ptrim(out)


def pneg(a):
    return [-c for c in a]


def psub(a, b):
    return padd(a, pneg(b))


def pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return ptrim(out)


def pscale(a, q):
    if not q:
        return []
    return [c * q for c in a]


def pdivmod(a, b):
    """Exact field division with remainder."""
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    while len(a) >= len(b) and ptrim(a):
        if len(a) < len(b):
            break
        c = a[-1] * inv_lead
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] = a[k + i] - c * bc
        ptrim(a)
    return ptrim(q), ptrim(a)


def pgcd(a, b):
    """Monic gcd by the Euclidean algorithm."""
    a, b = ptrim(list(a)), ptrim(list(b))
    while b:
        _, r = pdivmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def pderiv(a):
    return ptrim([c * k for k, c in enumerate(a)][1:])


def peval(a, x):
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


def squarefree_part(a):
    g = pgcd(a, pderiv(a))
    if pdeg(g) < 1:
        return ptrim(list(a))
    q, _ = pdivmod(a, g)
    return q


def squarefree_decomposition(a):
    """Yun's algorithm: list of (factor, multiplicity), factors squarefree monic."""
    a = ptrim(list(a))
    if pdeg(a) < 1:
        return []
    g = pgcd(a, pderiv(a))
    if pdeg(g) < 1:
        lead = a[-1]
        return [([c / lead for c in a], 1)]
    w, _ = pdivmod(a, g)
    y, _ = pdivmod(pderiv(a), g)
    z = psub(y, pderiv(w))
    out = []
    k = 1
    while pdeg(w) >= 1:
        f = pgcd(w, z)
        if pdeg(f) >= 1:
            out.append((f, k))
        w, _ = pdivmod(w, f)
        y, _ = pdivmod(z, f)
        z = psub(y, pderiv(w))
        k += 1
        if k > 80:
            raise RuntimeError("squarefree decomposition looped")
    return out


def clear_denominators(a):
    """Primitive integer version of a rational polynomial, positive leading."""
    from math import gcd, lcm

    den = 1
    for c in a:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in a]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    if g:
        ints = [c // g for c in ints]
    if ints and ints[-1] < 0:
        ints = [-c for c in ints]
    return [Fraction(c) for c in ints]


def cauchy_bound(a):
    lead = abs(a[-1])
    m = max((abs(c) for c in a[:-1]), default=Fraction(0))
    return 1 + m / lead


def sturm_chain(a):
    chain = [ptrim(list(a)), pderiv(a)]
    while chain[-1]:
        _, r = pdivmod(chain[-2], chain[-1])
        if not r:
            break
        chain.append(pneg(r))
    return [c for c in chain if c]


def _sign_changes(values):
    signs = [1 if v > 0 else -1 for v in values if v]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def sturm_count(chain, lo, hi):
    at_lo = [peval(c, lo) for c in chain]
    at_hi = [peval(c, hi) for c in chain]
    return _sign_changes(at_lo) - _sign_changes(at_hi)


def rational_roots(a):
    """All rational roots with multiplicity, dividing them out.

    Returns (roots, remaining) where remaining has no rational roots.
    """
    a = ptrim(list(a))
    roots = []
    # x = 0 roots
    while a and not a[0]:
        roots.append(Fraction(0))
        a = a[1:]
    ints = clear_denominators(a)
    if pdeg(a) < 1:
        return roots, a
    lead = int(ints[-1])
    tail = int(ints[0])

    def divisors(n):
        n = abs(n)
        out = set()
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                out.add(n // d)
            d += 1
        return out

    candidates = set()
    for p in divisors(tail):
        for q in divisors(lead):
            candidates.add(Fraction(p, q))
            candidates.add(Fraction(-p, q))
    for c in sorted(candidates):
        while pdeg(a) >= 1 and not peval(a, c):
            roots.append(c)
            a, _ = pdivmod(a, [-c, Fraction(1)])
    return roots, a


def isolate_real_roots(a):
    """Disjoint rational intervals, one per real root of a squarefree polynomial.

    Endpoints are never roots.  Root-free input yields the empty list.
    """
    a = ptrim(list(a))
    if pdeg(a) < 1:
        return []
    chain = sturm_chain(a)
    bound = cauchy_bound(a)
    lo, hi = -bound, bound
    while not peval(a, lo):
        lo -= 1
    while not peval(a, hi):
        hi += 1
    out = []
    stack = [(lo, hi, sturm_count(chain, lo, hi))]
    while stack:
        lo, hi, count = stack.pop()
        if count == 0:
            continue
        if count == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        while not peval(a, mid):
            mid = (mid + hi) / 2
        left = sturm_count(chain, lo, mid)
        stack.append((lo, mid, left))
        stack.append((mid, hi, count - left))
    return sorted(out)


def interval_eval(a, lo, hi):
    """Interval Horner with rational coefficients."""
    alo = ahi = Fraction(0)
    for c in reversed(a):
        products = (alo * lo, alo * hi, ahi * lo, ahi * hi)
        alo, ahi = min(products) + c, max(products) + c
    return alo, ahi


class AlgebraicContext:
    """A single generator theta: squarefree witness plus isolating interval.

    The witness may shrink when gcd computations expose a proper factor
    vanishing at theta; all numbers sharing the context re-reduce lazily.
    """

    __slots__ = ("witness", "lo", "hi", "generation")

    def __init__(self, witness, lo, hi):
        self.witness = ptrim([Fraction(c) for c in witness])
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        self.generation = 0
        if peval(self.witness, self.lo) == 0 or peval(self.witness, self.hi) == 0:
            raise ValueError("isolating interval endpoints must not be roots")

    def degree(self):
        return pdeg(self.witness)

    def refine(self):
        mid = (self.lo + self.hi) / 2
        wmid = peval(self.witness, mid)
        if wmid == 0:
            raise ValueError("witness root became rational; should have been extracted")
        if peval(self.witness, self.lo) * wmid < 0:
            self.hi = mid
        else:
            self.lo = mid

    def contains_root_of(self, g):
        """Does theta satisfy g?  Valid for divisors of the witness."""
        return peval(g, self.lo) * peval(g, self.hi) < 0

    def shrink(self, factor):
        self.witness = ptrim([Fraction(c) for c in factor])
        self.generation += 1

    def reduce(self, coords):
        w = self.witness
        lead = w[-1]
        monic = [c / lead for c in w]
        p = ptrim(list(coords))
        while pdeg(p) >= pdeg(monic):
            c = p[-1]
            k = len(p) - len(monic)
            for i, mc in enumerate(monic):
                p[k + i] = p[k + i] - c * mc
            ptrim(p)
        return p


class RealAlgebraic:
    """Element of the ring generated by one isolated real algebraic number."""

    __slots__ = ("ctx", "coords", "_generation")

    def __init__(self, ctx, coords):
        self.ctx = ctx
        self.coords = ctx.reduce([Fraction(c) for c in coords])
        self._generation = ctx.generation

    @classmethod
    def generator(cls, ctx):
        return cls(ctx, [Fraction(0), Fraction(1)])

    def _sync(self):
        if self._generation != self.ctx.generation:
            self.coords = self.ctx.reduce(self.coords)
            self._generation = self.ctx.generation
        return self.coords

    def _coerce(self, other):
        if isinstance(other, RealAlgebraic):
            if other.ctx is not self.ctx:
                raise ValueError("mixing generators from different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return RealAlgebraic(self.ctx, [Fraction(other)])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RealAlgebraic(self.ctx, padd(self._sync(), other._sync()))

    __radd__ = __add__

    def __neg__(self):
        return RealAlgebraic(self.ctx, pneg(self._sync()))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RealAlgebraic(self.ctx, psub(self._sync(), other._sync()))

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RealAlgebraic(self.ctx, pmul(self._sync(), other._sync()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def is_zero(self):
        p = self._sync()
        if not p:
            return True
        if pdeg(p) == 0:
            return not p[0]
        g = pgcd(p, self.ctx.witness)
        if pdeg(g) < 1:
            return False
        if self.ctx.contains_root_of(g):
            self.ctx.shrink(g)
            return True
        q, _ = pdivmod(self.ctx.witness, g)
        self.ctx.shrink(q)
        return False

    def inverse(self):
        for _ in range(8):
            p = self._sync()
            if self.is_zero():
                raise ZeroDivisionError("inverting a vanishing algebraic number")
            p = self._sync()
            g, u = _ext_euclid(p, self.ctx.witness)
            if pdeg(g) == 0:
                return RealAlgebraic(self.ctx, pscale(u, 1 / g[0]))
            # theta is a root of exactly one factor; keep that one
            if self.ctx.contains_root_of(g):
                self.ctx.shrink(g)
            else:
                q, _ = pdivmod(self.ctx.witness, g)
                self.ctx.shrink(q)
        raise RuntimeError("witness kept shrinking without stabilizing")

    def sign(self, max_refine=_MAX_REFINE):
        if self.is_zero():
            return 0
        for _ in range(max_refine):
            lo, hi = interval_eval(self._sync(), self.ctx.lo, self.ctx.hi)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            self.ctx.refine()
        raise UndecidedSign("interval refinement hit the depth limit")

    def enclosure(self, width=Fraction(1, 2**24), max_refine=_MAX_REFINE):
        for _ in range(max_refine):
            lo, hi = interval_eval(self._sync(), self.ctx.lo, self.ctx.hi)
            if hi - lo < width:
                return lo, hi
            self.ctx.refine()
        return interval_eval(self._sync(), self.ctx.lo, self.ctx.hi)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RealAlgebraic)):
            diff = self - other
            if isinstance(diff, RealAlgebraic):
                return diff.is_zero()
        return NotImplemented

    def __hash__(self):
        raise TypeError("algebraic numbers are unhashable; compare via is_zero")

    def __repr__(self):
        lo, hi = interval_eval(self._sync(), self.ctx.lo, self.ctx.hi)
        return f"RealAlgebraic(~[{lo}, {hi}])"


def _ext_euclid(a, w):
    """(g, u) with u*a = g modulo w and g the monic gcd."""
    r0, r1 = ptrim(list(w)), ptrim(list(a))
    u0, u1 = [], [Fraction(1)]
    while r1:
        q, r = pdivmod(r0, r1)
        r0, r1 = r1, r
        u0, u1 = u1, psub(u0, pmul(q, u1))
    if r0:
        lead = r0[-1]
        r0 = [c / lead for c in r0]
        u0 = pscale(u0, 1 / lead)
    return r0, u0


def sign_of(x):
    if isinstance(x, RealAlgebraic):
        return x.sign()
    return (x > 0) - (x < 0)


def number_is_zero(x):
    if isinstance(x, RealAlgebraic):
        return x.is_zero()
    return not x


def as_fraction_or_none(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    p = x._sync()
    if not p:
        return Fraction(0)
    if pdeg(p) == 0:
        return p[0]
    return None


def generic_gcd(a, b, zero):
    """Monic gcd over any exact field given via duck typing."""
    a, b = _gtrim(list(a)), _gtrim(list(b))
    while b:
        _, r = generic_divmod(a, b)
        a, b = b, r
    if a:
        inv = _number_inverse(a[-1])
        a = [c * inv for c in a]
    return a


def _gtrim(p):
    while p and number_is_zero(p[-1]):
        p.pop()
    return p


def _number_inverse(x):
    if isinstance(x, RealAlgebraic):
        return x.inverse()
    return 1 / x


def generic_divmod(a, b):
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = _number_inverse(b[-1])
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        if number_is_zero(a[-1]):
            a.pop()
            continue
        c = a[-1] * inv_lead
        k = len(a) - len(b)
        q[k] = q[k] + c
        for i, bc in enumerate(b):
            a[k + i] = a[k + i] - c * bc
        a.pop()
    return _gtrim(q), _gtrim(a)


def generic_deriv(a):
    return _gtrim([c * k for k, c in enumerate(a)][1:])


def generic_real_root_count(a):
    """Number of real roots of a squarefree polynomial over the extension.

    Sturm chain with signs at minus and plus infinity read off the leading
    coefficients.
    """
    a = _gtrim(list(a))
    if pdeg(a) < 1:
        return 0
    chain = [a, generic_deriv(a)]
    while chain[-1]:
        _, r = generic_divmod(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    chain = [c for c in chain if c]
    at_minus = []
    at_plus = []
    for c in chain:
        lead = sign_of(c[-1])
        deg = pdeg(c)
        at_plus.append(lead)
        at_minus.append(lead if deg % 2 == 0 else -lead)
    return _sign_changes_int(at_minus) - _sign_changes_int(at_plus)


def _sign_changes_int(signs):
    signs = [s for s in signs if s]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)
