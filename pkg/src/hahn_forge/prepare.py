"""Root expansion over the value group and leading-term preparation.

The expansion engine follows the Newton polygon: each polygon edge names a
candidate root valuation, the edge polynomial names the possible leading
coefficients, and substitution recurses until every branch is separated.
Coefficients stay exact: rational when the branch is rational, otherwise
elements of a single real-algebraic extension carried per branch (nested
extensions are rejected; see puiseux_roots).

A preparing set for a one-variable term is the truncated branch set of the
polynomial together with the whole derivative chain.  Its defining
property, that the leading-term class of the term is constant on every
ball next to the set, is enforced by the sampling verifier before a set is
returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

from . import algebraic as alg
from .algebraic import (
    AlgebraicContext,
    RealAlgebraic,
    as_fraction_or_none,
    generic_real_root_count,
    number_is_zero,
)
from .errors import (
    DepthExhausted,
    DivisionByZero,
    DomainError,
    DomainViolation,
    HahnForgeError,
    InsufficientPrecision,
    NotInfinitesimal,
    UndecidableAtPrecision,
    UndecidedSign,
    ZeroOrUncertainLeadingTerm,
)
from .rv import (
    VerificationReport,
    ball_mates,
    random_point,
    rv_lambda,
)
from .series import (
    GroupElement,
    HahnSeries,
    INFINITE,
    TruncatedSeries,
    compare_sign,
    format_series,
    format_rational,
    invert,
    valuation,
)

_LEVEL_CAP = 128


# ---------------------------------------------------------------------------
# public types


@dataclass
class IntervalCoeff:
    """Rational enclosure of a real algebraic branch coefficient.

    ``witness`` is an integer-coefficient annihilator with an isolating
    interval for the generator; refinement bisects against it, so sign
    queries on nonzero values always terminate.
    """

    lower: Fraction
    upper: Fraction
    witness: tuple
    value: RealAlgebraic = field(repr=False, compare=False, default=None)

    def refine(self, width=Fraction(1, 2**40)):
        lo, hi = self.value.enclosure(width)
        self.lower, self.upper = lo, hi
        return lo, hi

    def sign(self):
        return self.value.sign()

    def proxy(self):
        """Deterministic rational stand-in, used when a point of the base
        field is needed.

        Kept at a small denominator: no point of the base field is
        valuatively close to an irrational branch anyway, and compact
        numerators keep downstream arithmetic fast.
        """
        lo, hi = self.refine(Fraction(1, 2**24))
        return ((lo + hi) / 2).limit_denominator(10**4)

    def to_dict(self):
        poly, interval = self.witness
        return {
            "lower": format_rational(self.lower),
            "upper": format_rational(self.upper),
            "witness": {
                "poly": [str(c) for c in poly],
                "interval": [format_rational(interval[0]), format_rational(interval[1])],
            },
        }


@dataclass
class PuiseuxRoot:
    """One real branch (or one complex-conjugate pair) of a polynomial."""

    ramification: int
    branch: tuple
    depth: object  # Fraction, or INFINITE for an exactly terminated branch
    conjugacy_tag: str = "real"

    def is_real(self):
        return self.conjugacy_tag == "real"

    def leading_sign(self):
        if not self.branch:
            return 0
        c = self.branch[0][1]
        return c.sign() if isinstance(c, IntervalCoeff) else alg.sign_of(c)

    def to_series(self):
        """Truncation as an exact point of the base field.

        Irrational coefficients are replaced by their deterministic
        rational proxies; the result is a point, not an approximation.
        """
        terms = []
        for e, c in self.branch:
            q = c.proxy() if isinstance(c, IntervalCoeff) else c
            if q:
                terms.append((GroupElement.scalar(e), q))
        return TruncatedSeries.exact(HahnSeries(terms))

    def to_dict(self):
        return {
            "ramification": self.ramification,
            "branch": [
                {
                    "exponent": format_rational(e),
                    "coeff": format_rational(c) if isinstance(c, Fraction) else c.to_dict(),
                }
                for e, c in self.branch
            ],
            "depth": "inf" if self.depth is INFINITE else format_rational(self.depth),
            "conjugacy": self.conjugacy_tag,
        }


@dataclass
class PreparingPoint:
    series: TruncatedSeries
    depth: object
    poly_text: str
    derivative_order: int

    def to_dict(self):
        return {
            "series": format_series(self.series),
            "depth": "inf" if self.depth is INFINITE else format_rational(self.depth),
            "provenance": {"poly": self.poly_text, "derivative_order": self.derivative_order},
        }


@dataclass
class PreparingSet:
    points: list

    def centers(self):
        return [p.series for p in self.points]

    def to_dict(self):
        return {"points": [p.to_dict() for p in self.points]}


# ---------------------------------------------------------------------------
# polynomials over the series field


def poly_text(coeffs):
    """Render a coefficient list in the one-variable term grammar."""
    parts = []
    for i, c in enumerate(coeffs):
        if c.is_exact_zero():
            continue
        body = f"({format_series(c)})"
        if i == 1:
            body += "*x"
        elif i > 1:
            body += f"*x^{i}"
        parts.append(body)
    return " + ".join(parts) if parts else "0"


def poly_eval_exact(coeffs, x):
    total = TruncatedSeries.zero(x.rank)
    for c in reversed(coeffs):
        total = total * x + c
    return total


def poly_derivative(coeffs):
    return [c.scale(k) for k, c in enumerate(coeffs)][1:]


def newton_polygon(coeffs):
    """Candidate root valuations from the lower hull of (i, v(a_i)).

    Returns (valuation, multiplicity) pairs, one per hull edge, in hull
    order; the valuations are the negated edge slopes.
    """
    points = []
    for i, c in enumerate(coeffs):
        if c.is_exact_zero():
            continue
        if not c.approx.terms:
            raise InsufficientPrecision(f"coefficient {i} has no determined valuation")
        points.append((i, c.approx.valuation().first()))
    if len(points) < 2:
        return []
    hull = [points[0]]
    for pt in points[1:]:
        while len(hull) >= 2:
            (i1, v1), (i2, v2) = hull[-2], hull[-1]
            # keep the lower hull: drop the middle point when it lies on or
            # above the segment to the new point
            if (v2 - v1) * (pt[0] - i1) >= (pt[1] - v1) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(pt)
    out = []
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        out.append((Fraction(v1 - v2, i2 - i1), i2 - i1))
    return out


# ---------------------------------------------------------------------------
# exact series plumbing for the expansion engine

# an "xser" is a dict {Fraction exponent: number}; numbers are Fractions or
# RealAlgebraic elements sharing one context per branch


def _xser_from_truncated(ts):
    if ts.rank != 1:
        raise HahnForgeError("root expansion works over exponent rank 1")
    if not ts.is_exact():
        raise InsufficientPrecision("root expansion needs exact coefficients")
    return {e.first(): c for e, c in ts.approx.terms}


def _xser_clean(s):
    dead = [e for e, c in s.items() if number_is_zero(c)]
    for e in dead:
        del s[e]
    return s


def _xser_valuation(s):
    _xser_clean(s)
    return min(s) if s else None


def _xser_lead(s):
    v = _xser_valuation(s)
    return (v, s[v]) if v is not None else (None, None)


def _xser_add_term(s, e, c):
    cur = s.get(e)
    s[e] = c if cur is None else cur + c


def _substitute(coeffs, c, nu):
    """Coefficients of p(c*t^nu + x) from those of p(x)."""
    n = len(coeffs) - 1
    out = [dict() for _ in range(n + 1)]
    powers = [Fraction(1) if isinstance(c, Fraction) else c * 0 + 1]
    for _ in range(n):
        powers.append(powers[-1] * c)
    for i, a in enumerate(coeffs):
        if not a:
            continue
        for j in range(i + 1):
            w = comb(i, j)
            shift = nu * (i - j)
            factor = powers[i - j] * w
            for e, q in a.items():
                _xser_add_term(out[j], e + shift, q * factor)
    for s in out:
        _xser_clean(s)
    return out


def _poly_points(coeffs):
    pts = []
    for i, a in enumerate(coeffs):
        v = _xser_valuation(a)
        if v is not None:
            pts.append((i, v))
    return pts


def _hull_edges(points, floor):
    """Lower-hull edges with valuation strictly above ``floor``."""
    if len(points) < 2:
        return []
    hull = [points[0]]
    for pt in points[1:]:
        while len(hull) >= 2:
            (i1, v1), (i2, v2) = hull[-2], hull[-1]
            if (v2 - v1) * (pt[0] - i1) >= (pt[1] - v1) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(pt)
    edges = []
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        nu = Fraction(v1 - v2, i2 - i1)
        if floor is None or nu > floor:
            edges.append((nu, i1, i2, v1))
    return edges


def _edge_polynomial(coeffs, nu, i1, i2, v1):
    """Coefficients of the edge polynomial, z^0 at the left corner."""
    phi = []
    for i in range(i1, i2 + 1):
        target = v1 - nu * (i - i1)
        a = coeffs[i]
        c = a.get(target, Fraction(0)) if a else Fraction(0)
        phi.append(c)
    while phi and number_is_zero(phi[-1]):
        phi.pop()
    return phi


def _field_roots(phi, ctx):
    """Roots of the edge polynomial with multiplicity, plus complex pairs.

    Returns (roots, pairs, new_contexts) where roots are (value, mult,
    ctx-for-value) and pairs counts complex-conjugate pairs with their
    multiplicity.  Raises when a root would need a second generator.
    """
    rational_coeffs = []
    for c in phi:
        q = c if isinstance(c, (int, Fraction)) else as_fraction_or_none(c)
        if q is None:
            rational_coeffs = None
            break
        rational_coeffs.append(Fraction(q))

    roots = []
    pairs = []
    if rational_coeffs is not None:
        for factor, mult in alg.squarefree_decomposition(rational_coeffs):
            rat, rest = alg.rational_roots(factor)
            for r in rat:
                roots.append((r, mult, ctx))
            if alg.pdeg(rest) >= 1:
                intervals = alg.isolate_real_roots(rest)
                if intervals and ctx is not None:
                    raise UndecidedSign(
                        "branch needs a second algebraic generator; "
                        "nested real-algebraic extensions are not supported"
                    )
                witness = alg.clear_denominators(rest)
                for lo, hi in intervals:
                    new_ctx = AlgebraicContext(witness, lo, hi)
                    roots.append((RealAlgebraic.generator(new_ctx), mult, new_ctx))
                complex_count = alg.pdeg(rest) - len(intervals)
                if complex_count:
                    pairs.append((complex_count // 2, mult))
        return roots, pairs

    # coefficients genuinely involve the generator
    for factor, mult in _generic_squarefree(phi):
        if alg.pdeg(factor) == 1:
            # squarefree factors come back monic
            roots.append((-factor[0], mult, ctx))
            continue
        real_count = generic_real_root_count(factor)
        if real_count:
            raise UndecidedSign(
                "branch needs a second algebraic generator; "
                "nested real-algebraic extensions are not supported"
            )
        pairs.append((alg.pdeg(factor) // 2, mult))
    return roots, pairs


def _generic_squarefree(phi):
    from .algebraic import generic_divmod, generic_deriv, generic_gcd

    p = list(phi)
    out = []
    g = generic_gcd(p, generic_deriv(p), None)
    if alg.pdeg(g) < 1:
        inv = p[-1].inverse() if isinstance(p[-1], RealAlgebraic) else 1 / p[-1]
        return [([c * inv for c in p], 1)]
    w, _ = generic_divmod(p, g)
    y, _ = generic_divmod(generic_deriv(p), g)
    z = [a - b for a, b in _pad_pair(y, generic_deriv(w))]
    k = 1
    while alg.pdeg(w) >= 1:
        f = generic_gcd(w, z, None)
        if alg.pdeg(f) >= 1:
            out.append((f, k))
        w, _ = generic_divmod(w, f)
        y, _ = generic_divmod(z, f)
        z = [a - b for a, b in _pad_pair(y, generic_deriv(w))]
        k += 1
        if k > 80:
            raise RuntimeError("squarefree decomposition looped")
    return out


def _pad_pair(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


def _expand(coeffs, floor, prefix, ctx, depth_target, level, out):
    if level > _LEVEL_CAP:
        raise RuntimeError("root expansion recursed too deeply")
    coeffs = [dict(a) for a in coeffs]
    for a in coeffs:
        _xser_clean(a)
    if not coeffs[0]:
        # the current center is an exact root; the polygon edges below
        # still enumerate the branches passing nearby
        out.append(_make_root(prefix, INFINITE))
    for nu, i1, i2, v1 in _hull_edges(_poly_points(coeffs), floor):
        phi = _edge_polynomial(coeffs, nu, i1, i2, v1)
        roots, pairs = _field_roots(phi, ctx)
        for count, mult in pairs:
            for _ in range(count * mult):
                out.append(_make_root(prefix, nu, tag="complex-pair"))
        for value, mult, root_ctx in roots:
            new_prefix = prefix + ((nu, value),)
            if mult == 1 and nu >= depth_target:
                shifted = _substitute(coeffs, value, nu)
                nxt = _next_exponent(shifted)
                out.append(_make_root(new_prefix, nxt if nxt is not None else INFINITE))
                continue
            shifted = _substitute(coeffs, value, nu)
            _expand(shifted, nu, new_prefix, root_ctx, depth_target, level + 1, out)


def _next_exponent(coeffs):
    """Valuation of the Newton correction for a simple root at the origin."""
    v0 = _xser_valuation(coeffs[0])
    v1 = _xser_valuation(coeffs[1]) if len(coeffs) > 1 else None
    if v0 is None:
        return None
    if v1 is None:
        return None
    return v0 - v1


def _make_root(prefix, depth, tag="real"):
    branch = []
    denominators = [1]
    for e, c in prefix:
        denominators.append(e.denominator)
        if isinstance(c, RealAlgebraic):
            q = as_fraction_or_none(c)
            if q is not None:
                c = q
            else:
                lo, hi = c.enclosure()
                witness = (tuple(int(x) for x in alg.clear_denominators(c.ctx.witness)), (c.ctx.lo, c.ctx.hi))
                c = IntervalCoeff(lo, hi, witness, c)
        branch.append((e, c))
    depth_val = depth if depth is INFINITE else Fraction(depth)
    return PuiseuxRoot(lcm(*denominators), tuple(branch), depth_val, tag)


def _squarefree_series_poly(coeffs):
    """Squarefree part of a polynomial with exact finite-support coefficients."""
    hs = [c.approx for c in coeffs]
    while hs and hs[-1].is_zero():
        hs.pop()
    if len(hs) <= 2:
        return coeffs
    dhs = [h.scale(k) for k, h in enumerate(hs)][1:]
    g = _hahn_poly_gcd(hs, dhs)
    if len(g) <= 1:
        return coeffs
    q = _hahn_poly_divexact(hs, g)
    return [TruncatedSeries.exact(h) for h in q]


def _hahn_poly_gcd(a, b):
    """Primitive-part Euclidean loop with pseudo-remainders."""
    a, b = _hp_trim(list(a)), _hp_trim(list(b))
    a, b = _hp_primitive(a), _hp_primitive(b)
    guard = 0
    while b and len(b) > 1:
        r = _hp_prem(a, b)
        a, b = b, _hp_primitive(_hp_trim(r))
        guard += 1
        if guard > 64:
            raise RuntimeError("gcd chain did not terminate")
    if b:  # nonzero constant gcd
        return [HahnSeries.constant(1)]
    return a


def _hp_trim(p):
    while p and p[-1].is_zero():
        p.pop()
    return p


def _hp_prem(a, b):
    """Pseudo-remainder: lc(b)^k * a reduced by b, staying in finite support."""
    a = list(a)
    lead_b = b[-1]
    while len(a) >= len(b) and _hp_trim(a):
        ca = a[-1]
        k = len(a) - len(b)
        a = [x * lead_b for x in a]
        for i, bc in enumerate(b):
            a[k + i] = a[k + i] - ca * bc
        _hp_trim(a)
    return a


def _hp_primitive(p):
    """Divide out the content: a common monomial times a rational-poly gcd."""
    if not p:
        return p
    support = [h for h in p if not h.is_zero()]
    if not support:
        return []
    n = 1
    for h in support:
        for e, _ in h.terms:
            n = lcm(n, e.first().denominator)
    shift = min(h.valuation().first() for h in support)
    dense = []
    for h in support:
        coeffs = {}
        for e, c in h.terms:
            coeffs[int((e.first() - shift) * n)] = c
        dense.append(coeffs)
    content = []
    for coeffs in dense:
        poly = [Fraction(0)] * (max(coeffs) + 1)
        for k, c in coeffs.items():
            poly[k] = c
        content = alg.pgcd(content, poly) if content else alg.ptrim(poly)
        if alg.pdeg(content) == 0:
            content = [Fraction(1)]
            break
    ge_shift = GroupElement.scalar(shift)
    content_series = HahnSeries(
        [(GroupElement.scalar(Fraction(k, n) + shift), c) for k, c in enumerate(content) if c]
    )
    return [_hahn_divexact(h, content_series) for h in p]


def _hahn_divexact(a, b):
    """Exact division of finite-support series; raises when not divisible."""
    if a.is_zero():
        return a
    if b.is_zero():
        raise ZeroDivisionError("division by the zero series")
    max_q = a.terms[-1][0] - b.terms[-1][0]
    rem = a
    out = []
    while not rem.is_zero():
        e = rem.valuation() - b.valuation()
        if e > max_q:
            raise ArithmeticError("series division is not exact")
        c = rem.leading_coeff() / b.leading_coeff()
        out.append((e, c))
        rem = rem - b.shift(e).scale(c)
    return HahnSeries(out)


def _hahn_poly_divexact(a, b):
    """Exact polynomial division in the series ring (Gauss: quotient stays there)."""
    a = list(a)
    out = [HahnSeries.zero()] * (len(a) - len(b) + 1)
    while _hp_trim(a) and len(a) >= len(b):
        c = _hahn_divexact(a[-1], b[-1])
        k = len(a) - len(b)
        out[k] = c
        for i, bc in enumerate(b):
            a[k + i] = a[k + i] - bc * c
        _hp_trim(a)
    if _hp_trim(a):
        raise ArithmeticError("polynomial division is not exact")
    return out


def puiseux_roots(coeffs, depth=Fraction(4)):
    """All real-closure branches of the polynomial, expanded past separation.

    Real branches carry exact coefficients (rational, or interval-certified
    in a single algebraic extension); complex pairs record the shared real
    prefix and are tagged.  Each returned branch is simple; together with
    multiplicity-two complex pairs they count the degree of the squarefree
    part.
    """
    depth = Fraction(depth)
    coeffs = list(coeffs)
    while coeffs and coeffs[-1].is_exact_zero():
        coeffs.pop()
    if len(coeffs) < 2:
        return []
    coeffs = _squarefree_series_poly(coeffs)
    xsers = [_xser_from_truncated(c) for c in coeffs]
    out = []
    _expand(xsers, None, (), None, depth, 0, out)
    return out


# ---------------------------------------------------------------------------
# preparation and the probes


def _term_from_poly(coeffs):
    def term(x, prec=None):
        if prec is None:
            return poly_eval_exact(coeffs, x)
        total = TruncatedSeries.zero(x.rank)
        for c in reversed(coeffs):
            total = (total * x + c).truncate(prec)
        return total

    return term


def prepare_polynomial(p, lam, trials=300, rng_seed=0, max_retries=3):
    """Preparing set for a polynomial: branch points of p and all derivatives.

    The set is returned only after the sampling verifier confirms that the
    leading-term class of p is constant on every sampled ball next to it;
    on failure the branch depth is increased and the set rebuilt.
    """
    if len(p) < 2:
        raise ValueError("the polynomial must be nonconstant")
    lam_first = lam.first()
    depth = lam_first + 4
    report = None
    for _ in range(max_retries):
        points = []
        chain = list(p)
        order = 0
        while len(chain) >= 2:
            text = poly_text(chain)
            for root in puiseux_roots(chain, depth):
                if not root.is_real():
                    continue
                points.append(PreparingPoint(root.to_series(), root.depth, text, order))
            chain = poly_derivative(chain)
            order += 1
        seen = {}
        for pt in points:
            key = pt.series
            if key not in seen:
                seen[key] = pt
        prep = PreparingSet(list(seen.values()))
        report = verify_preparation(_term_from_poly(p), prep, lam, trials, rng_seed)
        if report.passed():
            return prep, report
        depth += 4
    raise DepthExhausted(f"preparation kept failing at depth {depth}; last report: {report.to_json()}")


_SKIP = (
    UndecidableAtPrecision,
    InsufficientPrecision,
    ZeroOrUncertainLeadingTerm,
    DivisionByZero,
    DomainError,
    NotInfinitesimal,
    UndecidedSign,
)


def _rv_of_term(term, x, lam, base_prec):
    prec = base_prec
    for _ in range(4):
        value = term(x, prec)
        try:
            return rv_lambda(value, lam)
        except InsufficientPrecision:
            prec = prec + GroupElement.scalar(10)
    raise InsufficientPrecision("term value never became sharp enough")


def verify_preparation(term, prep, lam, trials=300, rng_seed=0):
    """Sample ball-mates next to the set and compare leading-term classes.

    ``term`` is a callable ``term(x, prec)``; the report records witness
    pairs for every sampled disagreement.
    """
    centers = prep.centers() if isinstance(prep, PreparingSet) else list(prep)
    if not centers:
        raise ValueError("the preparing set must be nonempty")
    report = VerificationReport("verify_preparation", lam, trials, rng_seed)
    lam_first = lam.first()
    grid_hi = int(2 * lam_first) + 4
    for trial in range(trials):
        rng = random.Random(f"verify:{rng_seed}:{trial}")
        for _attempt in range(16):
            anchor = rng.choice(centers)
            gamma = GroupElement.scalar(Fraction(rng.randint(-4, grid_hi), 2))
            x0 = anchor + random_point(rng, gamma, steps=2)
            mates = ball_mates(rng, x0, centers, lam, count=1, steps=2)
            if mates is None:
                continue
            base_prec = lam + GroupElement.scalar(6)
            if gamma.first() < 0:
                base_prec = base_prec + gamma * 6
            try:
                rv0 = _rv_of_term(term, x0, lam, base_prec)
                disagree = None
                for y in mates:
                    if _rv_of_term(term, y, lam, base_prec) != rv0:
                        disagree = y
                        break
            except _SKIP:
                continue
            if disagree is not None:
                report.violations.append(
                    {
                        "ball": _ball_payload(x0, centers, lam),
                        "x": format_series(x0),
                        "y": format_series(disagree),
                    }
                )
            break
    return report


def _ball_payload(x0, centers, lam):
    data = []
    for c in centers:
        data.append({"center": format_series(c), "datum": rv_lambda(x0 - c, lam).to_dict()})
    return {"base": format_series(x0), "data": data}


def jacobian_probe(fn, prep, trials=300, rng_seed=0):
    """Check the constant-shift law for valuative distances on each ball.

    On every sampled ball 1-next to the set, the first pair of points
    estimates the shift ``v(f(x) - f(y)) - v(x - y)``; the remaining pairs
    must reproduce it exactly.  The per-ball shifts are reported.
    """
    centers = prep.centers() if isinstance(prep, PreparingSet) else list(prep)
    if not centers:
        raise ValueError("the preparing set must be nonempty")
    lam = GroupElement.scalar(1)
    report = VerificationReport("jacobian_probe", lam, trials, rng_seed)
    shifts = []
    base_prec = GroupElement.scalar(10)
    for trial in range(trials):
        rng = random.Random(f"jacobian:{rng_seed}:{trial}")
        for _attempt in range(16):
            anchor = rng.choice(centers)
            gamma = GroupElement.scalar(Fraction(rng.randint(-4, 6), 2))
            x0 = anchor + random_point(rng, gamma, steps=2)
            mates = ball_mates(rng, x0, centers, lam, count=3)
            if mates is None:
                continue
            points = [x0, *mates]
            try:
                values = [fn(x, base_prec) for x in points]
                shift = None
                bad = None
                for i in range(len(points)):
                    for j in range(i + 1, len(points)):
                        gap = points[i] - points[j]
                        image_gap = values[i] - values[j]
                        if gap.approx.is_zero():
                            continue
                        vg = valuation(gap)
                        vi = valuation(image_gap)
                        if vi is INFINITE:
                            raise UndecidableAtPrecision("image gap vanished")
                        delta = vi - vg
                        if shift is None:
                            shift = delta
                        elif delta != shift:
                            bad = (points[i], points[j])
                            break
                    if bad:
                        break
            except _SKIP:
                continue
            if shift is not None:
                shifts.append({"ball": format_series(x0), "shift": format_rational(shift.first())})
            if bad:
                report.violations.append(
                    {
                        "ball": _ball_payload(x0, centers, lam),
                        "x": format_series(bad[0]),
                        "y": format_series(bad[1]),
                    }
                )
            break
    report.extra["shifts"] = shifts
    return report


@dataclass
class StrongUnitSpec:
    """Unit of the annulus ring: 1 + g(inner/(x-c)) + h((x-c)/outer).

    The scales multiply the two analytic parts; a genuinely strong unit
    has both parts of positive additive norm (infinitesimal scales for
    rational-coefficient functions).
    """

    g: object = None
    g_scale: TruncatedSeries = None
    h: object = None
    h_scale: TruncatedSeries = None


def strong_unit_probe(spec, annulus, lam, trials=200, rng_seed=0):
    """Sample annulus points with equal leading data and compare unit values."""
    from .analytic import evaluate_analytic

    center, inner, outer = annulus
    v_in = valuation(inner)
    v_out = valuation(outer)
    if not (v_in > v_out):
        raise DomainViolation("annulus needs v(inner) > v(outer)")
    report = VerificationReport("strong_unit_probe", lam, trials, rng_seed)
    base_prec = lam + GroupElement.scalar(4)

    def unit_value(x):
        total = TruncatedSeries.one(x.rank)
        diff = x - center
        if spec.g is not None:
            arg = inner * invert(diff, base_prec + base_prec)
            part = evaluate_analytic(spec.g, [arg], base_prec)
            total = total + (spec.g_scale * part if spec.g_scale is not None else part)
        if spec.h is not None:
            arg = diff * invert(outer, base_prec + base_prec)
            part = evaluate_analytic(spec.h, [arg], base_prec)
            total = total + (spec.h_scale * part if spec.h_scale is not None else part)
        return total

    from math import ceil, floor

    # include the boundary valuations: points there can still sit strictly
    # inside the annulus when their leading coefficient is small enough
    lo, hi = v_out.first(), v_in.first()
    gammas = [Fraction(k, 4) for k in range(floor(lo * 4), ceil(hi * 4) + 1)]
    for trial in range(trials):
        rng = random.Random(f"annulus:{rng_seed}:{trial}")
        for _attempt in range(16):
            if gammas:
                gamma = GroupElement.scalar(rng.choice(gammas))
            else:
                gamma = GroupElement.scalar(Fraction(int(lo * 4) + 1, 4))
            x0 = center + random_point(rng, gamma, steps=2)
            diff = x0 - center
            try:
                if compare_sign(outer - _abs(diff)) <= 0 or compare_sign(_abs(diff) - inner) <= 0:
                    continue
            except UndecidableAtPrecision:
                continue
            mates = ball_mates(rng, x0, [center], lam, count=2)
            if mates is None:
                continue
            inside = [m for m in mates if _inside_annulus(m, center, inner, outer)]
            if not inside:
                continue
            try:
                rv0 = rv_lambda(unit_value(x0), lam)
                disagree = None
                for y in inside:
                    if rv_lambda(unit_value(y), lam) != rv0:
                        disagree = y
                        break
            except _SKIP:
                continue
            if disagree is not None:
                report.violations.append(
                    {
                        "ball": _ball_payload(x0, [center], lam),
                        "x": format_series(x0),
                        "y": format_series(disagree),
                    }
                )
            break
    return report


def _abs(x):
    return x if compare_sign(x) >= 0 else -x


def _inside_annulus(x, center, inner, outer):
    try:
        d = _abs(x - center)
        return compare_sign(outer - d) > 0 and compare_sign(d - inner) > 0
    except UndecidableAtPrecision:
        return False
