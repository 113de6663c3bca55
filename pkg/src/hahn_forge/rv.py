"""Leading-term structure to a chosen depth, and the ball geometry it induces.

``rv_lambda(x, lam)`` records the valuation of x together with the unit jet
of x to depth lam: the coefficients of ``t^(-v(x)) * x`` at exponents in
``[0, lam]``.  Two elements share their image exactly when they lie in the
same multiplicative coset ``x (1 + {v > lam})``, so the fibres of
``x -> rv_lambda(x - c)`` are the balls lam-next to c.

The sampling utilities below draw reproducible finite-support points from
these fibres; every verifier in the package routes its randomness through
them so that a seed pins the whole run.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InsufficientPrecision, SingletonBall, UndecidableAtPrecision, ZeroInverse
from .series import (
    INFINITE,
    GroupElement,
    HahnSeries,
    TruncatedSeries,
    format_exponent,
    format_series,
)


@dataclass(frozen=True)
class RvElement:
    """Valuation plus unit jet; ``gamma is None`` encodes the zero class."""

    lam: GroupElement
    gamma: GroupElement | None
    jet: HahnSeries | None

    def is_zero(self):
        return self.gamma is None

    def to_dict(self):
        if self.is_zero():
            return {"zero": True}
        return {
            "gamma": format_exponent(self.gamma),
            "jet": format_series(TruncatedSeries.exact(self.jet)),
        }

    def __repr__(self):
        if self.is_zero():
            return "RvElement(0)"
        return f"RvElement(gamma={format_exponent(self.gamma)}, jet={format_series(TruncatedSeries.exact(self.jet))!r})"


def rv_lambda(x, lam):
    """Class of x in the leading-term structure of depth lam."""
    if lam < GroupElement.zero(lam.rank):
        raise ValueError("depth must be >= 0")
    if x.is_exact_zero():
        return RvElement(lam, None, None)
    if not x.approx.terms:
        raise InsufficientPrecision("valuation of the argument is not determined")
    gamma = x.approx.valuation()
    if x.prec is not INFINITE and not (x.prec > gamma + lam):
        raise InsufficientPrecision("unit jet is not determined to the requested depth")
    window = x.approx.shift(-gamma).slice_window(GroupElement.zero(x.rank), lam)
    return RvElement(lam, gamma, HahnSeries(window, x.rank, _clean=False))


def _jet_truncate(jet, lam):
    rank = jet.rank
    return HahnSeries(jet.slice_window(GroupElement.zero(rank), lam), rank, _clean=False)


def _jet_invert(jet, lam):
    c = jet.leading_coeff()
    u = jet.scale(1 / c) - HahnSeries.constant(1, jet.rank)
    acc = HahnSeries.constant(1, jet.rank)
    power = acc
    while True:
        power = _jet_truncate(power * (-u), lam)
        if power.is_zero():
            break
        acc = acc + power
    return _jet_truncate(acc.scale(1 / c), lam)


def rv_combine(kind, a, b=None):
    """Product or inverse on leading-term classes; well-defined on cosets."""
    if kind == "mul":
        if a.lam != b.lam:
            raise ValueError("depth mismatch")
        if a.is_zero() or b.is_zero():
            return RvElement(a.lam, None, None)
        return RvElement(a.lam, a.gamma + b.gamma, _jet_truncate(a.jet * b.jet, a.lam))
    if kind == "inv":
        if a.is_zero():
            raise ZeroInverse("the zero class has no inverse")
        return RvElement(a.lam, -a.gamma, _jet_invert(a.jet, a.lam))
    raise ValueError(f"unknown rv op {kind!r}")


def angular_component(x):
    """Leading coefficient; the angular component for the monomial section.

    Every pure power of t maps to 1, and the map is multiplicative.
    """
    if x.is_exact_zero():
        return Fraction(0)
    if not x.approx.terms:
        raise InsufficientPrecision("leading coefficient is not determined")
    return x.approx.leading_coeff()


@dataclass(frozen=True)
class BallDescriptor:
    """The ball lam-next to ``center`` containing a given point.

    A zero datum denotes the singleton {center}; otherwise the descriptor
    names the fibre ``{x : rv_lambda(x - center) = datum}``.
    """

    center: TruncatedSeries
    datum: RvElement

    def to_dict(self):
        return {"center": format_series(self.center), "datum": self.datum.to_dict()}


def ball_of(x, center, lam):
    return BallDescriptor(center, rv_lambda(x - center, lam))


_COEFF_POOL = [c for c in range(-9, 10) if c]


def random_tail(rng, base, steps=4, prob=0.5, force_one=False):
    """Random terms at exponents ``base + {1/2, 1, ...}``; possibly empty."""
    rank = base.rank
    terms = []
    for k in range(1, steps + 1):
        if rng.random() < prob:
            e = base + GroupElement.scalar(Fraction(k, 2), rank)
            terms.append((e, Fraction(rng.choice(_COEFF_POOL))))
    if force_one and not terms:
        k = rng.randint(1, steps)
        e = base + GroupElement.scalar(Fraction(k, 2), rank)
        terms.append((e, Fraction(rng.choice(_COEFF_POOL))))
    return HahnSeries(terms, rank, _clean=False)


def random_point(rng, lead, steps=4, prob=0.5):
    """Random finite-support point with valuation exactly ``lead``."""
    head = HahnSeries.monomial(Fraction(rng.choice(_COEFF_POOL)), lead)
    return TruncatedSeries.exact(head + random_tail(rng, lead, steps, prob))


def sample_in_ball(ball, rng_seed, extra_depth=Fraction(2)):
    """Deterministic random point of the given ball.

    The point is the center plus the datum read back as a series, plus a
    nonempty random tail strictly below depth ``gamma + lam``.
    """
    if ball.datum.is_zero():
        raise SingletonBall("the ball is the single point at its center")
    rng = random.Random(f"ball:{rng_seed}")
    gamma, lam = ball.datum.gamma, ball.datum.lam
    body = ball.datum.jet.shift(gamma)
    steps = max(1, int(2 * Fraction(extra_depth)))
    tail = random_tail(rng, gamma + lam, steps=steps, prob=0.5, force_one=True)
    return ball.center + TruncatedSeries.exact(body + tail)


def ball_mates(rng, x0, centers, lam, count=2, steps=3):
    """Points sharing with x0 every ball lam-next to each given center.

    Perturbs below ``max_c v(x0 - c) + lam``, which fixes all the jets at
    once.  Returns None when x0 collides with a center (singleton fibre).
    """
    depth = None
    for c in centers:
        diff = x0 - c
        if not diff.approx.terms:
            return None
        v = diff.approx.valuation()
        if depth is None or v > depth:
            depth = v
    mates = []
    for _ in range(count):
        tail = random_tail(rng, depth + lam, steps=steps, prob=0.5, force_one=True)
        mates.append(x0 + TruncatedSeries.exact(tail))
    return mates


@dataclass
class VerificationReport:
    """Outcome of a sampled check; serializes to the frozen JSON layout."""

    op: str
    lam: GroupElement
    trials: int
    seed: int
    violations: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return "pass" if not self.violations else "fail"

    def passed(self):
        return not self.violations

    def to_dict(self):
        out = {
            "op": self.op,
            "lambda": format_exponent(self.lam),
            "trials": self.trials,
            "seed": self.seed,
            "violations": self.violations,
            "verdict": self.verdict,
        }
        out.update(self.extra)
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def _ball_key(x0, centers, lam):
    data = []
    for c in centers:
        data.append(
            {
                "center": format_series(c),
                "datum": rv_lambda(x0 - c, lam).to_dict(),
            }
        )
    return {"base": format_series(x0), "data": data}


def check_prepares(C, membership, lam, trials=200, rng_seed=0, gamma_span=2):
    """Sample balls lam-next to C and test that membership is constant on each.

    ``membership`` is any predicate on finite-support points; a verdict of
    fail carries witness pairs.  Sampling artifacts (undecidable queries)
    are resampled, never reported.
    """
    if not C:
        raise ValueError("the preparing set must be nonempty")
    rank = C[0].rank
    report = VerificationReport("check_prepares", lam, trials, rng_seed)
    lam_first = lam.first()
    grid_hi = int(2 * (Fraction(2) + lam_first)) + 1
    for trial in range(trials):
        rng = random.Random(f"prepare:{rng_seed}:{trial}")
        for _attempt in range(16):
            anchor = rng.choice(C)
            gamma = GroupElement.scalar(Fraction(rng.randint(-2 * gamma_span, grid_hi), 2), rank)
            x0 = anchor + random_point(rng, gamma, steps=3)
            mates = ball_mates(rng, x0, C, lam, count=2)
            if mates is None:
                continue
            points = [x0, *mates]
            try:
                flags = [bool(membership(p)) for p in points]
            except (UndecidableAtPrecision, InsufficientPrecision):
                continue
            for p, flag in zip(points[1:], flags[1:]):
                if flag != flags[0]:
                    report.violations.append(
                        {
                            "ball": _ball_key(x0, C, lam),
                            "x": format_series(x0),
                            "y": format_series(p),
                        }
                    )
                    break
            break
    return report
