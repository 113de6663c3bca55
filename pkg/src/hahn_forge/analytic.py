"""Restricted analytic functions and the solvers built on them.

Functions are stored as Taylor rules (multi-index to rational coefficient)
with a declared convergence radius.  In exact mode a function with an
infinite tail is only evaluated at infinitesimal arguments, where the
expansion is finite within any precision window; finite tables are
polynomials and evaluate anywhere.

The solvers are the workhorses built on top: a Newton lift for roots of
``1 + y + a_2 y^2 + ... + a_d y^d`` with infinitesimal higher coefficients,
an implicit-function solver for series regular of degree one, and the
shifted square root used to turn order statements into square witnesses.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DuplicateName,
    MalformedRule,
    NotInfinitesimal,
    NotRegularDegreeOne,
    PrecisionStall,
)
from .multiseries import (
    MultiSeries,
    gauss_data,
    regular_degree,
    weierstrass_divide,
)
from .series import (
    GroupElement,
    INFINITE,
    TruncatedSeries,
    invert,
    standard_part,
    valuation,
)


@dataclass(frozen=True)
class AnalyticFunction:
    """Named Taylor rule with radius metadata.

    ``rule`` maps a multi-index tuple to an exact rational coefficient and
    is total up to any degree.  ``polynomial`` marks a finite table with
    zero tail, which lifts the infinitesimal-argument restriction.
    """

    name: str
    nvars: int
    rule: object
    radius: Fraction
    norm_bound: bool = False
    polynomial: bool = False
    table: tuple = ()

    def coefficient(self, idx):
        if isinstance(idx, int):
            idx = (idx,)
        q = self.rule(idx)
        return q if isinstance(q, Fraction) else Fraction(q)

    def derivative(self, var=0):
        """Coefficient-wise partial derivative, as a new function."""

        outer = self.rule

        def rule(idx):
            shifted = tuple(e + 1 if i == var else e for i, e in enumerate(idx))
            return outer(shifted) * (idx[var] + 1)

        table = ()
        if self.polynomial and self.nvars == 1:
            table = tuple(self.table[k] * k for k in range(1, len(self.table)))
        return AnalyticFunction(
            f"{self.name}'",
            self.nvars,
            rule,
            self.radius,
            norm_bound=False,
            polynomial=self.polynomial,
            table=table,
        )


def _exp_rule(idx):
    return Fraction(1, math.factorial(idx[0]))


def _sin_rule(idx):
    k = idx[0]
    if k % 2 == 0:
        return Fraction(0)
    return Fraction((-1) ** (k // 2), math.factorial(k))


def _cos_rule(idx):
    k = idx[0]
    if k % 2 == 1:
        return Fraction(0)
    return Fraction((-1) ** (k // 2), math.factorial(k))


def _log1p_rule(idx):
    k = idx[0]
    if k == 0:
        return Fraction(0)
    return Fraction((-1) ** (k + 1), k)


_ENTIRE = Fraction(10**6)


class FunctionRegistry:
    """Append-only name table; registration is atomic."""

    def __init__(self, builtins=True):
        self._functions = {}
        self._lock = threading.Lock()
        if builtins:
            for name, rule, radius in [
                ("exp", _exp_rule, _ENTIRE),
                ("sin", _sin_rule, _ENTIRE),
                ("cos", _cos_rule, _ENTIRE),
                # evaluated only at infinitesimals in exact mode, where the
                # declared radius is metadata rather than a convergence claim
                ("log1p", _log1p_rule, Fraction(2)),
            ]:
                fn = AnalyticFunction(name, 1, rule, radius, norm_bound=True)
                self._functions[name] = fn

    def get(self, name):
        return self._functions.get(name)

    def names(self):
        return sorted(self._functions)

    def add(self, fn):
        with self._lock:
            if fn.name in self._functions:
                raise DuplicateName(f"function {fn.name!r} already registered")
            self._functions[fn.name] = fn
        return fn


def register_function(spec, registry=None):
    """Validate a function specification and add it to the registry.

    ``spec`` is a mapping with keys name, vars, radius, and either
    ``rule`` (a callable or builtin id) or ``table`` (finite coefficient
    list, zero tail); optional ``norm_bound``.
    """
    registry = registry if registry is not None else default_registry()
    name = spec.get("name")
    if not name or not isinstance(name, str):
        raise MalformedRule("a function needs a nonempty name")
    nvars = int(spec.get("vars", 1))
    if nvars < 1:
        raise MalformedRule("a function needs at least one variable")
    radius = Fraction(spec.get("radius", 0))
    if radius <= 1:
        raise MalformedRule(f"radius must exceed 1, got {radius}")
    norm_bound = bool(spec.get("norm_bound", False))
    table = spec.get("table")
    rule = spec.get("rule")
    if table is not None:
        if nvars != 1:
            raise MalformedRule("coefficient tables are one-variable only")
        table = tuple(Fraction(c) for c in table)
        fn = AnalyticFunction(
            name,
            1,
            lambda idx, _t=table: _t[idx[0]] if idx[0] < len(_t) else Fraction(0),
            radius,
            norm_bound=norm_bound,
            polynomial=True,
            table=table,
        )
    elif callable(rule):
        fn = AnalyticFunction(name, nvars, rule, radius, norm_bound=norm_bound)
    else:
        raise MalformedRule("need either a callable rule or a coefficient table")
    return registry.add(fn)


_DEFAULT = None
_DEFAULT_LOCK = threading.Lock()


def default_registry():
    global _DEFAULT
    with _DEFAULT_LOCK:
        if _DEFAULT is None:
            _DEFAULT = FunctionRegistry()
    return _DEFAULT


def load_registry_line(line, registry=None):
    """Parse ``name <n> vars <k> radius <a> rule <builtin|table: c...> [norm1]``."""
    tokens = line.split()
    if not tokens:
        return None
    spec = {}
    i = 0
    while i < len(tokens):
        key = tokens[i]
        if key == "name":
            spec["name"] = tokens[i + 1]
            i += 2
        elif key == "vars":
            spec["vars"] = int(tokens[i + 1])
            i += 2
        elif key == "radius":
            spec["radius"] = Fraction(tokens[i + 1])
            i += 2
        elif key == "rule":
            if tokens[i + 1] == "table:":
                spec["table"] = [Fraction(t) for t in tokens[i + 2 :] if t != "norm1"]
                if tokens[-1] == "norm1":
                    spec["norm_bound"] = True
                i = len(tokens)
            else:
                builtin = {"exp": _exp_rule, "sin": _sin_rule, "cos": _cos_rule, "log1p": _log1p_rule}.get(tokens[i + 1])
                if builtin is None:
                    raise MalformedRule(f"unknown builtin rule {tokens[i + 1]!r}")
                spec["rule"] = builtin
                i += 2
        elif key == "norm1":
            spec["norm_bound"] = True
            i += 1
        else:
            raise MalformedRule(f"unknown registration token {key!r}")
    return register_function(spec, registry)


def load_registry_file(path, registry=None):
    out = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(load_registry_line(line, registry))
    return out


def evaluate_analytic(fn, args, target_prec):
    """Sum the Taylor expansion at the given point, truncated at target_prec.

    Exact mode: arguments must be infinitesimal unless the function is a
    polynomial.  Termination comes from the argument valuations; the tail
    beyond the computed degree sits strictly above the target.
    """
    if len(args) != fn.nvars:
        raise ValueError(f"{fn.name} takes {fn.nvars} arguments")
    rank = args[0].rank if args else 1
    vals = []
    for a in args:
        v = valuation(a)
        if not fn.polynomial and not (v is INFINITE or v > GroupElement.zero(rank)):
            raise NotInfinitesimal(f"{fn.name} needs infinitesimal arguments in exact mode")
        vals.append(v)
    if fn.polynomial:
        bound = len(fn.table) - 1 if fn.nvars == 1 else None
        if bound is None:
            raise MalformedRule("polynomial evaluation needs a finite table")
        return _sum_expansion(fn, args, vals, None, bound, rank, prune=False)
    finite_vals = [v for v in vals if v is not INFINITE]
    if not finite_vals:
        c0 = fn.coefficient((0,) * fn.nvars)
        return TruncatedSeries.constant(c0, rank)
    min_v = min(finite_vals)
    if min_v.first() <= 0:
        raise PrecisionStall(
            "argument valuation has zero first coordinate; "
            "the expansion degree cannot be bounded in lexicographic rank > 1"
        )
    t1 = target_prec.first()
    bound = max(0, math.ceil(t1 / min_v.first()))
    return _sum_expansion(fn, args, vals, target_prec, bound, rank, prune=True)


def _sum_expansion(fn, args, vals, target_prec, bound, rank, prune):
    total = TruncatedSeries.zero(rank)
    nvars = fn.nvars
    one = TruncatedSeries.one(rank)

    def clip(x):
        return x if target_prec is None else x.truncate(target_prec)

    def walk(i, idx, product, vsum):
        nonlocal total
        if i == nvars:
            c = fn.coefficient(idx)
            if c:
                total = total + product.scale(c)
            return
        a, va = args[i], vals[i]
        cur = product
        for e in range(0, bound - sum(idx) + 1):
            if e:
                if va is INFINITE:
                    break
                new_v = vsum + va * e
                if prune and not (new_v < target_prec):
                    break
                cur = clip(cur * a)
                if cur.is_exact_zero():
                    break
                walk(i + 1, idx + (e,), cur, new_v)
            else:
                walk(i + 1, idx + (e,), cur, vsum)

    walk(0, (), one, GroupElement.zero(rank))
    return clip(total)


def poly_eval(coeffs, x, prec):
    """Horner evaluation of a polynomial with TruncatedSeries coefficients."""
    total = TruncatedSeries.zero(x.rank)
    for c in reversed(coeffs):
        total = total * x + c
        if prec is not INFINITE:
            total = total.truncate(prec)
    return total


def hensel_root(coeffs, target_prec, rank=1, trace=None):
    """Root of ``1 + y + sum a_i y^i`` with standard part -1.

    ``coeffs`` lists a_2..a_d, all infinitesimal.  Newton iteration from -1;
    the residual valuation at least doubles each step, recorded in ``trace``
    when a list is supplied.
    """
    for a in coeffs:
        v = valuation(a)
        if not (v is INFINITE or v > GroupElement.zero(rank)):
            raise NotInfinitesimal("higher coefficients must be infinitesimal")
        if a.prec is not INFINITE and a.prec < target_prec:
            raise PrecisionStall("input coefficients are blurrier than the requested root")
    p = [TruncatedSeries.one(rank), TruncatedSeries.one(rank), *coeffs]
    dp = [p[k].scale(k) for k in range(1, len(p))]
    y = TruncatedSeries.constant(Fraction(-1), rank)
    for _ in range(64):
        residual = poly_eval(p, y, target_prec)
        if trace is not None:
            trace.append(INFINITE if residual.approx.is_zero() else residual.approx.valuation())
        if residual.approx.is_zero():
            break
        if residual.approx.valuation() >= target_prec:
            break
        slope = poly_eval(dp, y, target_prec)
        y = (y - residual * invert(slope, target_prec)).truncate(target_prec)
    else:
        raise PrecisionStall("Newton iteration failed to reach the target")
    assert standard_part(y) == -1
    return y


def ms_drop_var(f, var):
    """Forget a variable that no monomial uses."""
    if f.var_degree(var):
        raise ValueError("variable still occurs")
    coeffs = {}
    for idx, c in f.coeffs.items():
        coeffs[idx[:var] + idx[var + 1 :]] = c
    return MultiSeries(f.nvars - 1, f.degree, coeffs, exact=f.exact, rank=f.rank)


def implicit_series(f, d_out, prec_out):
    """Solve ``f(x, y) = 0`` for y when f is regular of degree one in y.

    The last variable is the solved one.  Division of y by f yields
    ``y = Q f + r(x)``, and since Q is a unit near the origin the root is
    exactly r; its value at 0 is infinitesimal.
    """
    norm, _ = gauss_data(f)
    if not norm.is_zero():
        raise NotRegularDegreeOne("implicit solving needs additive norm zero")
    yvar = f.nvars - 1
    s = regular_degree(f, yvar)
    if s != 1:
        raise NotRegularDegreeOne(f"regular of degree {s}, need degree 1")
    g = MultiSeries.variable(yvar, f.nvars, max(f.degree, d_out), rank=f.rank)
    _, remainder = weierstrass_divide(f, g, yvar, d_out, prec_out)
    r = remainder[0]
    const = r.coefficient((0,) * r.nvars)
    if const.approx.terms and not (const.approx.valuation() > GroupElement.zero(r.rank)):
        raise NotRegularDegreeOne("root value at the origin is not infinitesimal")
    return ms_drop_var(r, yvar)


def sqrt_shifted(epsilon, d_out):
    """The series r with ``(r + epsilon)^2 = x + epsilon^2`` and r(0) = 0."""
    eps = epsilon if isinstance(epsilon, Fraction) else Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    deg = max(2, d_out)
    one = TruncatedSeries.one(1)
    h = MultiSeries(
        2,
        deg,
        {
            (1, 0): one,
            (0, 1): TruncatedSeries.constant(-2 * eps, 1),
            (0, 2): TruncatedSeries.constant(Fraction(-1), 1),
        },
        exact=True,
    )
    return implicit_series(h, d_out, INFINITE)
