"""Exact arithmetic kernel.

Scalars are Gaussian rationals (pairs of ``fractions.Fraction``); there is no
floating point anywhere in the package.  Multivariate data lives in
:class:`PolySeries`, a total-degree-truncated polynomial: a dict mapping
exponent tuples to nonzero scalars plus an inclusive degree cutoff.  A cutoff
of ``None`` means the value is an exact polynomial (nothing was discarded);
every operation propagates the tightest cutoff it can certify and raises
rather than silently returning a shorter-than-requested result.

:class:`RatPoly` is a quotient num/den of two PolySeries whose denominator
does not vanish at the origin.  Map germs are carried this way because chart
lifts produce unit denominators such as 1/(1+z1); keeping the quotient
unevaluated is what lets restrictions to the fixed hypersurface stay exact
polynomials instead of truncations.

Univariate helpers at the bottom (dense coefficient lists, lowest degree
first) back root solving and residue extraction: Euclidean gcd, Yun
squarefree decomposition, Gaussian-rational root search, Taylor shift,
Laurent residues at finite points and at infinity, and orbit-block residue
sums via a Bezout partial-fraction split.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    CompositionUnsafe,
    InsufficientTruncation,
    NotDivisible,
    ParseError,
    ZeroDenominatorIdentically,
)

__all__ = [
    "GaussianRational",
    "G_ZERO",
    "G_ONE",
    "G_I",
    "PolySeries",
    "RatPoly",
    "LaurentSeries",
    "ps_compose",
    "ps_divide_exact",
    "restrict_to_hyperplane",
    "ps_derive",
    "laurent_residue",
    "parse_polynomial",
    "parse_scalar",
    "format_polynomial",
]


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------

class GaussianRational:
    """An element of Q(i), held as exact real and imaginary Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return (G_ONE / self) ** (-exponent)
        result = G_ONE
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Field norm re^2 + im^2 (a nonnegative rational)."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_rational(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussianRational(other)
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def sort_key(self):
        return (self.re, self.im)

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


G_ZERO = GaussianRational(0)
G_ONE = GaussianRational(1)
G_I = GaussianRational(0, 1)


def _fraction_str(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def format_scalar(value: GaussianRational) -> str:
    """Canonical text form: "p/q", "p/q+r/si", "i", "-2i", "0"."""
    re, im = value.re, value.im
    if im == 0:
        return _fraction_str(re)
    if im == 1:
        im_part = "i"
    elif im == -1:
        im_part = "-i"
    else:
        im_part = _fraction_str(im) + "i"
    if re == 0:
        return im_part
    sign = "+" if im > 0 else ""
    return _fraction_str(re) + sign + im_part


# ---------------------------------------------------------------------------
# Truncated multivariate polynomials
# ---------------------------------------------------------------------------

def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _grlex_key(exponents):
    return (sum(exponents), exponents)


class PolySeries:
    """Multivariate polynomial truncated at a total degree.

    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    GaussianRational coefficients.  ``trunc`` is the inclusive total-degree
    cutoff, or None for an exact polynomial.  Instances are immutable; all
    operations return new values.
    """

    __slots__ = ("nvars", "trunc", "terms")

    def __init__(self, nvars: int, terms=None, trunc=None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean = {}
        for expo, coeff in (terms or {}).items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != nvars or any(e < 0 for e in expo):
                raise ValueError(f"bad exponent {expo} for nvars={nvars}")
            coeff = GaussianRational.coerce(coeff)
            if coeff.is_zero():
                continue
            if trunc is not None and sum(expo) > trunc:
                continue
            clean[expo] = coeff
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("PolySeries is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(nvars: int, trunc=None) -> "PolySeries":
        return PolySeries(nvars, {}, trunc)

    @staticmethod
    def const(nvars: int, value, trunc=None) -> "PolySeries":
        return PolySeries(nvars, {(0,) * nvars: GaussianRational.coerce(value)}, trunc)

    @staticmethod
    def variable(nvars: int, index: int, trunc=None) -> "PolySeries":
        if not 0 <= index < nvars:
            raise ValueError(f"variable index {index} out of range for nvars={nvars}")
        expo = [0] * nvars
        expo[index] = 1
        return PolySeries(nvars, {tuple(expo): G_ONE}, trunc)

    @staticmethod
    def monomial(nvars: int, exponents, coeff=1, trunc=None) -> "PolySeries":
        return PolySeries(nvars, {tuple(exponents): GaussianRational.coerce(coeff)}, trunc)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return self.trunc is None

    def total_degree(self):
        """Largest stored total degree (-inf for the zero value)."""
        return max((sum(e) for e in self.terms), default=-math.inf)

    def order(self):
        """Smallest stored total degree (+inf for the zero value)."""
        return min((sum(e) for e in self.terms), default=math.inf)

    def order_in(self, var: int):
        """Smallest stored exponent of one variable (+inf for zero)."""
        return min((e[var] for e in self.terms), default=math.inf)

    def order_in_vars(self, variables: Sequence[int]):
        """Smallest stored total degree in a subset of the variables."""
        vs = tuple(variables)
        return min((sum(e[v] for v in vs) for e in self.terms), default=math.inf)

    def constant_term(self) -> GaussianRational:
        return self.terms.get((0,) * self.nvars, G_ZERO)

    def coefficient(self, exponents) -> GaussianRational:
        return self.terms.get(tuple(exponents), G_ZERO)

    def depends_on(self, var: int) -> bool:
        return any(e[var] for e in self.terms)

    def used_variables(self) -> tuple:
        used = set()
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e:
                    used.add(i)
        return tuple(sorted(used))

    def sorted_terms(self):
        """Terms in graded lexicographic order, variable index ascending."""
        return sorted(self.terms.items(), key=lambda item: _grlex_key(item[0]))

    # -- ring operations ---------------------------------------------------

    def _coerce_operand(self, other):
        if isinstance(other, PolySeries):
            if other.nvars != self.nvars:
                raise ValueError("operands have different variable counts")
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return PolySeries.const(self.nvars, other)
        return None

    def __add__(self, other):
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        trunc = _min_trunc(self.trunc, other.trunc)
        out = dict(self.terms)
        for expo, coeff in other.terms.items():
            acc = out.get(expo, G_ZERO) + coeff
            if acc.is_zero():
                out.pop(expo, None)
            else:
                out[expo] = acc
        return PolySeries(self.nvars, out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return PolySeries(self.nvars, {e: -c for e, c in self.terms.items()}, self.trunc)

    def __sub__(self, other):
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            scalar = GaussianRational.coerce(other)
            if scalar.is_zero():
                return PolySeries.zero(self.nvars, self.trunc)
            return PolySeries(
                self.nvars, {e: c * scalar for e, c in self.terms.items()}, self.trunc
            )
        other = self._coerce_operand(other)
        if other is None:
            return NotImplemented
        trunc = _min_trunc(self.trunc, other.trunc)
        out = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                expo = tuple(x + y for x, y in zip(ea, eb))
                if trunc is not None and sum(expo) > trunc:
                    continue
                acc = out.get(expo, G_ZERO) + ca * cb
                if acc.is_zero():
                    out.pop(expo, None)
                else:
                    out[expo] = acc
        return PolySeries(self.nvars, out, trunc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative power of a PolySeries")
        result = PolySeries.const(self.nvars, 1, self.trunc)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base_needed = e > 1
            if base_needed:
                base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = PolySeries.const(self.nvars, other)
        if not isinstance(other, PolySeries):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- structure operations ----------------------------------------------

    def truncated(self, trunc) -> "PolySeries":
        """Re-truncate to a (not looser than certified) cutoff."""
        new = _min_trunc(self.trunc, trunc)
        return PolySeries(self.nvars, self.terms, new)

    def derive(self, var: int) -> "PolySeries":
        """Formal partial derivative; the cutoff drops by one."""
        if not 0 <= var < self.nvars:
            raise ValueError("variable index out of range")
        out = {}
        for expo, coeff in self.terms.items():
            e = expo[var]
            if e == 0:
                continue
            new = list(expo)
            new[var] = e - 1
            out[tuple(new)] = coeff * e
        trunc = None if self.trunc is None else max(self.trunc - 1, 0)
        return PolySeries(self.nvars, out, trunc)

    def restrict(self, variables) -> "PolySeries":
        """Set the listed variables to zero (drop terms using them)."""
        if isinstance(variables, int):
            variables = (variables,)
        vs = set(variables)
        out = {e: c for e, c in self.terms.items() if all(e[v] == 0 for v in vs)}
        return PolySeries(self.nvars, out, self.trunc)

    def homogeneous_part(self, degree: int) -> "PolySeries":
        out = {e: c for e, c in self.terms.items() if sum(e) == degree}
        return PolySeries(self.nvars, out, self.trunc)

    def divide_monomial(self, exponents) -> "PolySeries":
        """Exact division by a monomial; NotDivisible on any short exponent."""
        expo = tuple(exponents)
        bad = {}
        out = {}
        for e, c in self.terms.items():
            if all(x >= y for x, y in zip(e, expo)):
                out[tuple(x - y for x, y in zip(e, expo))] = c
            else:
                bad[e] = c
        if bad:
            raise NotDivisible(
                "monomial division left a remainder",
                remainder=PolySeries(self.nvars, bad, self.trunc),
            )
        trunc = None if self.trunc is None else self.trunc - sum(expo)
        return PolySeries(self.nvars, out, trunc)

    def evaluate(self, point: Sequence) -> GaussianRational:
        """Exact evaluation; only meaningful for exact polynomials."""
        values = [GaussianRational.coerce(v) for v in point]
        if len(values) != self.nvars:
            raise ValueError("point dimension mismatch")
        total = G_ZERO
        for expo, coeff in self.terms.items():
            term = coeff
            for v, e in zip(values, expo):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def eval_partial(self, assignments: dict) -> "PolySeries":
        """Substitute exact values for some variables, keeping the others."""
        out = {}
        for expo, coeff in self.terms.items():
            factor = coeff
            new = list(expo)
            for var, value in assignments.items():
                e = expo[var]
                if e:
                    factor = factor * GaussianRational.coerce(value) ** e
                new[var] = 0
            if factor.is_zero():
                continue
            key = tuple(new)
            acc = out.get(key, G_ZERO) + factor
            if acc.is_zero():
                out.pop(key, None)
            else:
                out[key] = acc
        # Substituting a nonzero value into a truncated series mixes unknown
        # high-degree terms into every retained degree; only exact data stays
        # certified.
        if self.trunc is not None and any(
            not GaussianRational.coerce(v).is_zero() for v in assignments.values()
        ):
            raise InsufficientTruncation(
                "nonzero substitution into a truncated series is not certified"
            )
        return PolySeries(self.nvars, out, self.trunc)

    def compose(self, args: Sequence["PolySeries"]) -> "PolySeries":
        return ps_compose(self, args)

    def unit_inverse(self, trunc: int) -> "PolySeries":
        """Geometric-series inverse of a unit (nonzero constant term)."""
        c = self.constant_term()
        if c.is_zero():
            raise ZeroDivisionError("unit_inverse of a non-unit")
        if trunc is None:
            raise ValueError("unit_inverse needs an explicit cutoff")
        depth = trunc
        if self.trunc is not None:
            depth = min(depth, self.trunc)
        u = (self - c).truncated(depth) * (G_ONE / c)
        # 1/(c(1+u)) = (1/c) * sum (-u)^k ; ord(u) >= 1 so the sum is finite.
        acc = PolySeries.const(self.nvars, 1, depth)
        power = PolySeries.const(self.nvars, 1, depth)
        for _ in range(depth):
            power = power * (-u)
            if power.is_zero():
                break
            acc = acc + power
        return acc * (G_ONE / c)

    def univariate_coeffs(self, var: int) -> list:
        """Dense coefficient list when the value uses only one variable."""
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e and i != var:
                    raise ValueError("series is not univariate in the requested variable")
        degree = 0
        for expo in self.terms:
            degree = max(degree, expo[var])
        coeffs = [G_ZERO] * (degree + 1)
        for expo, coeff in self.terms.items():
            coeffs[expo[var]] = coeff
        return coeffs if self.terms else [G_ZERO]

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        cutoff = "exact" if self.trunc is None else str(self.trunc)
        return f"PolySeries({format_polynomial(self)!r}, trunc={cutoff})"


def ps_derive(f: PolySeries, var: int) -> PolySeries:
    """Formal partial derivative (module-level spelling of PolySeries.derive)."""
    return f.derive(var)


def restrict_to_hyperplane(f: PolySeries, var: int) -> PolySeries:
    """Set one variable to zero, dropping every term that carries it."""
    return f.restrict(var)


def ps_compose(f: PolySeries, args: Sequence[PolySeries]) -> PolySeries:
    """Truncation-safe composition f(args[0], ..., args[n-1]).

    Safe cases: every argument has zero constant term (classical formal
    substitution), or f is an exact polynomial (finitely many terms, so any
    exact substitution is legitimate).  Anything else raises
    CompositionUnsafe, because discarded tail terms of f would contribute to
    retained degrees of the result.
    """
    if len(args) != f.nvars:
        raise ValueError("argument count must match the variable count")
    if not args:
        return f
    nvars_out = args[0].nvars
    trunc = f.trunc
    for a in args:
        if a.nvars != nvars_out:
            raise ValueError("composition arguments must share a variable count")
        trunc = _min_trunc(trunc, a.trunc)
    has_const = any(not a.constant_term().is_zero() for a in args)
    if has_const and f.trunc is not None:
        raise CompositionUnsafe(
            "argument has a nonzero constant term and the outer series is truncated"
        )
    result = PolySeries.zero(nvars_out, trunc)
    power_cache = [dict() for _ in args]

    def arg_power(i: int, e: int) -> PolySeries:
        cache = power_cache[i]
        if e not in cache:
            if e == 0:
                cache[e] = PolySeries.const(nvars_out, 1, trunc)
            else:
                cache[e] = arg_power(i, e - 1) * args[i]
        return cache[e]

    for expo, coeff in f.sorted_terms():
        term = PolySeries.const(nvars_out, coeff, trunc)
        for i, e in enumerate(expo):
            if e:
                term = term * arg_power(i, e)
        result = result + term
    return result


def _leading_term(f: PolySeries, order_key):
    return max(f.terms.items(), key=lambda item: order_key(item[0]))


def ps_divide_exact(num: PolySeries, den: PolySeries) -> PolySeries:
    """Exact division in the truncated ring, remainder-witnessed.

    Reduction by the single divisor under a lexicographic order that puts the
    divisor's own leading variable first; raises NotDivisible with the
    remainder attached when the division is not exact.
    """
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if num.nvars != den.nvars:
        raise ValueError("operands have different variable counts")
    if num.is_zero():
        return PolySeries.zero(num.nvars, _min_trunc(num.trunc, den.trunc))
    if len(den.terms) == 1:
        (expo, coeff), = den.terms.items()
        return num.divide_monomial(expo) * (G_ONE / coeff)

    # Order with the divisor's leading variable first so the reduction is
    # guaranteed to terminate for the divisors the package meets (powers of a
    # coordinate, cutting functions, units).
    lead_var = min(
        (i for e in den.terms for i, x in enumerate(e) if x),
        key=lambda i: -max(e[i] for e in den.terms),
    )
    perm = (lead_var,) + tuple(i for i in range(num.nvars) if i != lead_var)

    def key(expo):
        return tuple(expo[p] for p in perm)

    lt_expo, lt_coeff = _leading_term(den, key)
    trunc = _min_trunc(num.trunc, den.trunc)
    remainder = dict(num.terms)
    quotient = {}
    guard = 0
    limit = 16 * (len(num.terms) + 1) * (len(den.terms) + 1) * (num.total_degree() + 2) ** 2
    while remainder:
        guard += 1
        if guard > limit:
            raise NotDivisible(
                "division did not terminate",
                remainder=PolySeries(num.nvars, remainder, trunc),
            )
        expo = max(remainder, key=key)
        coeff = remainder[expo]
        if not all(x >= y for x, y in zip(expo, lt_expo)):
            raise NotDivisible(
                "exact division left a remainder",
                remainder=PolySeries(num.nvars, remainder, trunc),
            )
        q_expo = tuple(x - y for x, y in zip(expo, lt_expo))
        q_coeff = coeff / lt_coeff
        quotient[q_expo] = quotient.get(q_expo, G_ZERO) + q_coeff
        for d_expo, d_coeff in den.terms.items():
            t = tuple(x + y for x, y in zip(q_expo, d_expo))
            acc = remainder.get(t, G_ZERO) - q_coeff * d_coeff
            if acc.is_zero():
                remainder.pop(t, None)
            else:
                remainder[t] = acc
    return PolySeries(num.nvars, quotient, trunc)


# ---------------------------------------------------------------------------
# Rational values: polynomial numerator over a unit denominator
# ---------------------------------------------------------------------------

class RatPoly:
    """Quotient num/den of PolySeries with den a unit at the origin.

    All germ components are stored this way (den = 1 for polynomial input).
    Exact arithmetic with no normalization beyond dropping a shared monomial
    content; sizes stay small at the scale this package targets.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: PolySeries, den: PolySeries = None):
        if den is None:
            den = PolySeries.const(num.nvars, 1, None)
        if num.nvars != den.nvars:
            raise ValueError("numerator and denominator variable counts differ")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.constant_term().is_zero():
            raise ZeroDenominatorIdentically(
                "denominator vanishes at the origin; not a unit"
            )
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatPoly is immutable")

    @staticmethod
    def coerce(value, nvars: int) -> "RatPoly":
        if isinstance(value, RatPoly):
            return value
        if isinstance(value, PolySeries):
            return RatPoly(value)
        if isinstance(value, (int, Fraction, GaussianRational)):
            return RatPoly(PolySeries.const(nvars, value))
        raise TypeError(f"cannot coerce {type(value).__name__} to RatPoly")

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        """True when the denominator is a nonzero constant."""
        return self.den == PolySeries.const(self.nvars, self.den.constant_term())

    def as_polynomial(self) -> PolySeries:
        """The underlying polynomial when den is constant; exact division otherwise."""
        c = self.den.constant_term()
        if self.den == PolySeries.const(self.nvars, c):
            return self.num * (G_ONE / c)
        return ps_divide_exact(self.num, self.den)

    def __add__(self, other):
        other = RatPoly.coerce(other, self.nvars)
        return RatPoly(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatPoly(-self.num, self.den)

    def __sub__(self, other):
        other = RatPoly.coerce(other, self.nvars)
        return RatPoly(self.num * other.den - other.num * self.den, self.den * other.den)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = RatPoly.coerce(other, self.nvars)
        return RatPoly(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatPoly.coerce(other, self.nvars)
        if other.num.constant_term().is_zero():
            raise ZeroDenominatorIdentically("division by a non-unit rational value")
        return RatPoly(self.num * other.den, self.den * other.num)

    def __eq__(self, other):
        try:
            other = RatPoly.coerce(other, self.nvars)
        except TypeError:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        # Hash collisions across equal unreduced forms are acceptable.
        return hash(self.nvars)

    def derive(self, var: int) -> "RatPoly":
        return RatPoly(
            self.num.derive(var) * self.den - self.num * self.den.derive(var),
            self.den * self.den,
        )

    def restrict_unit(self, variables) -> "RatPoly":
        """Restriction to a coordinate hyperplane; den must stay a unit on it."""
        num = self.num.restrict(variables)
        den = self.den.restrict(variables)
        return RatPoly(num, den)

    def divide_by_monomial_power(self, var: int, power: int) -> "RatPoly":
        expo = [0] * self.nvars
        expo[var] = power
        return RatPoly(self.num.divide_monomial(expo), self.den)

    def order_in_vars(self, variables):
        return self.num.order_in_vars(variables)

    def evaluate(self, point) -> GaussianRational:
        d = self.den.evaluate(point)
        if d.is_zero():
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(point) / d

    def compose_series(self, args: Sequence[PolySeries]) -> "RatPoly":
        """Substitute PolySeries arguments into num and den."""
        return RatPoly(ps_compose(self.num, args), ps_compose(self.den, args))

    def compose_rational(self, args: Sequence["RatPoly"]) -> "RatPoly":
        """Substitute RatPoly arguments; clears denominators exactly.

        For each term of a polynomial p of degree d in the i-th variable the
        substitution multiplies through by den_i^d, so the result is again a
        quotient of polynomials.
        """
        if len(args) != self.nvars:
            raise ValueError("argument count must match the variable count")
        num = _poly_compose_rational(self.num, args)
        den = _poly_compose_rational(self.den, args)
        return num / den

    def as_series(self, trunc: int) -> PolySeries:
        """Truncated expansion num * den^{-1} to an explicit cutoff."""
        inv = self.den.unit_inverse(trunc)
        return (self.num.truncated(trunc) * inv).truncated(_min_trunc(trunc, self.num.trunc))

    def __str__(self):
        if self.den == PolySeries.const(self.nvars, 1):
            return format_polynomial(self.num)
        return f"({format_polynomial(self.num)})/({format_polynomial(self.den)})"

    def __repr__(self):
        return f"RatPoly({self})"


def _poly_compose_rational(p: PolySeries, args: Sequence[RatPoly]) -> RatPoly:
    if p.trunc is not None and any(
        not a.num.constant_term().is_zero() for a in args
    ):
        raise CompositionUnsafe(
            "rational substitution with constant terms into a truncated series"
        )
    nvars_out = args[0].nvars if args else p.nvars
    # Common denominator: product of den_i^(max degree of variable i).
    max_deg = [0] * p.nvars
    for expo in p.terms:
        for i, e in enumerate(expo):
            max_deg[i] = max(max_deg[i], e)
    den_pows = []
    for i, a in enumerate(args):
        pows = [PolySeries.const(nvars_out, 1)]
        for _ in range(max_deg[i]):
            pows.append(pows[-1] * a.den)
        den_pows.append(pows)
    num_pows = []
    for i, a in enumerate(args):
        pows = [PolySeries.const(nvars_out, 1)]
        for _ in range(max_deg[i]):
            pows.append(pows[-1] * a.num)
        num_pows.append(pows)
    total = PolySeries.zero(nvars_out)
    for expo, coeff in p.terms.items():
        term = PolySeries.const(nvars_out, coeff)
        for i, e in enumerate(expo):
            term = term * num_pows[i][e] * den_pows[i][max_deg[i] - e]
        total = total + term
    full_den = PolySeries.const(nvars_out, 1)
    for i in range(p.nvars):
        full_den = full_den * den_pows[i][max_deg[i]]
    return RatPoly(total, full_den)


def matrix_determinant(rows) -> GaussianRational:
    """Exact determinant of a square GaussianRational matrix (elimination)."""
    n = len(rows)
    m = [[GaussianRational.coerce(c) for c in row] for row in rows]
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    det = G_ONE
    for col in range(n):
        pivot = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if pivot is None:
            return G_ZERO
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col]
        inv = G_ONE / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor.is_zero():
                continue
            for c in range(col, n):
                m[r][c] = m[r][c] - factor * m[col][c]
    return det


# ---------------------------------------------------------------------------
# Univariate dense helpers (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------

def _utrim(coeffs: list) -> list:
    out = list(coeffs)
    while out and out[-1].is_zero():
        out.pop()
    return out


def _uadd(a, b):
    n = max(len(a), len(b))
    return _utrim([
        (a[i] if i < len(a) else G_ZERO) + (b[i] if i < len(b) else G_ZERO)
        for i in range(n)
    ])


def _uneg(a):
    return [-c for c in a]


def _uscale(a, s):
    return _utrim([c * s for c in a])


def _umul(a, b):
    if not a or not b:
        return []
    out = [G_ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return _utrim(out)


def _udivmod(a, b):
    b = _utrim(b)
    if not b:
        raise ZeroDivisionError("univariate division by zero")
    a = list(_utrim(a))
    q = [G_ZERO] * max(len(a) - len(b) + 1, 0)
    inv_lead = G_ONE / b[-1]
    while len(a) >= len(b):
        factor = a[-1] * inv_lead
        shift = len(a) - len(b)
        q[shift] = q[shift] + factor
        for i, cb in enumerate(b):
            a[shift + i] = a[shift + i] - factor * cb
        a = _utrim(a)
        if not a:
            break
    return _utrim(q), _utrim(a)


def _umonic(a):
    a = _utrim(a)
    if not a:
        return []
    return _uscale(a, G_ONE / a[-1])


def _ugcd(a, b):
    a, b = _utrim(a), _utrim(b)
    while b:
        _, r = _udivmod(a, b)
        a, b = b, r
    return _umonic(a)


def _uderive(a):
    return _utrim([a[i] * i for i in range(1, len(a))])


def _ueval(a, x: GaussianRational) -> GaussianRational:
    acc = G_ZERO
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _ushift(a, p: GaussianRational):
    """Taylor recentering: coefficients of a(t + p) (exact Horner shift)."""
    out = []
    for c in reversed(_utrim(a)):
        # out := out * (t + p) + c
        new = [G_ZERO] * (len(out) + 1)
        for i, x in enumerate(out):
            new[i + 1] = new[i + 1] + x
            new[i] = new[i] + x * p
        new[0] = new[0] + c
        out = new
    return _utrim(out)


def _uval_order(a) -> int:
    a_t = _utrim(a)
    if not a_t:
        raise ZeroDivisionError("valuation of the zero polynomial")
    for i, c in enumerate(a):
        if not c.is_zero():
            return i
    raise AssertionError


def _uxgcd(a, b):
    """Extended Euclid: returns (g, u, v) with u*a + v*b = g, g monic."""
    r0, r1 = _utrim(a), _utrim(b)
    s0, s1 = [G_ONE], []
    t0, t1 = [], [G_ONE]
    while r1:
        q, r = _udivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _uadd(s0, _uneg(_umul(q, s1)))
        t0, t1 = t1, _uadd(t0, _uneg(_umul(q, t1)))
    if not r0:
        return [], s0, t0
    lead = r0[-1]
    inv = G_ONE / lead
    return _uscale(r0, inv), _uscale(s0, inv), _uscale(t0, inv)


def _usquarefree(a):
    """Yun decomposition: list of (factor, multiplicity), factors monic."""
    a = _umonic(a)
    if len(a) <= 1:
        return []
    d = _uderive(a)
    g = _ugcd(a, d)
    out = []
    if len(g) == 1:
        return [(a, 1)]
    w, _ = _udivmod(a, g)
    y, _ = _udivmod(d, g)
    z = _uadd(y, _uneg(_uderive(w)))
    k = 1
    while _utrim(z):
        f = _ugcd(w, z)
        if len(f) > 1:
            out.append((f, k))
        w, _ = _udivmod(w, f)
        y, _ = _udivmod(z, f)
        z = _uadd(y, _uneg(_uderive(w)))
        k += 1
    if len(w) > 1:
        out.append((w, k))
    return out


def _gaussian_integer_divisors(g: GaussianRational, cap_norm: int = 10**7):
    """All Gaussian-integer divisors of a nonzero Gaussian integer.

    Enumerates candidates d with |d|^2 dividing |g|^2 and d | g exactly.
    Returns None when |g|^2 exceeds the cap (caller falls back to
    orbit-aggregated reporting).
    """
    norm = int(g.norm())
    if norm == 0:
        raise ZeroDivisionError
    if norm > cap_norm:
        return None
    divisor_norms = [m for m in range(1, norm + 1) if norm % m == 0]
    out = []
    for m in divisor_norms:
        a = 0
        while a * a <= m:
            b2 = m - a * a
            b = math.isqrt(b2)
            if b * b == b2:
                for ca, cb in {(a, b), (a, -b), (-a, b), (-a, -b), (b, a), (b, -a), (-b, a), (-b, -a)}:
                    d = GaussianRational(ca, cb)
                    if d.is_zero():
                        continue
                    q = g / d
                    if q.re.denominator == 1 and q.im.denominator == 1:
                        out.append(d)
            a += 1
    # dedupe
    seen = {}
    for d in out:
        seen[(d.re, d.im)] = d
    return list(seen.values())


def gaussian_rational_roots(coeffs):
    """Gaussian-rational roots of a squarefree univariate polynomial.

    Returns (roots, certified_complete).  Uses the rational-root bound over
    Z[i] after clearing denominators; complete whenever the divisor
    enumeration stayed under its norm cap.
    """
    a = _utrim(list(coeffs))
    if len(a) <= 1:
        return [], True
    roots = []
    # split off the root at 0 first
    val = 0
    while a[val].is_zero():
        val += 1
    if val:
        roots.append(G_ZERO)
        a = a[val:]
        if len(a) <= 1:
            return roots, True
    # clear denominators to Z[i]
    scale = 1
    for c in a:
        scale = scale * c.re.denominator // math.gcd(scale, c.re.denominator)
        scale = scale * c.im.denominator // math.gcd(scale, c.im.denominator)
    a_int = [c * scale for c in a]
    lead = a_int[-1]
    const = a_int[0]
    ps = _gaussian_integer_divisors(const)
    qs = _gaussian_integer_divisors(lead)
    if ps is None or qs is None:
        return roots, False
    candidates = {}
    for p in ps:
        for q in qs:
            c = p / q
            candidates[(c.re, c.im)] = c
    for cand in candidates.values():
        if _ueval(a, cand).is_zero():
            roots.append(cand)
    return roots, True


def laurent_coefficient(num, den, index: int, depth_hint=None):
    """Coefficient of t^index in num/den expanded at t = 0.

    num, den are dense coefficient lists of exact polynomials; the expansion
    is the formal Laurent series at the origin.
    """
    den = _utrim(list(den))
    num = _utrim(list(num))
    if not den:
        raise ZeroDenominatorIdentically("Laurent expansion over a zero denominator")
    if not num:
        return G_ZERO
    k = _uval_order(den)
    u = den[k:]
    # coefficient of t^index in num/ (t^k u) = coefficient of t^(index+k) in num/u
    target = index + k
    if target < 0:
        return G_ZERO
    # power-series inverse of u to degree target
    inv = [G_ONE / u[0]]
    for d in range(1, target + 1):
        s = G_ZERO
        for j in range(1, min(d, len(u) - 1) + 1):
            s = s + u[j] * inv[d - j]
        inv.append(-s / u[0])
    total = G_ZERO
    for i, c in enumerate(num):
        if i > target:
            break
        total = total + c * inv[target - i]
    return total


class LaurentSeries:
    """Formal Laurent series in one variable with exact coefficients.

    coeffs maps integer exponents (possibly negative) to scalars; cutoff is
    the largest exponent certified (None = exact finite expression).
    """

    __slots__ = ("coeffs", "cutoff")

    def __init__(self, coeffs=None, cutoff=None):
        clean = {}
        for e, c in (coeffs or {}).items():
            c = GaussianRational.coerce(c)
            if c.is_zero():
                continue
            if cutoff is not None and e > cutoff:
                continue
            clean[int(e)] = c
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "cutoff", cutoff)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentSeries is immutable")

    @staticmethod
    def from_quotient(num, den, cutoff: int) -> "LaurentSeries":
        """Expand num/den (dense polynomial lists) at 0 up to t^cutoff."""
        den = _utrim(list(den))
        if not den:
            raise ZeroDenominatorIdentically("Laurent expansion over a zero denominator")
        num = _utrim(list(num))
        if not num:
            return LaurentSeries({}, cutoff)
        k = _uval_order(den)
        v = _uval_order(num) if num else 0
        out = {}
        for e in range(v - k, cutoff + 1):
            out[e] = laurent_coefficient(num, den, e)
        return LaurentSeries(out, cutoff)

    def min_degree(self):
        return min(self.coeffs, default=math.inf)

    def coefficient(self, e: int) -> GaussianRational:
        if self.cutoff is not None and e > self.cutoff:
            raise InsufficientTruncation(f"coefficient t^{e} beyond the cutoff")
        return self.coeffs.get(e, G_ZERO)

    def residue(self) -> GaussianRational:
        return self.coefficient(-1)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            s = GaussianRational.coerce(other)
            return LaurentSeries({e: c * s for e, c in self.coeffs.items()}, self.cutoff)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            cuts = [c for c in (self.cutoff, other.cutoff) if c is not None]
            return LaurentSeries({}, min(cuts) if cuts else None)
        cut = None
        if self.cutoff is not None or other.cutoff is not None:
            c1 = math.inf if self.cutoff is None else self.cutoff + other.min_degree()
            c2 = math.inf if other.cutoff is None else other.cutoff + self.min_degree()
            cut = int(min(c1, c2))
        out = {}
        for e1, a in self.coeffs.items():
            for e2, b in other.coeffs.items():
                e = e1 + e2
                if cut is not None and e > cut:
                    continue
                acc = out.get(e, G_ZERO) + a * b
                if acc.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = acc
        return LaurentSeries(out, cut)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        cut = None
        if self.cutoff is not None or other.cutoff is not None:
            cut = int(min(
                math.inf if self.cutoff is None else self.cutoff,
                math.inf if other.cutoff is None else other.cutoff,
            ))
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            acc = out.get(e, G_ZERO) + c
            if acc.is_zero():
                out.pop(e, None)
            else:
                out[e] = acc
        return LaurentSeries(out, cut)

    def __truediv__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if not other.coeffs:
            raise ZeroDenominatorIdentically("Laurent division by zero")
        k = other.min_degree()
        if other.cutoff is not None and k > other.cutoff:
            raise InsufficientTruncation("divisor has no certified leading term")
        if not self.coeffs:
            return LaurentSeries({}, self.cutoff)
        v = self.min_degree()
        # Coefficients of the quotient are certified to the weaker of the two
        # inputs; exact inputs get a default carried depth past the residue.
        depth_n = math.inf if self.cutoff is None else self.cutoff - v
        depth_d = math.inf if other.cutoff is None else other.cutoff - k
        depth = min(depth_n, depth_d)
        cut = None if depth is math.inf else int(v - k + depth)
        carried = (v - k + 16) if cut is None else cut
        num = [self.coeffs.get(v + i, G_ZERO) for i in range(carried - (v - k) + 1)]
        den = [other.coeffs.get(k + i, G_ZERO) for i in range(carried - (v - k) + 1)]
        out = {}
        for e in range(v - k, carried + 1):
            out[e] = laurent_coefficient(num, den, e - (v - k))
        return LaurentSeries(out, cut if cut is not None else carried)

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = [f"({format_scalar(c)})*t^{e}" for e, c in sorted(self.coeffs.items())]
        return " + ".join(parts)


def laurent_residue(num, den) -> GaussianRational:
    """Coefficient of t^(-1) in num/den expanded at t = 0.

    Accepts dense coefficient lists, univariate PolySeries, or LaurentSeries.
    The pole order is resolved before extraction; if the inputs carry finite
    cutoffs that cannot certify the needed coefficients the call raises
    InsufficientTruncation.
    """
    if isinstance(num, LaurentSeries) or isinstance(den, LaurentSeries):
        if not isinstance(num, LaurentSeries) or not isinstance(den, LaurentSeries):
            raise TypeError("mixed Laurent/polynomial residue arguments")
        return (num / den).residue()
    num_list, num_cut = _residue_input(num)
    den_list, den_cut = _residue_input(den)
    den_t = _utrim(den_list)
    if not den_t:
        raise ZeroDenominatorIdentically("residue of a quotient by zero")
    k = _uval_order(den_list)
    needed = k - 1
    for cut, label in ((num_cut, "numerator"), (den_cut, "denominator")):
        if cut is not None and needed > cut:
            raise InsufficientTruncation(
                f"pole order {k} needs {label} coefficients beyond its cutoff {cut}"
            )
    return laurent_coefficient(num_list, den_list, -1)


def _residue_input(value):
    if isinstance(value, PolySeries):
        used = value.used_variables()
        if len(used) > 1:
            raise ValueError("residue input must be univariate")
        var = used[0] if used else 0
        return value.univariate_coeffs(var), value.trunc
    if isinstance(value, (list, tuple)):
        return [GaussianRational.coerce(c) for c in value], None
    raise TypeError(f"unsupported residue input {type(value).__name__}")


def residue_at_point(num, den, point: GaussianRational) -> GaussianRational:
    """Residue of the rational function num/den at a finite rational point."""
    p = GaussianRational.coerce(point)
    return laurent_residue(_ushift(list(num), p), _ushift(list(den), p))


def residue_at_infinity(num, den) -> GaussianRational:
    """Residue at infinity of (num/den) dt: minus the 1/t coefficient there.

    Computed exactly through t = 1/u: Res_inf = -Res_0 [ R(1/u) / u^2 ].
    """
    num = _utrim([GaussianRational.coerce(c) for c in num])
    den = _utrim([GaussianRational.coerce(c) for c in den])
    if not den:
        raise ZeroDenominatorIdentically("residue at infinity over zero")
    if not num:
        return G_ZERO
    d = max(len(num), len(den)) - 1
    # R(1/u) = (rev_d num)(u) / (rev_d den)(u) with both padded to degree d.
    rev_num = list(reversed(num + [G_ZERO] * (d + 1 - len(num))))
    rev_den = list(reversed(den + [G_ZERO] * (d + 1 - len(den))))
    # divide by u^2
    rev_den = [G_ZERO, G_ZERO] + rev_den
    return -laurent_residue(rev_num, rev_den)


def residue_block_sum(num, den, factor) -> GaussianRational:
    """Exact sum of residues of num/den over all roots of one factor.

    den = factor^k * rest with gcd(factor, rest) = 1; the Bezout identity
    splits off the factor's partial-fraction block, whose only finite poles
    are the factor's roots, so the block's total residue is minus its residue
    at infinity -- no root extraction needed.
    """
    num = _utrim([GaussianRational.coerce(c) for c in num])
    den = _utrim([GaussianRational.coerce(c) for c in den])
    f = _umonic([GaussianRational.coerce(c) for c in factor])
    if len(f) <= 1:
        return G_ZERO
    k = 0
    rest = den
    while True:
        q, r = _udivmod(rest, f)
        if r:
            break
        rest = q
        k += 1
    if k == 0:
        raise ValueError("factor does not divide the denominator")
    fk = [G_ONE]
    for _ in range(k):
        fk = _umul(fk, f)
    g, u, v = _uxgcd(fk, rest)
    if len(g) != 1:
        raise ValueError("factor is not coprime to the remaining denominator")
    # 1/(fk*rest) = v/fk + u/rest  =>  block = num*v / fk
    block_num = _umul(num, v)
    return -residue_at_infinity(block_num, fk)


def symbolic_residue_mod(num, den, factor):
    """Per-root residue of num/den as a polynomial in a root of `factor`.

    Valid for simple roots: den = factor * rest, and the residue at a root
    theta is num(theta) / (factor'(theta) * rest(theta)); the returned dense
    list represents that value in Q(i)[theta]/(factor).
    """
    f = _umonic([GaussianRational.coerce(c) for c in factor])
    num = [GaussianRational.coerce(c) for c in num]
    den = [GaussianRational.coerce(c) for c in den]
    rest, r = _udivmod(den, f)
    if r:
        raise ValueError("factor does not divide the denominator")
    _, r2 = _udivmod(rest, f)
    if not _utrim(r2):
        raise ValueError("root is not simple in the denominator")
    dprime = _umul(_uderive(f), rest)
    g, inv, _ = _uxgcd(_udivmod(dprime, f)[1], f)
    if len(g) != 1:
        raise ValueError("derivative not invertible modulo the factor")
    prod = _umul(_udivmod(num, f)[1], inv)
    return _udivmod(prod, f)[1]


# ---------------------------------------------------------------------------
# Text grammar: variables z1..zn / w1..wn (or t), rationals, i, + - * ^ ()
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, nvars: int, trunc):
        self.text = text
        self.pos = 0
        self.nvars = nvars
        self.trunc = trunc

    def error(self, message: str):
        raise ParseError(f"{message} at position {self.pos}: {self.text!r}", self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> PolySeries:
        value = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("unexpected trailing input")
        return value

    def parse_expr(self) -> PolySeries:
        sign = 1
        ch = self.peek()
        if ch in "+-":
            self.pos += 1
            sign = -1 if ch == "-" else 1
        value = self.parse_term() * sign
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                value = value + self.parse_term()
            elif ch == "-":
                self.pos += 1
                value = value - self.parse_term()
            else:
                return value

    def parse_term(self) -> PolySeries:
        value = self.parse_factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                value = value * self.parse_factor()
            else:
                return value

    def parse_factor(self) -> PolySeries:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return -self.parse_factor()
        base = self.parse_atom()
        while self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected a nonnegative integer exponent")
            base = base ** int(self.text[start:self.pos])
        return base

    def parse_atom(self) -> PolySeries:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.parse_expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return value
        if ch.isdigit():
            value = self.parse_number()
            # "3i" / "1/2i": a number directly followed by i is an imaginary
            # literal, matching the canonical scalar text form.
            if self.pos < len(self.text) and self.text[self.pos] == "i" and not self._lookahead_digit():
                self.pos += 1
                return PolySeries.const(self.nvars, GaussianRational(0, value), self.trunc)
            return PolySeries.const(self.nvars, value, self.trunc)
        if ch == "i" and not self._lookahead_digit():
            self.pos += 1
            return PolySeries.const(self.nvars, G_I, self.trunc)
        if ch in "zw":
            return self.parse_variable(ch)
        if ch == "t" and self.nvars == 1:
            self.pos += 1
            return PolySeries.variable(1, 0, self.trunc)
        self.error("expected a number, variable, 'i' or '('")

    def _lookahead_digit(self) -> bool:
        return self.pos + 1 < len(self.text) and self.text[self.pos + 1].isdigit()

    def parse_number(self) -> Fraction:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        numerator = int(self.text[start:self.pos])
        if self.pos < len(self.text) and self.text[self.pos] == "/":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected digits after '/'")
            denominator = int(self.text[start:self.pos])
            if denominator == 0:
                self.error("zero denominator in rational literal")
            return Fraction(numerator, denominator)
        return Fraction(numerator)

    def parse_variable(self, letter: str) -> PolySeries:
        self.pos += 1
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error(f"expected an index after '{letter}'")
        index = int(self.text[start:self.pos]) - 1
        if not 0 <= index < self.nvars:
            self.error(f"variable {letter}{index + 1} out of range (nvars={self.nvars})")
        return PolySeries.variable(self.nvars, index, self.trunc)


def parse_polynomial(text: str, nvars: int, trunc=None) -> PolySeries:
    """Parse the polynomial grammar exactly (no rounding anywhere)."""
    return _Parser(text, nvars, trunc).parse()


def parse_scalar(text: str) -> GaussianRational:
    """Parse a scalar such as "3/4", "-i", "1/2+3i"."""
    value = _Parser(text, 0, None).parse()
    return value.constant_term()


def format_polynomial(p: PolySeries, letter: str = "z") -> str:
    """Canonical text form: graded-lex ascending, explicit '*' and '^'."""
    if p.is_zero():
        return "0"
    parts = []
    for expo, coeff in p.sorted_terms():
        names = [
            f"{letter}{i + 1}" + (f"^{e}" if e > 1 else "")
            for i, e in enumerate(expo)
            if e
        ]
        body = "*".join(names)
        ctext = format_scalar(coeff)
        if not names:
            chunk = ctext
        elif coeff == G_ONE:
            chunk = body
        elif coeff == -G_ONE:
            chunk = "-" + body
        elif coeff.im != 0 and coeff.re != 0:
            chunk = f"({ctext})*{body}"
        elif coeff == G_I:
            chunk = f"i*{body}"
        elif coeff == -G_I:
            chunk = f"-i*{body}"
        else:
            chunk = f"{ctext}*{body}"
        parts.append(chunk)
    out = parts[0]
    for chunk in parts[1:]:
        if chunk.startswith("-"):
            out += " - " + chunk[1:]
        else:
            out += " + " + chunk
    return out
