"""Canonical section extraction, singular loci, action coefficients,
chart covariance, and singular directions.

For a codimension-one germ, the displacement splits as
f^j - z^j = z1^nu * g^j with uniquely determined coefficients g^j; the
restrictions g^j|_S assemble the canonical section.  g1 further splits as
b1 + z1*h1 where b1 is the z1-free part: b1 vanishes exactly when the germ
is tangential, and h1|_S is the multiplier driving every residue formula.

The three section kinds carried here:
  "X"  -- the full coefficient tuple (g1..gn)|_S;
  "H"  -- the surface part only (normal component projected away), valid on
          a splitting/comfortable atlas;
  "H1" -- the contact-order-one variant with the surface part scaled by
          (1 + b1), needed when the normal action is nontrivial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .algebra import (
    G_ONE,
    G_ZERO,
    GaussianRational,
    PolySeries,
    RatPoly,
    _ugcd,
    _umonic,
    _umul,
    _udivmod,
    _usquarefree,
    _ushift,
    _utrim,
    gaussian_rational_roots,
)
from .errors import (
    HypothesesUnmet,
    NotAdapted,
    NotCodimensionOne,
    NotTangentToIdentity,
    NuMismatch,
    SectionIdenticallyZero,
    TruncationTooLowToSolve,
)
from .germs import AdaptedChart, MapGerm, contact_profile, leading_homogeneous_parts

__all__ = [
    "SectionData",
    "SingularLocus",
    "RationalPoint",
    "OrbitBlock",
    "ActionCoefficients",
    "DirectionSet",
    "extract_section",
    "singular_points",
    "action_coefficients",
    "verify_chart_covariance",
    "singular_directions",
    "normalize_direction",
]


@dataclass(frozen=True)
class SectionData:
    """Local data of the canonical section in one adapted chart."""

    kind: str
    nu: int
    g: tuple            # ambient coefficients g^j, RatPoly
    g_on_S: tuple       # their restrictions to the cutting locus
    b1: RatPoly         # z1-free part of g1, restricted
    h1: RatPoly         # ambient correction: g1 = b1 + z1*h1
    chart: AdaptedChart
    germ: MapGerm
    trivial: bool       # all surface components vanish on S ("H == 0")
    tangential: bool

    @property
    def nvars(self) -> int:
        return self.chart.nvars

    def h1_on_S(self) -> RatPoly:
        return self.h1.restrict_unit([0])

    def surface_parts(self) -> tuple:
        """The components feeding the residue denominators (g^p|_S)."""
        return self.g_on_S[1:]

    def reconstruct_ok(self) -> bool:
        """Exact check that f^j - z^j = z1^nu * g^j for every component."""
        z1 = RatPoly(PolySeries.variable(self.nvars, 0))
        power = z1
        for _ in range(self.nu - 1):
            power = power * z1
        return all(
            self.germ.delta(j) == power * self.g[j] for j in range(self.nvars)
        )


def extract_section(germ: MapGerm, kind: str = "X") -> SectionData:
    """Divide out the contact-order power of z1 and restrict to the locus.

    kind "H"/"H1" presumes the caller's chart belongs to a splitting
    (comfortable) atlas; "H1" additionally requires contact order one.
    """
    if kind not in ("X", "H", "H1"):
        raise ValueError(f"unknown section kind {kind!r}")
    if germ.codim != 1:
        raise NotCodimensionOne("sections are extracted in codimension one")
    profile = contact_profile(germ)
    nu = profile.nu_f
    if kind == "H1" and nu != 1:
        raise NuMismatch(f"kind H1 needs contact order 1, found {nu}")
    g = tuple(germ.delta(j).divide_by_monomial_power(0, nu) for j in range(germ.nvars))
    g_on_s = tuple(x.restrict_unit([0]) for x in g)
    b1 = g_on_s[0]
    h1 = (g[0] - b1).divide_by_monomial_power(0, 1)
    trivial = all(x.is_zero() for x in g_on_s[1:])
    return SectionData(
        kind=kind,
        nu=nu,
        g=g,
        g_on_S=g_on_s,
        b1=b1,
        h1=h1,
        chart=germ.chart,
        germ=germ,
        trivial=trivial,
        tangential=profile.tangential,
    )


# ---------------------------------------------------------------------------
# Singular points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalPoint:
    """A singular point with exact Gaussian-rational surface coordinates."""

    coords: tuple
    multiplicity: int

    def sort_key(self):
        return tuple(c.sort_key() for c in self.coords)


@dataclass(frozen=True)
class OrbitBlock:
    """Unresolved algebraic points: all roots of one squarefree polynomial.

    The block's minimal-polynomial may bundle several conjugacy classes (no
    factoring over number fields happens here); residue machinery reports
    exact sums over the whole block.
    """

    variable: int
    minpoly: tuple
    multiplicity: int

    @property
    def count(self) -> int:
        return len(self.minpoly) - 1

    def sort_key(self):
        return tuple(c.sort_key() for c in self.minpoly)


@dataclass
class SingularLocus:
    """Zero locus of a section's defining system on the cutting locus."""

    defining: tuple
    points: list
    blocks: list
    complete: bool
    rational_split_certified: bool = True
    positive_dimensional: bool = False


def _surface_numerator(value: RatPoly, var: int):
    """Reduced univariate numerator/denominator of a restricted coefficient."""
    num = value.num.univariate_coeffs(var)
    den = value.den.univariate_coeffs(var)
    g = _ugcd(num, den)
    if len(g) > 1:
        num, _ = _udivmod(num, g)
        den, _ = _udivmod(den, g)
    return num, den


def _defining_system(section: SectionData):
    if section.kind == "X":
        return section.g_on_S
    return section.surface_parts()


def singular_points(section: SectionData, candidates: Optional[Sequence] = None) -> SingularLocus:
    """Common zeros of the defining system on the cutting locus.

    n = 2: complete enumeration (roots of the univariate gcd); Gaussian
    rational roots are split off exactly and whatever remains is returned as
    orbit blocks.  n >= 3: complete only for separated systems (each
    component constrains its own variable); otherwise the caller must supply
    candidate points, which are verified, not discovered.
    """
    defining = _defining_system(section)
    if section.germ.trunc() is not None:
        raise TruncationTooLowToSolve(
            "root solving needs exact data; the germ carries a finite cutoff"
        )
    nonzero = [d for d in defining if not d.is_zero()]
    if not nonzero:
        raise SectionIdenticallyZero("defining system vanishes identically")
    n = section.nvars
    if n == 2:
        return _solve_curve(defining, nonzero)
    if candidates is not None:
        points = []
        for cand in candidates:
            coords = tuple(GaussianRational.coerce(c) for c in cand)
            assignments = {1 + i: coords[i] for i in range(n - 1)}
            if all(
                d.num.eval_partial(assignments).is_zero()
                and not d.den.eval_partial(assignments).is_zero()
                for d in defining
            ):
                points.append(RationalPoint(coords, 1))
        points.sort(key=RationalPoint.sort_key)
        return SingularLocus(tuple(defining), points, [], complete=False)
    return _solve_separated(defining, nonzero, n)


def _solve_curve(defining, nonzero) -> SingularLocus:
    acc = None
    certified = True
    for d in nonzero:
        num, _den = _surface_numerator(d, 1)
        acc = num if acc is None else _ugcd(acc, num)
        if len(acc) == 1:
            return SingularLocus(tuple(defining), [], [], complete=True)
    points = []
    blocks = []
    for factor, mult in _usquarefree(acc):
        roots, ok = gaussian_rational_roots(factor)
        certified = certified and ok
        residual = factor
        for root in roots:
            points.append(RationalPoint((root,), mult))
            residual, rem = _udivmod(residual, _ushift([G_ZERO, G_ONE], -root))
            assert not _utrim(rem)
        if len(residual) > 1:
            blocks.append(OrbitBlock(1, tuple(_umonic(residual)), mult))
    points.sort(key=RationalPoint.sort_key)
    blocks.sort(key=OrbitBlock.sort_key)
    return SingularLocus(
        tuple(defining), points, blocks, complete=True,
        rational_split_certified=certified,
    )


def _solve_separated(defining, nonzero, n) -> SingularLocus:
    surface_vars = tuple(range(1, n))
    owner = {}
    for d in nonzero:
        used = set(d.num.used_variables()) | set(d.den.used_variables())
        used.discard(0)
        if len(used) != 1:
            return SingularLocus(tuple(defining), [], [], complete=False)
        var = used.pop()
        if var in owner:
            owner[var] = _ugcd(owner[var], _surface_numerator(d, var)[0])
        else:
            owner[var] = _surface_numerator(d, var)[0]
    if set(owner) != set(surface_vars):
        # some surface variable unconstrained: the locus is positive-dimensional
        return SingularLocus(
            tuple(defining), [], [], complete=False, positive_dimensional=True
        )
    per_var = []
    certified = True
    for var in surface_vars:
        entries = []
        for factor, mult in _usquarefree(owner[var]):
            roots, ok = gaussian_rational_roots(factor)
            certified = certified and ok
            residual = factor
            for root in roots:
                entries.append((root, mult))
                residual, _ = _udivmod(residual, _ushift([G_ZERO, G_ONE], -root))
            if len(residual) > 1:
                # unresolved factor in a product system: bail out of the
                # complete claim rather than enumerate algebraic tuples
                return SingularLocus(tuple(defining), [], [], complete=False)
        per_var.append(entries)
    points = [((), 1)]
    for entries in per_var:
        points = [
            (coords + (root,), m * mult)
            for coords, m in points
            for root, mult in entries
        ]
    out = [RationalPoint(coords, m) for coords, m in points]
    out.sort(key=RationalPoint.sort_key)
    return SingularLocus(
        tuple(defining), out, [], complete=True,
        rational_split_certified=certified,
    )


# ---------------------------------------------------------------------------
# Action coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionCoefficients:
    """Multiplier of the normal action and the full endomorphism matrix.

    m_f is minus the restricted correction h1|_S; the matrix v has
    v[0][0] = m_f, v[p][0] = 0 for p >= 1, and v[j][p] = -d g^p / d z^j |_S,
    indexed v[row j][column k] for the action on the frame field d/dz^k.
    """

    m_f: RatPoly
    v: tuple


def action_coefficients(section: SectionData) -> ActionCoefficients:
    n = section.nvars
    m_f = -section.h1_on_S()
    rows = []
    for j in range(n):
        row = []
        for k in range(n):
            if k == 0:
                row.append(m_f if j == 0 else RatPoly(PolySeries.zero(n)))
            else:
                row.append(-section.g[k].derive(j).restrict_unit([0]))
        rows.append(tuple(row))
    return ActionCoefficients(m_f=m_f, v=tuple(rows))


# ---------------------------------------------------------------------------
# Chart covariance
# ---------------------------------------------------------------------------

def verify_chart_covariance(germ: MapGerm, transition) -> bool:
    """Exact transformation law of the section coefficients.

    With a = (new z1)/(old z1), the coefficients computed in the new chart
    (pulled back through the transition) must satisfy
      a^nu * g_new^j = sum_h (d new_j / d z^h) * g^h   modulo z1^nu.
    """
    if germ.codim != 1:
        raise NotCodimensionOne("covariance is a codimension-one statement")
    n = germ.nvars
    ts = []
    for t in transition:
        ts.append(t if isinstance(t, RatPoly) else RatPoly(t))
    if len(ts) != n:
        raise NotAdapted("transition needs one component per variable")
    if not ts[0].num.restrict([0]).is_zero():
        raise NotAdapted("transition does not preserve the cutting locus")
    section = extract_section(germ, "X")
    nu = section.nu
    a = ts[0].divide_by_monomial_power(0, 1)
    if a.num.constant_term().is_zero():
        raise NotAdapted("transition degenerates along the normal direction")
    a_nu = a
    for _ in range(nu - 1):
        a_nu = a_nu * a
    for j in range(n):
        hat_fj = ts[j].compose_rational(germ.components)
        lhs_scaled = hat_fj - ts[j]
        # (T1)^nu * g_hat^j = T_j o f - T_j ; divide by z1^nu and once more by a^nu
        g_hat_j = lhs_scaled.divide_by_monomial_power(0, nu) / a_nu
        lhs = a_nu * g_hat_j
        rhs = RatPoly(PolySeries.zero(n))
        for h in range(n):
            rhs = rhs + ts[j].derive(h) * section.g[h]
        diff = lhs - rhs
        if diff.is_zero():
            continue
        if diff.num.order_in(0) < nu:
            return False
    return True


# ---------------------------------------------------------------------------
# Singular directions
# ---------------------------------------------------------------------------

def normalize_direction(coords) -> tuple:
    """Scale so the leftmost nonzero coordinate is 1."""
    values = [GaussianRational.coerce(c) for c in coords]
    for v in values:
        if not v.is_zero():
            inv = G_ONE / v
            return tuple(x * inv for x in values)
    raise ValueError("zero vector is not a direction")


@dataclass
class DirectionSet:
    directions: list
    blocks: list
    all_directions: bool = False
    complete: bool = True

    def sorted_directions(self):
        return sorted(self.directions, key=lambda d: tuple(c.sort_key() for c in d))


def _normal_degree_parts(value: RatPoly, m: int, upto: int):
    """Graded parts of value in the cutting variables, exactly.

    Writes value = sum_d Q_d with Q_d of exact cutting-degree d; each Q_d is
    a RatPoly whose denominator only involves the surface variables.  Valid
    when the denominator's cutting-free part is nonzero (unit along S).
    """
    cutting = tuple(range(m))

    def graded(p: PolySeries):
        parts = {}
        for expo, coeff in p.terms.items():
            d = sum(expo[i] for i in cutting)
            parts.setdefault(d, {})[expo] = coeff
        return {
            d: PolySeries(p.nvars, terms, p.trunc) for d, terms in parts.items()
        }

    n_parts = graded(value.num)
    d_parts = graded(value.den)
    d0 = d_parts.get(0)
    if d0 is None or d0.is_zero():
        raise ZeroDivisionError("denominator vanishes along the cutting locus")
    out = []
    for d in range(upto + 1):
        acc = n_parts.get(d, PolySeries.zero(value.nvars))
        term = RatPoly(acc, PolySeries.const(value.nvars, 1))
        for k in range(d):
            dk = d_parts.get(d - k)
            if dk is not None and k < len(out):
                term = term - out[k] * RatPoly(dk, PolySeries.const(value.nvars, 1))
        out.append(term / RatPoly(d0))
    return out


def _coefficient_polynomials(parts_at_degree: RatPoly, m: int, point, nvars: int):
    """Evaluate the surface variables at a point; return the pure cutting
    polynomial in m fresh direction variables."""
    assignments = {m + i: GaussianRational.coerce(point[i]) for i in range(nvars - m)}
    num = parts_at_degree.num.eval_partial(assignments)
    den_value = parts_at_degree.den.eval_partial(assignments).constant_term()
    if den_value.is_zero():
        raise ZeroDivisionError("coefficient denominator vanishes at the point")
    out = {}
    for expo, coeff in num.terms.items():
        key = expo[:m]
        if any(expo[m:]):
            raise AssertionError("surface variable survived evaluation")
        out[key] = coeff / den_value
    return PolySeries(m, out)


def _wedge_conditions(vector_polys, m: int):
    """Polynomials expressing P(v) ^ v = 0 for a tuple of m polynomials."""
    conditions = []
    for r in range(m):
        vr = PolySeries.variable(m, r)
        for s in range(r + 1, m):
            vs = PolySeries.variable(m, s)
            conditions.append(vs * vector_polys[r] - vr * vector_polys[s])
    return conditions


def _enumerate_projective(conditions, m: int) -> DirectionSet:
    """Common projective zeros of homogeneous conditions in m variables.

    Charts are walked in leftmost-normalized form (v_r = 1, earlier entries
    zero) so every point is produced exactly once.  Complete for m = 2
    (univariate per chart); for larger m only separated chart systems
    enumerate completely.
    """
    nonzero = [c for c in conditions if not c.is_zero()]
    if not nonzero:
        return DirectionSet([], [], all_directions=True)
    found = {}
    blocks = []
    complete = True
    for r in range(m):
        assignments = {j: G_ZERO for j in range(r)}
        assignments[r] = G_ONE
        reduced = [c.eval_partial(assignments) for c in nonzero]
        free = tuple(range(r + 1, m))
        if not free:
            if all(rc.is_zero() for rc in reduced):
                found[(G_ZERO,) * r + (G_ONE,)] = 1
            continue
        if all(rc.is_zero() for rc in reduced):
            # the whole chart slice is singular: not a list of isolated points
            complete = False
            continue
        if len(free) == 1:
            var = free[0]
            acc = None
            for rc in reduced:
                if rc.is_zero():
                    continue
                acc_new = rc.univariate_coeffs(var)
                acc = acc_new if acc is None else _ugcd(acc, acc_new)
            if len(acc) <= 1:
                continue
            residual = _squarefree_part(acc)
            roots, ok = gaussian_rational_roots(residual)
            complete = complete and ok
            for root in roots:
                coords = [G_ZERO] * m
                coords[r] = G_ONE
                coords[var] = root
                found[tuple(coords)] = 1
                residual, _ = _udivmod(residual, _ushift([G_ZERO, G_ONE], -root))
            if len(residual) > 1:
                blocks.append(OrbitBlock(var, tuple(_umonic(residual)), 1))
        else:
            sub = _product_candidates(reduced, free)
            if sub is None:
                complete = False
            else:
                combos, ok = sub
                complete = complete and ok
                for combo in combos:
                    assignment = dict(zip(free, combo))
                    if all(
                        rc.eval_partial(assignment).is_zero() for rc in reduced
                    ):
                        coords = [G_ZERO] * m
                        coords[r] = G_ONE
                        for var, val in assignment.items():
                            coords[var] = val
                        found[tuple(coords)] = 1
    directions = sorted(found, key=lambda d: tuple(c.sort_key() for c in d))
    return DirectionSet(list(directions), blocks, complete=complete)


def _product_candidates(reduced, free):
    """Finite candidate grid from the univariate members of a system.

    Each free variable must be pinned by at least one univariate condition;
    the returned combinations are then verified against the full system by
    the caller, so completeness only needs the pinning polynomials to split
    into Gaussian-rational roots.  Returns None when the system cannot be
    boxed this way (the caller reports the locus as not enumerated).
    """
    owner = {}
    for rc in reduced:
        if rc.is_zero():
            continue
        used = rc.used_variables()
        if not used:
            # nonzero constant: the system has no solutions in this chart
            return [], True
        if len(used) != 1:
            continue
        var = used[0]
        if var not in free:
            return None
        coeffs = rc.univariate_coeffs(var)
        owner[var] = coeffs if var not in owner else _ugcd(owner[var], coeffs)
    if set(owner) != set(free):
        return None
    per_var = {}
    certified = True
    for var, coeffs in owner.items():
        part = _squarefree_part(coeffs)
        roots, ok = gaussian_rational_roots(part)
        certified = certified and ok and len(roots) == len(part) - 1
        per_var[var] = roots
    combos = [()]
    for var in free:
        combos = [c + (root,) for c in combos for root in per_var[var]]
    return combos, certified


def _squarefree_part(coeffs):
    out = [G_ONE]
    for factor, _ in _usquarefree(coeffs):
        out = _umul(out, factor)
    return _umonic(out)


def singular_directions(germ: MapGerm, mode: str = "auto", point=None) -> DirectionSet:
    """Directions killed by the canonical data and fixed by the next order.

    Point germs (codim == nvars, tangent to the identity) give the classical
    characteristic directions.  Positive-dimensional centers need a surface
    point (default: the chart origin); tangential germs use the next-order
    tensor, non-tangential ones the leading one.
    """
    n = germ.nvars
    m = germ.codim
    if m == n:
        order, parts = leading_homogeneous_parts(germ)
        conditions = _wedge_conditions(parts, n)
        return _enumerate_projective(conditions, n)
    if m < 2:
        raise HypothesesUnmet("singular directions need codimension at least 2")
    profile = contact_profile(germ)
    nu = profile.nu_f
    if mode == "auto":
        mode = "tangential" if profile.tangential else "non_tangential"
    if mode == "tangential" and not profile.tangential:
        raise HypothesesUnmet("germ is not tangential")
    if point is None:
        point = (G_ZERO,) * (n - m)
    if mode == "non_tangential":
        level = [
            _coefficient_polynomials(
                _normal_degree_parts(germ.delta(r), m, nu)[nu], m, point, n
            )
            for r in range(m)
        ]
        conditions = _wedge_conditions(level, m)
        return _enumerate_projective(conditions, m)
    # tangential: leading surface conditions plus the next-order wedge
    x_conditions = [
        _coefficient_polynomials(
            _normal_degree_parts(germ.delta(p), m, nu)[nu], m, point, n
        )
        for p in range(m, n)
    ]
    y_polys = [
        _coefficient_polynomials(
            _normal_degree_parts(germ.delta(r), m, nu + 1)[nu + 1], m, point, n
        )
        for r in range(m)
    ]
    conditions = x_conditions + _wedge_conditions(y_polys, m)
    return _enumerate_projective(conditions, m)
