"""Point residues of the canonical section data.

Sign conventions are fixed once: on a curve, the residue at a point is the
coefficient of 1/(z - p) in the Laurent expansion of h1|_S / g2|_S (times
1/(1+b1) for the contact-order-one non-tangential variant); at a
nondegenerate common zero in higher dimension it is the evaluation
h1|_S^(n-1) / det(Jacobian of the surface components).  These choices make
the exceptional-divisor sums land exactly on the expected Chern numbers,
and they agree with each other where both apply.

Non-rational points are never approximated: residues over the roots of an
unresolved factor are reported as one exact orbit sum (partial-fraction
split plus the residue at infinity), with a symbolic per-root value in
Q(i)[theta] attached for simple factors under the precision cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .algebra import (
    G_ONE,
    G_ZERO,
    GaussianRational,
    PolySeries,
    RatPoly,
    _udivmod,
    _ueval,
    _ugcd,
    _umul,
    _umonic,
    _ushift,
    _utrim,
    laurent_residue,
    matrix_determinant,
    ps_divide_exact,
    residue_at_infinity,
    residue_at_point,
    residue_block_sum,
    symbolic_residue_mod,
)
from .errors import (
    BranchNotOnCurve,
    ChartCoverIncomplete,
    DegenerateZero,
    HypothesesUnmet,
    InsufficientTruncation,
    NotCommonZero,
    NotDivisible,
    ZeroDenominatorIdentically,
)
from .germs import MapGerm
from .sections import OrbitBlock, SectionData, action_coefficients

__all__ = [
    "ResidueValue",
    "BranchParametrization",
    "ExactSum",
    "residue_cs_n2_smooth",
    "residue_cs_grothendieck",
    "residue_cs_singular_point_nd",
    "residue_cs_singular_curve",
    "residue_ls_phi",
    "residue_sum_check",
    "curve_integrand",
    "orbit_residue",
]

DEFAULT_PRECISION_CAP = 8


@dataclass(frozen=True)
class ResidueValue:
    """One computed residue: exact value, location, and the formula used.

    For orbit-aggregated entries, value is the exact SUM over the block's
    points, count the number of points, and symbolic (when available) the
    per-point value written in a root theta of the block polynomial.
    """

    value: GaussianRational
    point: Union[tuple, OrbitBlock]
    formula: str
    orbit_aggregated: bool = False
    count: int = 1
    symbolic: Optional[tuple] = None


@dataclass(frozen=True)
class BranchParametrization:
    """One local irreducible branch t -> (w1(t), ..., wn(t)).

    Components are univariate with zero constant term (the branch passes
    through the chart origin); primitive means the exponents of the nonzero
    terms have gcd one, so the parametrization is not a power substitution.
    """

    components: tuple
    multiplicity: int = 1

    def __post_init__(self):
        g = 0
        for comp in self.components:
            if comp.nvars != 1:
                raise ValueError("branch components must be univariate")
            if not comp.constant_term().is_zero():
                raise ValueError("branch must pass through the chart origin")
            for expo in comp.terms:
                g = math.gcd(g, expo[0])
        if g not in (0, 1):
            raise ValueError(f"parametrization is a power substitution (gcd {g})")


def _univariate_pair(value: RatPoly, var: int):
    """(num, den) dense lists of a restricted coefficient, gcd-reduced."""
    num = value.num.univariate_coeffs(var)
    den = value.den.univariate_coeffs(var)
    g = _ugcd(num, den)
    if len(g) > 1:
        num, _ = _udivmod(num, g)
        den, _ = _udivmod(den, g)
    return num, den


def curve_integrand(section: SectionData):
    """Univariate (num, den) of the residue integrand on a curve.

    h1|_S / g2|_S for the full and surface kinds; an extra (1 + b1) in the
    denominator for the contact-order-one variant.
    """
    if section.nvars != 2:
        raise HypothesesUnmet("curve integrand needs a two-variable chart")
    g2 = section.g_on_S[1]
    if g2.is_zero():
        raise ZeroDenominatorIdentically("surface coefficient vanishes identically")
    h1_num, h1_den = _univariate_pair(section.h1_on_S(), 1)
    g2_num, g2_den = _univariate_pair(g2, 1)
    num = _umul(h1_num, g2_den)
    den = _umul(h1_den, g2_num)
    if section.kind == "H1":
        one_b1 = RatPoly(PolySeries.const(2, 1)) + section.b1
        b_num, b_den = _univariate_pair(one_b1, 1)
        num = _umul(num, b_den)
        den = _umul(den, b_num)
    g = _ugcd(num, den)
    if len(g) > 1:
        num, _ = _udivmod(num, g)
        den, _ = _udivmod(den, g)
    return num, den


def residue_cs_n2_smooth(section: SectionData, point) -> ResidueValue:
    """Curve residue at a rational point of the cutting locus."""
    p = GaussianRational.coerce(point)
    if section.germ.trunc() is not None and not p.is_zero():
        raise InsufficientTruncation(
            "off-center residue on truncated data cannot be certified"
        )
    num, den = curve_integrand(section)
    if section.kind == "H1":
        one_b1 = RatPoly(PolySeries.const(2, 1)) + section.b1
        b_num, b_den = _univariate_pair(one_b1, 1)
        if _ueval(b_num, p).is_zero():
            raise HypothesesUnmet("1 + b1 vanishes at the point")
    value = residue_at_point(num, den, p)
    return ResidueValue(value, (p,), "cs_smooth")


def residue_cs_grothendieck(section: SectionData, point) -> ResidueValue:
    """Nondegenerate point residue on a smooth higher-dimensional locus:
    h1|_S^(n-1) divided by the Jacobian of the surface components."""
    n = section.nvars
    coords = tuple(GaussianRational.coerce(c) for c in point)
    if len(coords) != n - 1:
        raise ValueError("point must list the surface coordinates")
    full = (G_ZERO,) + coords
    surface = section.surface_parts()
    for g in surface:
        if not g.evaluate(full).is_zero():
            raise NotCommonZero("point is not a common zero of the surface components")
    jac = [
        [g.derive(1 + q).evaluate(full) for q in range(n - 1)]
        for g in surface
    ]
    j = matrix_determinant(jac)
    if j.is_zero():
        raise DegenerateZero("vanishing Jacobian at the common zero", jacobian=j)
    h1 = section.h1_on_S().evaluate(full)
    value = h1 ** (n - 1) / j
    if section.kind == "H1":
        b = (RatPoly(PolySeries.const(n, 1)) + section.b1).evaluate(full)
        if b.is_zero():
            raise HypothesesUnmet("1 + b1 vanishes at the point")
        value = value / b ** (n - 1)
    return ResidueValue(value, coords, "cs_grothendieck")


def _ell_displacement_data(components, ell: PolySeries):
    """Common preprocessing for the singular-locus formulas.

    Returns (deltas, A, nu, beta) where deltas are the coordinate
    displacements, A = ell o f - ell, nu the contact order measured against
    powers of ell, and beta = A / ell^nu (exact).
    """
    n = ell.nvars
    comps = [c if isinstance(c, RatPoly) else RatPoly(c) for c in components]
    if len(comps) != n:
        raise ValueError("need one component per variable")
    deltas = [comps[j] - RatPoly(PolySeries.variable(n, j)) for j in range(n)]
    A = RatPoly(ell).compose_rational(comps) - RatPoly(ell)

    def ell_order(value: RatPoly):
        if value.is_zero():
            return math.inf
        order = 0
        num = value.num
        while True:
            try:
                num = ps_divide_exact(num, ell)
                order += 1
            except NotDivisible:
                return order

    orders = [ell_order(d) for d in deltas]
    finite = [o for o in orders if o is not math.inf]
    if not finite:
        raise HypothesesUnmet("the map is the identity along the curve data")
    nu = min(finite)
    if nu == 0:
        raise BranchNotOnCurve("a coordinate displacement does not vanish on the curve")
    beta_num = A.num
    for _ in range(nu):
        beta_num = ps_divide_exact(beta_num, ell)
    beta = RatPoly(beta_num, A.den)
    return deltas, A, nu, beta


def _w2_only_representative(beta: RatPoly, ell: PolySeries) -> RatPoly:
    """The surface-variable-only polynomial agreeing with beta modulo ell."""
    n = ell.nvars
    try:
        ps_divide_exact(beta.num, ell)
        return RatPoly(PolySeries.zero(n))
    except NotDivisible as exc:
        rn = exc.remainder
    try:
        ps_divide_exact(beta.den - beta.den.constant_term(), ell)
        rd = PolySeries.const(n, beta.den.constant_term())
    except NotDivisible:
        raise HypothesesUnmet("normal part has no surface-only representative")
    candidate = rn * (G_ONE / rd.constant_term())
    if candidate.depends_on(0):
        raise HypothesesUnmet("normal part has no surface-only representative")
    return RatPoly(candidate)


def residue_cs_singular_curve(
    components,
    ell: PolySeries,
    branch: BranchParametrization,
    formula: str = "auto",
) -> ResidueValue:
    """Per-branch residue at a (possibly singular) curve point, n = 2.

    The printed integrands are indeterminate after restriction (numerator
    and denominator both vanish on the curve), so the shared powers of ell
    are cancelled exactly in the ring first:

      full/surface variant:  h / gamma,
      order-one variant:     h / ((1 + beta) gamma),

    with beta = (ell o f - ell)/ell^nu, b1 the surface-only representative
    of beta mod ell, h = (beta - b1)/ell and gamma = (w2 o f - w2)/ell^nu.
    The result is the t-residue of the branch pullback against d(w2)/dt.
    """
    if ell.nvars != 2:
        raise HypothesesUnmet("singular-curve residues are for two variables")
    deltas, A, nu, beta = _ell_displacement_data(components, ell)
    b1 = _w2_only_representative(beta, ell)
    diff = beta - b1
    if diff.is_zero():
        h = RatPoly(PolySeries.zero(2))
    else:
        h = RatPoly(ps_divide_exact(diff.num, ell), diff.den)
    if deltas[1].is_zero():
        raise ZeroDenominatorIdentically("w2 o f - w2 vanishes identically")
    gamma_num = deltas[1].num
    for _ in range(nu):
        gamma_num = ps_divide_exact(gamma_num, ell)
    gamma = RatPoly(gamma_num, deltas[1].den)
    if formula == "auto":
        formula = "order_one" if (nu == 1 and not b1.is_zero()) else "standard"
    if formula in ("standard", "6.12", "cs"):
        ratio_num, ratio_den = h, gamma
        tag = "cs_singular_curve"
    elif formula in ("order_one", "6.13", "h1"):
        if nu != 1:
            raise HypothesesUnmet("order-one variant needs contact order one")
        one_beta = RatPoly(PolySeries.const(2, 1)) + beta
        ratio_num, ratio_den = h, one_beta * gamma
        tag = "cs_singular_curve_order_one"
    else:
        raise ValueError(f"unknown formula {formula!r}")
    # pull back along the branch
    args = list(branch.components)
    ell_pull = ell.compose(args)
    if not ell_pull.is_zero():
        raise BranchNotOnCurve("parametrization does not satisfy the curve equation")
    num_pull = ratio_num.num.compose(args) * ratio_den.den.compose(args)
    den_pull = ratio_num.den.compose(args) * ratio_den.num.compose(args)
    w2_speed = branch.components[1].derive(0)
    value = laurent_residue(num_pull * w2_speed, den_pull)
    if branch.multiplicity != 1:
        value = value * branch.multiplicity
    return ResidueValue(value, ("branch",), tag)


def residue_cs_singular_point_nd(components, ell: PolySeries, point) -> ResidueValue:
    """Residue at a singular curve point in n > 2 variables (tangential,
    contact order above one): the shared ell powers cancel to
    h^(n-1) / det J with h = (sum_j dell/dw_j * gamma_j)/ell and J the
    Jacobian of (ell, gamma_2, ..., gamma_n), whose nonvanishing is exactly
    the regular-sequence requirement."""
    n = ell.nvars
    if n < 3:
        raise HypothesesUnmet("use the curve formulas for two variables")
    deltas, A, nu, beta = _ell_displacement_data(components, ell)
    gammas = []
    for j in range(n):
        if deltas[j].is_zero():
            gammas.append(RatPoly(PolySeries.zero(n)))
            continue
        num = deltas[j].num
        for _ in range(nu):
            num = ps_divide_exact(num, ell)
        gammas.append(RatPoly(num, deltas[j].den))
    pairing = RatPoly(PolySeries.zero(n))
    for j in range(n):
        pairing = pairing + RatPoly(ell.derive(j)) * gammas[j]
    if pairing.is_zero():
        h = RatPoly(PolySeries.zero(n))
    else:
        h = RatPoly(ps_divide_exact(pairing.num, ell), pairing.den)
    coords = tuple(GaussianRational.coerce(c) for c in point)
    if not ell.evaluate(coords).is_zero():
        raise NotCommonZero("point does not lie on the curve")
    for g in gammas[1:]:
        if not g.evaluate(coords).is_zero():
            raise NotCommonZero("point is not a common zero of the reduced system")
    rows = [[RatPoly(ell.derive(k)).evaluate(coords) for k in range(n)]]
    for g in gammas[1:]:
        rows.append([g.derive(k).evaluate(coords) for k in range(n)])
    j = matrix_determinant(rows)
    if j.is_zero():
        raise DegenerateZero("the system is not a regular sequence at the point", jacobian=j)
    value = h.evaluate(coords) ** (n - 1) / j
    return ResidueValue(value, coords, "cs_singular_nd")


def _elementary_symmetric(matrix_values):
    """e_1..e_n of a square scalar matrix via sums of principal minors."""
    n = len(matrix_values)
    out = []
    for k in range(1, n + 1):
        total = G_ZERO
        for subset in _combinations(range(n), k):
            minor = [[matrix_values[i][j] for j in subset] for i in subset]
            total = total + matrix_determinant(minor)
        out.append(total)
    return out


def _combinations(pool, k):
    pool = list(pool)
    n = len(pool)
    if k > n:
        return
    idx = list(range(k))
    while True:
        yield tuple(pool[i] for i in idx)
        for i in reversed(range(k)):
            if idx[i] != i + n - k:
                break
        else:
            return
        idx[i] += 1
        for j in range(i + 1, k):
            idx[j] = idx[j - 1] + 1


def residue_ls_phi(section: SectionData, point, phi, variant: str = "ls") -> ResidueValue:
    """Symmetric-function residue of the action matrix at a point.

    phi is a tuple of exponents (k_1, ..., k_{n-1}) selecting
    prod_j c_j(V)^(k_j); homogeneity sum(j*k_j) = n-1 is enforced.  Each
    c_j carries its (i/2pi)^j normalization and the contour contributes
    (2pi*i)^(n-1), so the exact value is
    (-1)^(n-1) * phi(e_1, ..., e_{n-1})(p) / J(p) at a nondegenerate zero
    (univariate Laurent extraction on curves).  variant "bb" replaces the
    action matrix by its surface block.
    """
    n = section.nvars
    phi = tuple(int(k) for k in phi)
    if len(phi) != n - 1 or any(k < 0 for k in phi):
        raise ValueError("phi must list n-1 nonnegative exponents")
    if sum((j + 1) * k for j, k in enumerate(phi)) != n - 1:
        raise HypothesesUnmet("phi must be homogeneous of degree n-1")
    if not section.tangential and variant == "ls":
        raise HypothesesUnmet("action-matrix residues need a tangential germ")
    ac = action_coefficients(section)
    if variant == "ls":
        matrix = ac.v
        tag = "ls_phi"
    elif variant == "bb":
        matrix = tuple(row[1:] for row in ac.v[1:])
        tag = "bb_phi"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    sign = G_ONE if (n - 1) % 2 == 0 else -G_ONE
    if n == 2:
        p = GaussianRational.coerce(point)
        # phi == (1,): integrand e_1(V)/g2 on the curve
        e1 = matrix[0][0]
        for i in range(1, len(matrix)):
            e1 = e1 + matrix[i][i]
        e1_num, e1_den = _univariate_pair(e1, 1)
        g2_num, g2_den = _univariate_pair(section.g_on_S[1], 1)
        num = _umul(e1_num, g2_den)
        den = _umul(e1_den, g2_num)
        value = sign * residue_at_point(num, den, p)
        return ResidueValue(value, (p,), tag)
    coords = tuple(GaussianRational.coerce(c) for c in point)
    full = (G_ZERO,) + coords
    surface = section.surface_parts()
    for g in surface:
        if not g.evaluate(full).is_zero():
            raise NotCommonZero("point is not a common zero of the surface components")
    jac = [[g.derive(1 + q).evaluate(full) for q in range(n - 1)] for g in surface]
    j = matrix_determinant(jac)
    if j.is_zero():
        raise DegenerateZero("vanishing Jacobian at the common zero", jacobian=j)
    values = [[entry.evaluate(full) for entry in row] for row in matrix]
    es = _elementary_symmetric(values)
    phi_value = G_ONE
    for jj, k in enumerate(phi):
        if k:
            phi_value = phi_value * es[jj] ** k
    value = sign * phi_value / j
    return ResidueValue(value, coords, tag)


def orbit_residue(num, den, block: OrbitBlock, precision_cap: int = DEFAULT_PRECISION_CAP) -> ResidueValue:
    """Exact residue sum of num/den over the roots of one orbit block."""
    total = residue_block_sum(num, den, list(block.minpoly))
    symbolic = None
    if block.count <= precision_cap:
        try:
            symbolic = tuple(symbolic_residue_mod(num, den, list(block.minpoly)))
        except ValueError:
            symbolic = None
    return ResidueValue(
        total, block, "cs_smooth", orbit_aggregated=True,
        count=block.count, symbolic=symbolic,
    )


@dataclass(frozen=True)
class ExactSum:
    finite_total: GaussianRational
    at_infinity: GaussianRational
    matches: bool


def residue_sum_check(values: Sequence[ResidueValue], integrand) -> ExactSum:
    """Global cross-check on one chart: the listed finite residues plus the
    residue at infinity of the chart integrand must cancel exactly."""
    if integrand is None:
        raise ChartCoverIncomplete("no chart integrand supplied")
    num, den = integrand
    num = _utrim([GaussianRational.coerce(c) for c in num])
    den = _utrim([GaussianRational.coerce(c) for c in den])
    if not den:
        raise ZeroDenominatorIdentically("chart integrand denominator is zero")
    total = G_ZERO
    for v in values:
        total = total + v.value
    inf = residue_at_infinity(num, den)
    return ExactSum(total, inf, (total + inf).is_zero())
