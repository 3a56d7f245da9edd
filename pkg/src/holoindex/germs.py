"""Germ classification: vanishing orders, contact order, tangentiality,
normal-action multiplier, dicriticality, and the chart-pair flatness checks.

A germ is a self-map fixing the cutting locus S = {z1 = ... = zm = 0} of an
adapted chart pointwise.  Components are stored as RatPoly (polynomial over a
unit denominator); for polynomial input the denominators are 1 and every
quantity below is computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .algebra import (
    G_ONE,
    G_ZERO,
    GaussianRational,
    PolySeries,
    RatPoly,
    matrix_determinant,
)
from .errors import (
    IdentityMap,
    NotAdapted,
    NotSplitting,
    NotTangentToIdentity,
)

__all__ = [
    "AdaptedChart",
    "MapGerm",
    "ContactProfile",
    "DicriticalResult",
    "vanishing_order",
    "contact_profile",
    "dicritical_test",
    "check_splitting_pair",
    "check_comfortable_pair",
]


@dataclass(frozen=True)
class AdaptedChart:
    """Local coordinates in which the fixed set is {z1 = ... = zm = 0}.

    codim == nvars is allowed and means the fixed set is the origin (the
    point-germ case used by the dicriticality test and point blow-ups).
    """

    nvars: int
    codim: int
    label: str = "chart"

    def __post_init__(self):
        if not 1 <= self.codim <= self.nvars:
            raise ValueError(f"codim {self.codim} out of range for nvars {self.nvars}")

    @property
    def cutting_vars(self) -> tuple:
        return tuple(range(self.codim))

    @property
    def surface_vars(self) -> tuple:
        return tuple(range(self.codim, self.nvars))


def _as_ratpoly(value, nvars: int) -> RatPoly:
    if isinstance(value, RatPoly):
        if value.nvars != nvars:
            raise ValueError("component has the wrong variable count")
        return value
    if isinstance(value, PolySeries):
        if value.nvars != nvars:
            raise ValueError("component has the wrong variable count")
        return RatPoly(value)
    raise TypeError(f"cannot use {type(value).__name__} as a germ component")


class MapGerm:
    """Self-map germ fixing the chart's cutting locus pointwise.

    Construction verifies the two structural invariants: each f^j - z^j
    restricts to zero on the cutting locus, and the map is not the identity
    to the carried depth.
    """

    __slots__ = ("chart", "components", "_deltas")

    def __init__(self, chart: AdaptedChart, components: Sequence):
        comps = tuple(_as_ratpoly(c, chart.nvars) for c in components)
        if len(comps) != chart.nvars:
            raise ValueError("need one component per variable")
        deltas = []
        for j, comp in enumerate(comps):
            delta = comp - RatPoly(PolySeries.variable(chart.nvars, j))
            restricted = delta.num.restrict(chart.cutting_vars)
            if not restricted.is_zero():
                raise NotAdapted(
                    f"component {j + 1} does not fix the cutting locus"
                )
            deltas.append(delta)
        if all(d.is_zero() for d in deltas):
            raise IdentityMap("the map is the identity to the carried depth")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "_deltas", tuple(deltas))

    def __setattr__(self, name, value):
        raise AttributeError("MapGerm is immutable")

    @staticmethod
    def from_polynomials(polys: Sequence[PolySeries], codim: int, label: str = "chart") -> "MapGerm":
        nvars = polys[0].nvars
        return MapGerm(AdaptedChart(nvars, codim, label), polys)

    @property
    def nvars(self) -> int:
        return self.chart.nvars

    @property
    def codim(self) -> int:
        return self.chart.codim

    def delta(self, j: int) -> RatPoly:
        """The displacement f^j - z^j."""
        return self._deltas[j]

    def is_exact(self) -> bool:
        return all(
            c.num.is_exact() and c.den.is_exact() for c in self.components
        )

    def trunc(self):
        """Tightest cutoff over the components (None = exact)."""
        out = None
        for c in self.components:
            for part in (c.num, c.den):
                if part.trunc is not None:
                    out = part.trunc if out is None else min(out, part.trunc)
        return out

    def compose_function(self, h) -> RatPoly:
        """h o f for a polynomial or rational h on the same chart."""
        h = _as_ratpoly(h, self.nvars)
        return h.compose_rational(self.components)

    def component_series(self, trunc: int):
        """Components as plain truncated PolySeries (geometric expansion)."""
        return [c.as_series(trunc) for c in self.components]

    def __repr__(self):
        body = ", ".join(str(c) for c in self.components)
        return f"MapGerm({self.chart.label}: {body})"


def vanishing_order(h, germ: MapGerm) -> Union[int, float]:
    """Largest power of the cutting ideal containing h o f - h.

    Returns math.inf when the displacement is identically zero (exact data)
    or zero to the carried depth (truncated data); reports distinguish the
    two via germ.is_exact().
    """
    h = _as_ratpoly(h, germ.nvars)
    delta = germ.compose_function(h) - h
    if delta.is_zero():
        return math.inf
    return delta.num.order_in_vars(germ.chart.cutting_vars)


@dataclass(frozen=True)
class ContactProfile:
    """Contact order, per-coordinate orders, tangentiality, normal data.

    b1 is the restriction to S of the first displacement coefficient (only
    for codimension one); b_f is the constant normal multiplier when b1 + 1
    is constant, None otherwise ("non-constant").
    """

    nu_f: int
    per_coordinate_orders: tuple
    tangential: bool
    b1: Optional[RatPoly] = None
    b_f: Optional[GaussianRational] = None
    b_f_constant: bool = True
    exact: bool = True
    depth: Optional[int] = None


def contact_profile(germ: MapGerm) -> ContactProfile:
    """Classify the germ: contact order, tangentiality, normal multiplier."""
    orders = tuple(
        vanishing_order(PolySeries.variable(germ.nvars, j), germ)
        for j in range(germ.nvars)
    )
    finite = [o for o in orders if o is not math.inf]
    if not finite:
        raise IdentityMap("all coordinate displacements vanish")
    nu = min(finite)
    cutting_min = min(orders[r] for r in germ.chart.cutting_vars)
    tangential = cutting_min > nu
    b1 = None
    b_f = None
    b_f_constant = True
    if germ.codim == 1 and germ.codim < germ.nvars:
        g1 = germ.delta(0).divide_by_monomial_power(0, nu)
        b1 = g1.restrict_unit([0])
        if nu > 1:
            # The normal action is trivial at second order and beyond.
            b_f = G_ONE
        else:
            value = b1.num.constant_term() / b1.den.constant_term()
            if b1.num * b1.den.constant_term() == b1.den * b1.num.constant_term():
                b_f = G_ONE + value
            else:
                b_f_constant = False
    return ContactProfile(
        nu_f=nu,
        per_coordinate_orders=orders,
        tangential=tangential,
        b1=b1,
        b_f=b_f,
        b_f_constant=b_f_constant,
        exact=germ.is_exact(),
        depth=germ.trunc(),
    )


@dataclass(frozen=True)
class DicriticalResult:
    dicritical: bool
    order: int


def leading_homogeneous_parts(f0: MapGerm):
    """(order, [Q_1, ..., Q_n]) for a point germ tangent to the identity.

    Q_j is the degree-`order` homogeneous part of f^j - w^j, an exact
    polynomial; raises NotTangentToIdentity if the linear part is not the
    identity.
    """
    if f0.codim != f0.nvars:
        raise NotTangentToIdentity("expected a germ fixing only a point")
    n = f0.nvars
    for j in range(n):
        num = f0.delta(j).num
        if num.order() is not math.inf and num.order() < 2:
            raise NotTangentToIdentity(
                f"component {j + 1} has a nonzero linear displacement"
            )
    order = min(
        (f0.delta(j).num.order() for j in range(n) if not f0.delta(j).is_zero()),
        default=math.inf,
    )
    if order is math.inf:
        raise IdentityMap("point germ is the identity")
    parts = []
    for j in range(n):
        delta = f0.delta(j)
        c = delta.den.constant_term()
        parts.append(delta.num.homogeneous_part(order) * (G_ONE / c))
    return int(order), parts


def dicritical_test(f0: MapGerm) -> DicriticalResult:
    """Radiality of the leading homogeneous displacement of a point germ.

    The germ is dicritical exactly when w^h Q_k == w^k Q_h for every pair of
    components at the leading order.
    """
    order, parts = leading_homogeneous_parts(f0)
    n = f0.nvars
    for h in range(n):
        wh = PolySeries.variable(n, h)
        for k in range(h + 1, n):
            wk = PolySeries.variable(n, k)
            if wh * parts[k] != wk * parts[h]:
                return DicriticalResult(False, order)
    return DicriticalResult(True, order)


def _transition_list(transition, nvars: int):
    return [_as_ratpoly(t, nvars) for t in transition]


def _check_transition_adapted(transition, codim: int):
    nvars = transition[0].nvars
    if len(transition) != nvars:
        raise NotAdapted("transition needs one component per variable")
    cutting = tuple(range(codim))
    for r in cutting:
        if not transition[r].num.restrict(cutting).is_zero():
            raise NotAdapted(
                f"transition component {r + 1} does not preserve the cutting locus"
            )
    jac = [
        [transition[j].derive(k).evaluate([G_ZERO] * nvars) for k in range(nvars)]
        for j in range(nvars)
    ]
    if matrix_determinant(jac).is_zero():
        raise NotAdapted("transition is singular at the origin")


def check_splitting_pair(chart_a: AdaptedChart, chart_b: AdaptedChart, transition) -> bool:
    """First-order flatness of the pair: normal derivatives of the surface
    coordinates vanish on the cutting locus."""
    if chart_a.nvars != chart_b.nvars or chart_a.codim != chart_b.codim:
        raise NotAdapted("chart pair dimensions do not match")
    m, n = chart_a.codim, chart_a.nvars
    ts = _transition_list(transition, n)
    _check_transition_adapted(ts, m)
    cutting = tuple(range(m))
    for p in range(m, n):
        for r in cutting:
            if not ts[p].derive(r).restrict_unit(cutting).is_zero():
                return False
    return True


def check_comfortable_pair(chart_a: AdaptedChart, chart_b: AdaptedChart, transition) -> bool:
    """Second-order flatness: cutting coordinates have no quadratic terms in
    cutting directions along the locus.  Requires the splitting check."""
    ts = _transition_list(transition, chart_a.nvars)
    if not check_splitting_pair(chart_a, chart_b, ts):
        raise NotSplitting("pair fails the first-order check")
    m = chart_a.codim
    cutting = tuple(range(m))
    for r in cutting:
        for s in cutting:
            for t in range(s, m):
                second = ts[r].derive(s).derive(t)
                if not second.restrict_unit(cutting).is_zero():
                    return False
    return True
