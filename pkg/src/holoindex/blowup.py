"""Blow-up of the origin and of linear coordinate centers, with map lifts.

Chart book-keeping: blowing up {z1 = ... = zm = 0} gives m charts, one per
cutting index r.  In chart r the pullback is z^r = t, z^j = t * u_j for the
other cutting indices, and the surface coordinates pass through; t is the
equation of the exceptional divisor.  Local variables are reordered so t
comes first, making every chart adapted (codimension one) without index
gymnastics downstream.

Lifts are exact: components stay quotients of polynomials (the unit
denominator is the r-th component of the composed map divided by t), so
restrictions to the exceptional divisor never lose coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .algebra import G_ONE, G_ZERO, GaussianRational, PolySeries, RatPoly
from .errors import (
    HoloindexError,
    IdentityMap,
    InsufficientTruncation,
    NormalActionNotIdentity,
    NotTangentToIdentity,
    UnsupportedCenter,
)
from .germs import AdaptedChart, MapGerm, contact_profile, dicritical_test
from .sections import normalize_direction

__all__ = [
    "BlowupChart",
    "LiftedGerm",
    "blow_up_point",
    "blow_up_linear_center",
    "chart_transition",
    "standard_atlas_pairs",
]


@dataclass(frozen=True)
class BlowupChart:
    """One chart of the blow-up along {z1=...=zm=0}, centered at [d_r].

    local_order[k] is the original variable shown in local slot k; slot 0 is
    always the exceptional equation t (original index r).  back_map gives the
    original coordinates as polynomials in the local variables.
    """

    center_codim: int
    distinguished_index: int
    nvars: int
    local_order: tuple
    back_map: tuple

    def direction_of(self, surface_point: Sequence) -> tuple:
        """Homogeneous direction [v] of a point on the exceptional divisor.

        surface_point lists the local surface coordinates (slots 1..m-1 of
        the cutting block); the distinguished slot contributes v_r = 1.
        """
        m = self.center_codim
        v = [G_ZERO] * m
        v[self.distinguished_index] = G_ONE
        others = [j for j in range(m) if j != self.distinguished_index]
        for j, value in zip(others, surface_point):
            v[j] = value
        return normalize_direction(v)


@dataclass(frozen=True)
class LiftedGerm:
    """The lift of a germ across a blow-up, chart by chart."""

    source: MapGerm
    charts: tuple           # (BlowupChart, MapGerm) pairs
    nu_downstairs: Optional[int]
    nu_upstairs: int
    tangential_upstairs: bool
    dicritical: Optional[bool] = None

    def chart_germ(self, r: int) -> MapGerm:
        for chart, germ in self.charts:
            if chart.distinguished_index == r:
                return germ
        raise KeyError(f"no chart with distinguished index {r}")


def _chart_substitution(n: int, m: int, r: int):
    """(local_order, back_map, local AdaptedChart) for chart r of codim m."""
    cutting_others = [j for j in range(m) if j != r]
    local_order = (r,) + tuple(cutting_others) + tuple(range(m, n))
    # position of each original variable in the local order
    slot = {orig: k for k, orig in enumerate(local_order)}
    t = PolySeries.variable(n, 0)
    back = [None] * n
    back[r] = t
    for j in cutting_others:
        back[j] = t * PolySeries.variable(n, slot[j])
    for p in range(m, n):
        back[p] = PolySeries.variable(n, slot[p])
    return local_order, tuple(back), AdaptedChart(n, 1, f"E{r + 1}")


def _lift_chart(components, n: int, m: int, r: int):
    """Lifted components in the local order of chart r (exact RatPoly)."""
    local_order, back, chart = _chart_substitution(n, m, r)
    composed = [comp.compose_rational([RatPoly(b) for b in back]) for comp in components]
    denominator = composed[r]
    # t divides both the r-th composed component and the composed cutting
    # components: every pullback monomial carries at least one power of t.
    den_reduced = RatPoly(
        denominator.num.divide_monomial((1,) + (0,) * (n - 1)), denominator.den
    )
    lifted_local = []
    for k, orig in enumerate(local_order):
        if orig == r:
            lifted_local.append(composed[r])
        elif orig < m:
            reduced_num = composed[orig].num.divide_monomial((1,) + (0,) * (n - 1))
            lifted_local.append(
                RatPoly(reduced_num * den_reduced.den, composed[orig].den * den_reduced.num)
            )
        else:
            lifted_local.append(composed[orig])
    blowchart = BlowupChart(m, r, n, local_order, back)
    return blowchart, MapGerm(chart, lifted_local), composed


def _verify_conjugacy(blowchart: BlowupChart, lifted: MapGerm, source_components):
    """pi o lifted = source o pi, exactly, componentwise."""
    lifted_by_slot = lifted.components
    for j, pi_j in enumerate(blowchart.back_map):
        lhs = RatPoly(pi_j).compose_rational(lifted_by_slot)
        rhs = source_components[j].compose_rational([RatPoly(b) for b in blowchart.back_map])
        if lhs != rhs:
            raise HoloindexError(
                f"lift fails the conjugacy identity in chart {blowchart.distinguished_index + 1}, "
                f"component {j + 1}"
            )


def blow_up_point(f0: MapGerm) -> LiftedGerm:
    """Lift a tangent-to-identity point germ across the origin blow-up.

    Produces all n charts eagerly; verifies the conjugacy identity and the
    order/tangentiality relations against the dicriticality of the source.
    """
    n = f0.nvars
    if f0.codim != n:
        raise NotTangentToIdentity("point blow-up needs a germ fixing only the origin")
    dic = dicritical_test(f0)  # also validates tangency to the identity
    depth = f0.trunc()
    if depth is not None and depth < dic.order + 2:
        raise InsufficientTruncation(
            f"lift needs the source carried to degree {dic.order + 2}, have {depth}"
        )
    charts = []
    profiles = []
    for r in range(n):
        blowchart, lifted, composed = _lift_chart(f0.components, n, n, r)
        _verify_conjugacy(blowchart, lifted, f0.components)
        charts.append((blowchart, lifted))
        profiles.append(contact_profile(lifted))
    nus = {p.nu_f for p in profiles}
    tangentials = {p.tangential for p in profiles}
    if len(nus) != 1 or len(tangentials) != 1:
        raise HoloindexError("lift produced inconsistent contact data across charts")
    nu_up = nus.pop()
    tangential_up = tangentials.pop()
    expected_nu = dic.order if dic.dicritical else dic.order - 1
    if tangential_up == dic.dicritical or nu_up != expected_nu:
        raise HoloindexError(
            "lift contradicts the dicriticality classification "
            f"(nu={nu_up}, tangential={tangential_up}, dicritical={dic.dicritical})"
        )
    return LiftedGerm(
        source=f0,
        charts=tuple(charts),
        nu_downstairs=None,
        nu_upstairs=nu_up,
        tangential_upstairs=tangential_up,
        dicritical=dic.dicritical,
    )


def chart_transition(n: int, m: int, r: int, s: int, point):
    """Overlap transition between blow-up charts r and s, recentered.

    point lists the chart-r local coordinates (slots 1..n-1) of the overlap
    point on the exceptional divisor; the slot carrying the direction of
    chart s must be nonzero.  Returns (transition, chart_r, chart_s): the n
    components of the chart-s local coordinates, recentered at the image
    point, as exact rational expressions in the recentered chart-r locals.
    """
    if not (0 <= r < m and 0 <= s < m and r != s):
        raise UnsupportedCenter("overlap needs two distinct cutting indices")
    order_r, back_r, chart_r = _chart_substitution(n, m, r)
    order_s, _back_s, chart_s = _chart_substitution(n, m, s)
    values = [GaussianRational.coerce(c) for c in point]
    if len(values) != n - 1:
        raise ValueError("point must list the n-1 non-exceptional local coordinates")
    shift = [PolySeries.variable(n, 0)]
    for k, c in enumerate(values, start=1):
        shift.append(PolySeries.variable(n, k) + PolySeries.const(n, c))
    slot_r = {orig: k for k, orig in enumerate(order_r)}
    if values[slot_r[s] - 1].is_zero():
        raise UnsupportedCenter("point is outside the target chart")
    # original coordinates as functions of the recentered chart-r locals
    z = [RatPoly(b.compose(shift)) for b in back_r]
    # z^s = t * (unit); peel the exceptional factor once for the quotients
    zs_reduced = RatPoly(z[s].num.divide_monomial((1,) + (0,) * (n - 1)), z[s].den)
    components = [None] * n
    components[0] = z[s]  # chart-s exceptional coordinate
    for k, orig in enumerate(order_s):
        if k == 0:
            continue
        if orig < m:
            zj_reduced = RatPoly(
                z[orig].num.divide_monomial((1,) + (0,) * (n - 1)), z[orig].den
            )
            components[k] = zj_reduced / zs_reduced
        else:
            components[k] = z[orig]
    # recenter: subtract each component's value at the local origin
    origin = [G_ZERO] * n
    out = []
    for comp in components:
        value = comp.evaluate(origin)
        out.append(comp - RatPoly(PolySeries.const(n, value)))
    return out, chart_r, chart_s


def standard_atlas_pairs(n: int, m: int, sample=None):
    """All ordered chart overlaps of the standard blow-up atlas, recentered
    at a sample overlap point (default: target direction coordinate 1)."""
    pairs = []
    for r in range(m):
        order_r, _, _ = _chart_substitution(n, m, r)
        slot = {orig: k for k, orig in enumerate(order_r)}
        for s in range(m):
            if s == r:
                continue
            point = [G_ZERO] * (n - 1)
            point[slot[s] - 1] = G_ONE if sample is None else GaussianRational.coerce(sample)
            transition, chart_r, chart_s = chart_transition(n, m, r, s, point)
            pairs.append((r, s, transition, chart_r, chart_s))
    return pairs


def blow_up_linear_center(germ: MapGerm) -> LiftedGerm:
    """Lift a germ across the blow-up of its chart's linear cutting center.

    Requires the differential to act as the identity on normal directions
    (tangential, or contact order above one).  The lift is always
    tangential; its contact order drops by one exactly when the source is
    not tangential.
    """
    n = germ.nvars
    m = germ.codim
    if m == n:
        return blow_up_point(germ)
    if m < 2:
        raise UnsupportedCenter("blow-up centers must have codimension at least 2")
    profile = contact_profile(germ)
    if profile.nu_f == 1 and not profile.tangential:
        raise NormalActionNotIdentity(
            "contact order one with nontrivial normal action; the lift does not exist"
        )
    depth = germ.trunc()
    if depth is not None and depth < profile.nu_f + 2:
        raise InsufficientTruncation(
            f"lift needs the source carried to degree {profile.nu_f + 2}, have {depth}"
        )
    charts = []
    profiles = []
    for r in range(m):
        blowchart, lifted, _ = _lift_chart(germ.components, n, m, r)
        _verify_conjugacy(blowchart, lifted, germ.components)
        charts.append((blowchart, lifted))
        profiles.append(contact_profile(lifted))
    nus = {p.nu_f for p in profiles}
    tangentials = {p.tangential for p in profiles}
    if len(nus) != 1 or len(tangentials) != 1:
        raise HoloindexError("lift produced inconsistent contact data across charts")
    nu_up = nus.pop()
    tangential_up = tangentials.pop()
    expected_nu = profile.nu_f if profile.tangential else profile.nu_f - 1
    if not tangential_up or nu_up != expected_nu:
        raise HoloindexError(
            f"lift order/tangentiality mismatch (nu={nu_up}, tangential={tangential_up})"
        )
    return LiftedGerm(
        source=germ,
        charts=tuple(charts),
        nu_downstairs=profile.nu_f,
        nu_upstairs=nu_up,
        tangential_upstairs=tangential_up,
    )
