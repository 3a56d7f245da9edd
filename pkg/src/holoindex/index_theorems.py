"""Global index verification on the built-in compact geometries.

The geometry table is deliberately tiny: exceptional divisors of blow-ups of
the origin (a projective space of lines) and, fiberwise, of linear centers.
Expected totals are hardcoded exact integers: the line bundle of the
exceptional divisor restricts to the tautological bundle, so the top
self-intersection is (-1)^(dim of the projective fiber); the fiber of a
linear center contributes the same number one dimension down.

Verification is exact end to end: lift the germ, extract the section in
every chart, enumerate singular points with leftmost-normalized cross-chart
deduplication, compute each residue with the matching point formula, sum,
and compare as Gaussian rationals.  On curves the per-chart totals are also
cross-checked against the residue at infinity of the chart integrand.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .algebra import (
    G_ONE,
    G_ZERO,
    GaussianRational,
    PolySeries,
    RatPoly,
    _ueval,
    _utrim,
)
from .blowup import LiftedGerm, blow_up_point
from .errors import (
    HypothesesUnmet,
    SectionIdenticallyZero,
    UnsupportedGeometry,
)
from .germs import AdaptedChart, MapGerm
from .residues import (
    DEFAULT_PRECISION_CAP,
    ExactSum,
    ResidueValue,
    curve_integrand,
    orbit_residue,
    residue_cs_grothendieck,
    residue_sum_check,
)
from .sections import (
    OrbitBlock,
    SectionData,
    extract_section,
    normalize_direction,
    singular_points,
)
from .algebra import residue_at_point

__all__ = [
    "CompactGeometry",
    "PointReport",
    "EulerCount",
    "IndexVerdict",
    "geometry",
    "verify_index_theorem",
    "euler_count_check",
    "corollary81_report",
]


@dataclass(frozen=True)
class CompactGeometry:
    """One entry of the built-in geometry table."""

    kind: str
    nvars: int
    center_codim: int
    chern_number: int
    euler_char: Optional[int]


def geometry(kind: str, nvars: int = 2, center_codim: Optional[int] = None) -> CompactGeometry:
    """Look up a built-in compact geometry; anything else is rejected."""
    if kind == "exceptional_P1":
        return CompactGeometry(kind, 2, 2, -1, 2)
    if kind == "exceptional_Pn":
        if nvars < 2:
            raise UnsupportedGeometry("need at least two variables")
        euler = 2 if nvars == 2 else None
        return CompactGeometry(kind, nvars, nvars, (-1) ** (nvars - 1), euler)
    if kind == "exceptional_linear_center":
        m = center_codim if center_codim is not None else 2
        if not 2 <= m < nvars:
            raise UnsupportedGeometry("center codimension must satisfy 2 <= m < n")
        euler = 2 if m == 2 else None
        return CompactGeometry(kind, nvars, m, (-1) ** (m - 1), euler)
    raise UnsupportedGeometry(f"unknown geometry kind {kind!r}")


@dataclass(frozen=True)
class PointReport:
    """One singular point (or orbit block) with its residue."""

    direction: Optional[tuple]   # normalized homogeneous coordinates, None for blocks
    chart: int                   # owning chart (1-based distinguished index)
    residue: ResidueValue
    multiplicity: int

    def sort_key(self):
        if self.direction is not None:
            return (0, tuple(c.sort_key() for c in self.direction))
        return (1, self.residue.point.sort_key())


@dataclass(frozen=True)
class EulerCount:
    zero_count: GaussianRational
    expected: GaussianRational
    passed: bool


@dataclass
class IndexVerdict:
    per_point: list
    exact_sum: GaussianRational
    expected: GaussianRational
    passed: bool
    nu_upstairs: int
    tangential_upstairs: bool
    dicritical: Optional[bool]
    section_kind: str
    geometry: CompactGeometry
    euler: Optional[EulerCount] = None
    sum_checks: list = field(default_factory=list)
    corollary81: dict = field(default_factory=dict)


def _thread_count() -> int:
    raw = os.environ.get("HOLOINDEX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _restrict_to_slice(germ: MapGerm) -> MapGerm:
    """Cut a fiber-constant germ down to its normal slice through the origin."""
    n, m = germ.nvars, germ.codim
    surface = tuple(range(m, n))
    for p in surface:
        if not germ.delta(p).is_zero():
            raise UnsupportedGeometry(
                "fiberwise verification needs the surface coordinates fixed"
            )
    assignments = {v: G_ZERO for v in surface}

    def cut(poly: PolySeries) -> PolySeries:
        reduced = poly.eval_partial(assignments)
        out = {}
        for expo, coeff in reduced.terms.items():
            out[expo[:m]] = coeff
        return PolySeries(m, out, reduced.trunc)

    comps = []
    for r in range(m):
        c = germ.components[r]
        comps.append(RatPoly(cut(c.num), cut(c.den)))
    return MapGerm(AdaptedChart(m, m, germ.chart.label + "|slice"), comps)


def _owned(chart, coords) -> bool:
    """Leftmost-normalized ownership: all earlier direction slots vanish."""
    r = chart.distinguished_index
    for k, value in enumerate(coords):
        orig = chart.local_order[1 + k]
        if orig < chart.center_codim and orig < r and not value.is_zero():
            return False
    return True


def _direction_of(chart, coords) -> tuple:
    m = chart.center_codim
    v = [G_ZERO] * m
    v[chart.distinguished_index] = G_ONE
    for k, value in enumerate(coords):
        orig = chart.local_order[1 + k]
        if orig < m:
            v[orig] = value
    return normalize_direction(v)


def _analyze(lifted: LiftedGerm, kind: str):
    """Sections, loci and deduplicated point lists for every chart."""
    charts = []
    for blowchart, chart_germ in lifted.charts:
        section = extract_section(chart_germ, kind)
        if all(x.is_zero() for x in (section.g_on_S if kind == "X" else section.surface_parts())):
            raise SectionIdenticallyZero(
                f"section vanishes identically in chart {blowchart.distinguished_index + 1}"
            )
        locus = singular_points(section)
        if not locus.complete:
            raise HypothesesUnmet(
                "singular-point enumeration not certified complete in chart "
                f"{blowchart.distinguished_index + 1}"
            )
        owned_points = [p for p in locus.points if _owned(blowchart, p.coords)]
        owned_blocks = [
            b for b in locus.blocks
            if blowchart.local_order[b.variable] > blowchart.distinguished_index
        ]
        charts.append((blowchart, section, locus, owned_points, owned_blocks))
    return charts


def verify_index_theorem(
    f0: MapGerm,
    geom: CompactGeometry,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> IndexVerdict:
    """Blow up, localize, sum residues, and compare with the Chern number."""
    if geom.kind == "exceptional_linear_center":
        if f0.nvars != geom.nvars or f0.codim != geom.center_codim:
            raise UnsupportedGeometry("germ does not match the geometry's center")
        source = _restrict_to_slice(f0)
    else:
        if f0.nvars != geom.nvars or f0.codim != geom.nvars:
            raise UnsupportedGeometry("geometry expects a point germ of the ambient dimension")
        source = f0
    lifted = blow_up_point(source)
    kind = "X" if lifted.tangential_upstairs else "H"
    charts = _analyze(lifted, kind)
    n_local = source.nvars

    reports = []
    sum_checks = []
    overlap_values = {}
    tasks = []
    for blowchart, section, locus, owned_points, owned_blocks in charts:
        if n_local == 2:
            num, den = curve_integrand(section)
            chart_values = []
            for p in locus.points:
                value = residue_at_point(num, den, p.coords[0])
                chart_values.append(
                    ResidueValue(value, p.coords, "cs_smooth")
                )
            block_values = [
                orbit_residue(num, den, b, precision_cap) for b in locus.blocks
            ]
            sum_checks.append(
                residue_sum_check(chart_values + block_values, (num, den))
            )
            by_coords = {p.coords: rv for p, rv in zip(locus.points, chart_values)}
            for p in locus.points:
                direction = _direction_of(blowchart, p.coords)
                value = by_coords[p.coords]
                prev = overlap_values.get(direction)
                if prev is not None and prev != value.value:
                    raise HypothesesUnmet(
                        f"charts disagree on the residue at {direction}"
                    )
                overlap_values[direction] = value.value
                if _owned(blowchart, p.coords):
                    reports.append(
                        PointReport(direction, blowchart.distinguished_index + 1,
                                    value, p.multiplicity)
                    )
            for b, rv in zip(locus.blocks, block_values):
                if blowchart.local_order[b.variable] > blowchart.distinguished_index:
                    reports.append(
                        PointReport(None, blowchart.distinguished_index + 1,
                                    rv, b.multiplicity)
                    )
        else:
            for p in owned_points:
                tasks.append((blowchart, section, p))

    if tasks:
        def run(task):
            blowchart, section, p = task
            rv = residue_cs_grothendieck(section, p.coords)
            return PointReport(
                _direction_of(blowchart, p.coords),
                blowchart.distinguished_index + 1, rv, p.multiplicity,
            )

        workers = _thread_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reports.extend(pool.map(run, tasks))
        else:
            reports.extend(map(run, tasks))

    reports.sort(key=PointReport.sort_key)
    total = G_ZERO
    for rep in reports:
        total = total + rep.residue.value
    expected = GaussianRational(geom.chern_number)
    verdict = IndexVerdict(
        per_point=reports,
        exact_sum=total,
        expected=expected,
        passed=total == expected,
        nu_upstairs=lifted.nu_upstairs,
        tangential_upstairs=lifted.tangential_upstairs,
        dicritical=lifted.dicritical,
        section_kind=kind,
        geometry=geom,
        sum_checks=sum_checks,
    )
    if geom.euler_char is not None:
        verdict.euler = _euler_from_reports(verdict)
    verdict.corollary81 = corollary81_report(verdict)
    return verdict


def _euler_from_reports(verdict: IndexVerdict) -> EulerCount:
    count = G_ZERO
    for rep in verdict.per_point:
        weight = rep.multiplicity
        if rep.residue.orbit_aggregated:
            weight = rep.multiplicity * rep.residue.count
        count = count + GaussianRational(weight)
    geom = verdict.geometry
    rhs = GaussianRational(geom.euler_char - verdict.nu_upstairs * geom.chern_number)
    return EulerCount(count, rhs, count == rhs)


def euler_count_check(f0: MapGerm, geom: CompactGeometry):
    """Total zero-divisor degree of the section versus its Chern count."""
    if geom.euler_char is None:
        raise UnsupportedGeometry("zero count needs a curve geometry")
    verdict = verify_index_theorem(f0, geom)
    euler = verdict.euler
    return euler.zero_count, euler.expected, euler.passed


def corollary81_report(verdict: IndexVerdict) -> dict:
    """Positivity and counting consequences of the verified identity."""
    geom = verdict.geometry
    flags = {}
    if geom.euler_char is None:
        flags["applicable"] = False
        return flags
    flags["applicable"] = True
    c1 = geom.chern_number
    chi = geom.euler_char
    bound = chi - verdict.nu_upstairs * c1
    if c1 != 0:
        flags["positivity"] = {"value": bound, "holds": bound > 0}
    else:
        flags["positivity"] = {"value": bound, "holds": None}
    if c1 > 0:
        flags["positive_normal_bundle"] = {
            "rational": True,
            "nu_is_one": verdict.nu_upstairs == 1,
            "c1_is_one": c1 == 1,
        }
    else:
        flags["positive_normal_bundle"] = "not applicable"
    if verdict.tangential_upstairs:
        flags["weakly_attractive_bound"] = bound
    return flags
