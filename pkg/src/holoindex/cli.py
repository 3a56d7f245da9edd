"""Batch front end: JSON problem files in, reports out.

Problem files are validated before any computation (unknown fields are
rejected); polynomials travel as text in the package grammar and every exact
value in a report is serialized as a rational string, never a float.  The
canonical report (what --json writes and what golden files store) excludes
wall-clock timing, so byte comparison is meaningful; timing appears only in
the human-readable rendering.

Exit codes: 0 computed and all verdicts passed, 1 computed with a failed
verdict, 2 input error, 3 precondition or internal-consistency error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .algebra import (
    G_ZERO,
    GaussianRational,
    PolySeries,
    RatPoly,
    format_polynomial,
    format_scalar,
    parse_polynomial,
    parse_scalar,
)
from .blowup import blow_up_linear_center, blow_up_point, standard_atlas_pairs
from .errors import (
    CorpusMissing,
    HoloindexError,
    ParseError,
    SchemaError,
)
from .germs import (
    AdaptedChart,
    MapGerm,
    check_comfortable_pair,
    check_splitting_pair,
    contact_profile,
    dicritical_test,
)
from .index_theorems import geometry, verify_index_theorem
from .residues import (
    BranchParametrization,
    DEFAULT_PRECISION_CAP,
    curve_integrand,
    orbit_residue,
    residue_cs_grothendieck,
    residue_cs_n2_smooth,
    residue_cs_singular_curve,
    residue_ls_phi,
    residue_sum_check,
)
from .sections import action_coefficients, extract_section, singular_points

__all__ = ["main", "run", "run_corpus", "canonical_report_bytes"]

TASKS = ("classify", "section", "residues", "verify_index", "blowup", "atlas_check")

_OPTION_KEYS = {
    "classify": set(),
    "section": {"kind", "candidates"},
    "residues": {"kind", "formula", "points", "ell", "branches", "phi", "variant"},
    "verify_index": {"geometry", "center_codim"},
    "blowup": set(),
    "atlas_check": {"builtin", "nvars", "center_codim", "sample", "perturbation",
                    "transition", "codim", "check"},
}
_COMMON_OPTIONS = {"trunc_degree", "precision_cap"}


# ---------------------------------------------------------------------------
# Problem validation and parsing
# ---------------------------------------------------------------------------

def _require(condition, message):
    if not condition:
        raise SchemaError(message)


def validate_problem(problem: dict) -> dict:
    _require(isinstance(problem, dict), "problem must be a JSON object")
    allowed = {"version", "task", "map", "chart", "options"}
    unknown = set(problem) - allowed
    _require(not unknown, f"unknown problem fields: {sorted(unknown)}")
    _require(problem.get("version") == 1, "unsupported problem version")
    task = problem.get("task")
    _require(task in TASKS, f"task must be one of {TASKS}")
    options = problem.get("options", {})
    _require(isinstance(options, dict), "options must be an object")
    unknown = set(options) - _OPTION_KEYS[task] - _COMMON_OPTIONS
    _require(not unknown, f"unknown options for task {task}: {sorted(unknown)}")
    if task != "atlas_check" or "transition" in options:
        if task != "atlas_check":
            _require(isinstance(problem.get("map"), list) and problem["map"],
                     "map must be a nonempty list of polynomial strings")
            _require(all(isinstance(s, str) for s in problem["map"]),
                     "map entries must be strings")
    chart = problem.get("chart")
    if task != "atlas_check":
        _require(isinstance(chart, dict), "chart must be an object")
        _require(set(chart) <= {"nvars", "codim"}, "chart allows only nvars and codim")
        _require(isinstance(chart.get("nvars"), int) and chart["nvars"] >= 2,
                 "chart.nvars must be an integer >= 2")
        _require(isinstance(chart.get("codim"), int) and 1 <= chart["codim"] <= chart["nvars"],
                 "chart.codim must satisfy 1 <= codim <= nvars")
        _require(len(problem["map"]) == chart["nvars"],
                 "map must list one component per variable")
    return problem


def _parse_germ(problem: dict):
    chart = problem["chart"]
    nvars = chart["nvars"]
    trunc = problem.get("options", {}).get("trunc_degree")
    comps = [parse_polynomial(text, nvars, trunc) for text in problem["map"]]
    return MapGerm(AdaptedChart(nvars, chart["codim"]), comps)


def _scalar_list(values):
    return [parse_scalar(v) if isinstance(v, str) else GaussianRational.coerce(v)
            for v in values]


# ---------------------------------------------------------------------------
# Report helpers (everything below returns plain JSON-able structures)
# ---------------------------------------------------------------------------

def _fmt_order(order) -> str:
    import math
    return "infinite" if order is math.inf else str(order)


def _fmt_ratpoly(value: RatPoly) -> str:
    return str(value)


def _residue_entry(rv, extra=None) -> dict:
    entry = {
        "value": format_scalar(rv.value),
        "formula": rv.formula,
        "provenance": "orbit-aggregated" if rv.orbit_aggregated else "exact",
    }
    if rv.orbit_aggregated:
        entry["block"] = {
            "minpoly": [format_scalar(c) for c in rv.point.minpoly],
            "count": rv.count,
        }
        if rv.symbolic is not None:
            entry["symbolic"] = [format_scalar(c) for c in rv.symbolic]
    else:
        entry["point"] = [format_scalar(c) for c in rv.point]
    if extra:
        entry.update(extra)
    return entry


def _profile_payload(profile) -> dict:
    return {
        "nu_f": profile.nu_f,
        "per_coordinate_orders": [_fmt_order(o) for o in profile.per_coordinate_orders],
        "tangential": profile.tangential,
        "b1": None if profile.b1 is None else _fmt_ratpoly(profile.b1),
        "b_f": (format_scalar(profile.b_f) if profile.b_f is not None
                else ("non-constant" if not profile.b_f_constant else None)),
        "exact": profile.exact,
        "depth": profile.depth,
    }


def _section_payload(section) -> dict:
    return {
        "kind": section.kind,
        "nu": section.nu,
        "g": [_fmt_ratpoly(x) for x in section.g],
        "g_on_S": [_fmt_ratpoly(x) for x in section.g_on_S],
        "b1": _fmt_ratpoly(section.b1),
        "h1": _fmt_ratpoly(section.h1),
        "tangential": section.tangential,
        "trivial": section.trivial,
    }


def _locus_payload(locus) -> dict:
    return {
        "points": [
            {"coords": [format_scalar(c) for c in p.coords], "multiplicity": p.multiplicity}
            for p in locus.points
        ],
        "blocks": [
            {"minpoly": [format_scalar(c) for c in b.minpoly],
             "multiplicity": b.multiplicity, "count": b.count}
            for b in locus.blocks
        ],
        "complete": locus.complete,
    }


# ---------------------------------------------------------------------------
# Task handlers
# ---------------------------------------------------------------------------

def _task_classify(problem: dict):
    germ = _parse_germ(problem)
    profile = contact_profile(germ)
    payload = {"profile": _profile_payload(profile)}
    if germ.codim == germ.nvars:
        result = dicritical_test(germ)
        payload["dicritical"] = {"dicritical": result.dicritical, "order": result.order}
    return payload, 0


def _task_section(problem: dict):
    germ = _parse_germ(problem)
    options = problem.get("options", {})
    section = extract_section(germ, options.get("kind", "X"))
    candidates = options.get("candidates")
    if candidates is not None:
        candidates = [_scalar_list(c) for c in candidates]
    locus = singular_points(section, candidates=candidates)
    action = action_coefficients(section)
    payload = {
        "section": _section_payload(section),
        "singular_points": _locus_payload(locus),
        "action": {
            "m_f": _fmt_ratpoly(action.m_f),
            "v": [[_fmt_ratpoly(entry) for entry in row] for row in action.v],
        },
    }
    return payload, 0


def _task_residues(problem: dict):
    germ = _parse_germ(problem)
    options = problem.get("options", {})
    cap = options.get("precision_cap", DEFAULT_PRECISION_CAP)
    formula = options.get("formula", "auto")
    entries = []
    extra = {}
    if options.get("ell"):
        ell = parse_polynomial(options["ell"], germ.nvars)
        for raw in options.get("branches", []):
            comps = tuple(
                parse_polynomial(text, 1, options.get("trunc_degree"))
                for text in raw["components"]
            )
            branch = BranchParametrization(comps, raw.get("multiplicity", 1))
            rv = residue_cs_singular_curve(germ.components, ell, branch, formula)
            entries.append(_residue_entry(rv))
    elif formula in ("ls_phi", "bb_phi"):
        section = extract_section(germ, options.get("kind", "X"))
        phi = tuple(options["phi"])
        variant = "bb" if formula == "bb_phi" else "ls"
        for raw in options.get("points", []):
            coords = _scalar_list(raw)
            rv = residue_ls_phi(
                section, coords if germ.nvars > 2 else coords[0], phi, variant
            )
            entries.append(_residue_entry(rv))
    else:
        section = extract_section(germ, options.get("kind", "X"))
        points = options.get("points")
        if points is not None:
            for raw in points:
                coords = _scalar_list(raw)
                if germ.nvars == 2:
                    rv = residue_cs_n2_smooth(section, coords[0])
                else:
                    rv = residue_cs_grothendieck(section, coords)
                entries.append(_residue_entry(rv))
        else:
            locus = singular_points(section)
            if germ.nvars == 2:
                num, den = curve_integrand(section)
                values = []
                for p in locus.points:
                    rv = residue_cs_n2_smooth(section, p.coords[0])
                    values.append(rv)
                    entries.append(_residue_entry(rv, {"multiplicity": p.multiplicity}))
                for b in locus.blocks:
                    rv = orbit_residue(num, den, b, cap)
                    values.append(rv)
                    entries.append(_residue_entry(rv, {"multiplicity": b.multiplicity}))
                check = residue_sum_check(values, (num, den))
                extra["sum_check"] = {
                    "finite_total": format_scalar(check.finite_total),
                    "at_infinity": format_scalar(check.at_infinity),
                    "matches": check.matches,
                }
            else:
                for p in locus.points:
                    rv = residue_cs_grothendieck(section, p.coords)
                    entries.append(_residue_entry(rv, {"multiplicity": p.multiplicity}))
    payload = {"residues": entries}
    payload.update(extra)
    return payload, 0


def _geometry_for(problem: dict):
    chart = problem["chart"]
    options = problem.get("options", {})
    kind = options.get("geometry")
    if kind is None:
        if chart["codim"] == chart["nvars"]:
            kind = "exceptional_P1" if chart["nvars"] == 2 else "exceptional_Pn"
        else:
            kind = "exceptional_linear_center"
    return geometry(kind, chart["nvars"], options.get("center_codim", chart["codim"]))


def _task_verify_index(problem: dict):
    germ = _parse_germ(problem)
    options = problem.get("options", {})
    geom = _geometry_for(problem)
    cap = options.get("precision_cap", DEFAULT_PRECISION_CAP)
    verdict = verify_index_theorem(germ, geom, cap)
    per_point = []
    for rep in verdict.per_point:
        entry = _residue_entry(rep.residue, {"chart": rep.chart, "multiplicity": rep.multiplicity})
        if rep.direction is not None:
            entry["direction"] = [format_scalar(c) for c in rep.direction]
        per_point.append(entry)
    payload = {
        "verdict": {
            "geometry": {
                "kind": geom.kind,
                "chern_number": geom.chern_number,
                "euler_char": geom.euler_char,
            },
            "per_point": per_point,
            "exact_sum": format_scalar(verdict.exact_sum),
            "expected": format_scalar(verdict.expected),
            "pass": verdict.passed,
            "nu_upstairs": verdict.nu_upstairs,
            "tangential_upstairs": verdict.tangential_upstairs,
            "dicritical": verdict.dicritical,
            "section_kind": verdict.section_kind,
            "sum_checks": [
                {"finite_total": format_scalar(c.finite_total),
                 "at_infinity": format_scalar(c.at_infinity),
                 "matches": c.matches}
                for c in verdict.sum_checks
            ],
            "corollary81": verdict.corollary81,
        }
    }
    if verdict.euler is not None:
        payload["verdict"]["euler_count"] = {
            "zero_count": format_scalar(verdict.euler.zero_count),
            "expected": format_scalar(verdict.euler.expected),
            "pass": verdict.euler.passed,
        }
    code = 0 if verdict.passed and (verdict.euler is None or verdict.euler.passed) else 1
    return payload, code


def _task_blowup(problem: dict):
    germ = _parse_germ(problem)
    if germ.codim == germ.nvars:
        lifted = blow_up_point(germ)
    else:
        lifted = blow_up_linear_center(germ)
    charts = []
    for blowchart, chart_germ in lifted.charts:
        charts.append({
            "distinguished_index": blowchart.distinguished_index + 1,
            "local_order": [i + 1 for i in blowchart.local_order],
            "back_map": [format_polynomial(b) for b in blowchart.back_map],
            "components": [_fmt_ratpoly(c) for c in chart_germ.components],
        })
    payload = {
        "lift": {
            "charts": charts,
            "nu_downstairs": lifted.nu_downstairs,
            "nu_upstairs": lifted.nu_upstairs,
            "tangential_upstairs": lifted.tangential_upstairs,
            "dicritical": lifted.dicritical,
        }
    }
    return payload, 0


def _task_atlas_check(problem: dict):
    options = problem.get("options", {})
    if "transition" in options:
        nvars = options.get("nvars")
        codim = options.get("codim", 1)
        _require(isinstance(nvars, int) and nvars >= 2, "atlas_check needs nvars")
        transition = [parse_polynomial(t, nvars) for t in options["transition"]]
        chart_a = AdaptedChart(nvars, codim, "a")
        chart_b = AdaptedChart(nvars, codim, "b")
        which = options.get("check", "comfortable")
        results = {"splitting": check_splitting_pair(chart_a, chart_b, transition)}
        if which == "comfortable" and results["splitting"]:
            results["comfortable"] = check_comfortable_pair(chart_a, chart_b, transition)
        payload = {"atlas": {"pairs": [results]}}
        ok = all(v for v in results.values())
        return payload, 0 if ok else 1
    nvars = options.get("nvars", 2)
    m = options.get("center_codim", nvars)
    sample = parse_scalar(options["sample"]) if "sample" in options else None
    perturbation = options.get("perturbation", "none")
    pairs = []
    all_ok = True
    for r, s, transition, chart_r, chart_s in standard_atlas_pairs(nvars, m, sample):
        transition = list(transition)
        if perturbation == "surface_shear" and nvars > m:
            transition[-1] = transition[-1] + RatPoly(PolySeries.variable(nvars, 0))
        elif perturbation == "surface_shear":
            transition[1] = transition[1] + RatPoly(PolySeries.variable(nvars, 0))
        elif perturbation == "normal_quadratic":
            transition[0] = transition[0] + RatPoly(PolySeries.variable(nvars, 0) ** 2)
        splitting = check_splitting_pair(chart_r, chart_s, transition)
        comfortable = False
        if splitting:
            comfortable = check_comfortable_pair(chart_r, chart_s, transition)
        pairs.append({
            "from_chart": r + 1,
            "to_chart": s + 1,
            "splitting": splitting,
            "comfortable": comfortable,
        })
        all_ok = all_ok and splitting and comfortable
    payload = {"atlas": {"pairs": pairs, "all_pass": all_ok}}
    return payload, 0 if all_ok else 1


_HANDLERS = {
    "classify": _task_classify,
    "section": _task_section,
    "residues": _task_residues,
    "verify_index": _task_verify_index,
    "blowup": _task_blowup,
    "atlas_check": _task_atlas_check,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def canonical_report_bytes(report: dict) -> bytes:
    """Deterministic serialization used for golden files (timing excluded)."""
    clean = {k: v for k, v in report.items() if k != "timing_ms"}
    return (json.dumps(clean, sort_keys=True, separators=(",", ":")) + "\n").encode()


def run(problem_path, trunc=None, precision_cap=None):
    """Execute one problem file; returns (report, exit_code)."""
    raw = Path(problem_path).read_text()
    problem = json.loads(raw)
    validate_problem(problem)
    options = dict(problem.get("options", {}))
    if trunc is not None:
        options["trunc_degree"] = trunc
    if precision_cap is not None:
        options["precision_cap"] = precision_cap
    problem = dict(problem, options=options)
    started = time.perf_counter()
    payload, code = _HANDLERS[problem["task"]](problem)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    report = {
        "version": 1,
        "task": problem["task"],
        "input": {
            "map": problem.get("map"),
            "chart": problem.get("chart"),
            "options": options,
        },
    }
    report.update(payload)
    report["timing_ms"] = elapsed_ms
    return report, code


def run_corpus(corpus_dir):
    """Re-run every problem in a corpus directory and byte-compare reports."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise CorpusMissing(f"not a directory: {corpus_dir}")
    problems = sorted(root.glob("*.problem.json"))
    if not problems:
        raise CorpusMissing(f"no *.problem.json files in {corpus_dir}")
    results = []
    for problem_path in problems:
        name = problem_path.name[: -len(".problem.json")]
        golden_path = root / f"{name}.golden.json"
        if not golden_path.exists():
            results.append((name, "missing-golden"))
            continue
        report, _code = run(problem_path)
        got = canonical_report_bytes(report)
        expected = golden_path.read_bytes()
        results.append((name, "ok" if got == expected else "diff"))
    return results


def _render_human(report: dict, out):
    def line(text=""):
        print(text, file=out)

    task = report["task"]
    line(f"task: {task}")
    if "profile" in report:
        p = report["profile"]
        line(f"  contact order: {p['nu_f']}   tangential: {p['tangential']}")
        line(f"  per-coordinate orders: {', '.join(p['per_coordinate_orders'])}")
        if p.get("b1") is not None:
            line(f"  b1: {p['b1']}   b_f: {p.get('b_f')}")
    if "dicritical" in report:
        d = report["dicritical"]
        line(f"  dicritical: {d['dicritical']}   order: {d['order']}")
    if "section" in report:
        s = report["section"]
        line(f"  section kind {s['kind']}  nu={s['nu']}  trivial={s['trivial']}")
        line(f"  g|_S: {', '.join(s['g_on_S'])}")
        line(f"  b1: {s['b1']}   h1: {s['h1']}")
    if "singular_points" in report:
        sp = report["singular_points"]
        for p in sp["points"]:
            line(f"  singular point ({', '.join(p['coords'])}) multiplicity {p['multiplicity']}")
        for b in sp["blocks"]:
            line(f"  orbit block deg {b['count']} minpoly {b['minpoly']}")
    if "residues" in report:
        for entry in report["residues"]:
            where = entry.get("point") or entry.get("block", {}).get("minpoly")
            line(f"  residue {entry['value']}  at {where}  [{entry['formula']}; {entry['provenance']}]")
        if "sum_check" in report:
            c = report["sum_check"]
            line(f"  chart sum check: finite {c['finite_total']} + infinity {c['at_infinity']} -> {'ok' if c['matches'] else 'MISMATCH'}")
    if "verdict" in report:
        v = report["verdict"]
        for entry in v["per_point"]:
            where = "[" + ":".join(entry["direction"]) + "]" if "direction" in entry else "orbit block"
            line(f"  {where}  chart {entry['chart']}  residue {entry['value']}  ({entry['provenance']})")
        line(f"  exact sum: {v['exact_sum']}   expected: {v['expected']}   pass: {v['pass']}")
        if "euler_count" in v:
            e = v["euler_count"]
            line(f"  zero count: {e['zero_count']} expected {e['expected']} pass: {e['pass']}")
        for c in v.get("sum_checks", []):
            line(f"  chart residue check: {c['finite_total']} + {c['at_infinity']} at infinity -> {'ok' if c['matches'] else 'MISMATCH'}")
    if "lift" in report:
        lift = report["lift"]
        line(f"  nu upstairs: {lift['nu_upstairs']}  tangential: {lift['tangential_upstairs']}  dicritical: {lift['dicritical']}")
        for chart in lift["charts"]:
            line(f"  chart {chart['distinguished_index']}: {', '.join(chart['components'])}")
    if "atlas" in report:
        atlas = report["atlas"]
        for pair in atlas["pairs"]:
            line(f"  pair {pair}")
        if "all_pass" in atlas:
            line(f"  all pass: {atlas['all_pass']}")
    line(f"  time: {report['timing_ms']:.1f} ms")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="holoindex",
        description="Exact classification, residues and index verification "
                    "for self-maps fixing a hypersurface.",
    )
    parser.add_argument("problem", nargs="?", help="problem file (JSON)")
    parser.add_argument("--json", metavar="PATH", help="write the canonical JSON report here")
    parser.add_argument("--trunc", type=int, metavar="D", help="truncation degree override")
    parser.add_argument("--precision-cap", type=int, metavar="DEG",
                        help="orbit minimal-polynomial degree cap")
    parser.add_argument("--corpus", metavar="DIR", help="run a golden corpus directory")
    parser.add_argument("--quiet", action="store_true", help="suppress the human report")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    args = parser.parse_args(argv)

    if args.corpus is None and args.problem is None:
        parser.error("need a problem file or --corpus")

    try:
        if args.corpus is not None:
            results = run_corpus(args.corpus)
            fails = [name for name, status in results if status != "ok"]
            if not args.quiet:
                for name, status in results:
                    print(f"{status:>14}  {name}")
                print(f"{len(results) - len(fails)}/{len(results)} corpus entries match")
            return 0 if not fails else 1
        report, code = run(args.problem, args.trunc, args.precision_cap)
        if args.json:
            Path(args.json).write_bytes(canonical_report_bytes(report))
        if not args.quiet:
            _render_human(report, sys.stdout)
        return code
    except (ParseError, SchemaError, json.JSONDecodeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except HoloindexError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
