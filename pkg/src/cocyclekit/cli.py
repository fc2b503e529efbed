"""Command line entry points: scenario runs, symmetric function tables, BM checks.

Exit codes: 0 all checks pass, 1 any check failed or errored, 2 the scenario
(or arguments) failed validation. Checks never abort the batch; the report is
written even when some fail. COCYCLE_THREADS caps check-level parallelism.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bm import dbar_closed_check, reproducing_integral
from .cechgroup import (cell_multi_index, closedness_report, cohomologous_witness,
                        enumerate_cells, tau_invariant, witness_report)
from .cocycle import cf_map, shifted_form_complex, verify_telescoping
from .errors import ScenarioError, ValidationError
from .forms import sharp_pullback, theta
from .holomap import compose
from .invariants import (ELEMENTARY, POWER, SymFun, chern_character_component,
                         format_symfun, newton_convert, todd_component, todd_invariant)
from .scenario import Scenario
from .simplicial import dk_validate

SIGN_CONVENTION = "cech + (-1)^m group"


# ---------------------------------------------------------------------------
# check runners


def run_affine_vanishing(scn, entry):
    T = todd_invariant(entry.get("arity", scn.n))
    tau = tau_invariant(scn.cover, scn.action, scn.atlas, T)
    worst = 0.0
    cells = 0
    for (m, q) in tau.bidegrees():
        for J, G in enumerate_cells(scn.cover, scn.action, m, q):
            sampled = tau.sample((m, q), J, G)
            worst = max(worst, sampled.max_abs())
            cells += 1
    return {"status": "pass" if worst == 0.0 else "fail",
            "max_residual": worst, "cells": cells,
            "detail": "exact zero required; values are bitwise zero" if worst == 0.0
            else "nonzero coefficient found"}


def run_tau_closedness(scn, entry):
    T = todd_invariant(entry.get("arity", scn.n))
    tau = tau_invariant(scn.cover, scn.action, scn.atlas, T)
    report = closedness_report(tau, tol=entry["tolerance"])
    return _residual_result(report, entry)


def run_witness(scn, entry):
    T = todd_invariant(entry.get("arity", scn.n))
    tau_a = tau_invariant(scn.cover, scn.action, scn.atlas, T)
    tau_b = tau_invariant(scn.cover, scn.action, scn.atlas_b, T)
    wit = cohomologous_witness(scn.cover, scn.action, scn.atlas, scn.atlas_b, T)
    report = witness_report(wit, tau_a, tau_b, tol=entry["tolerance"])
    return _residual_result(report, entry)


def run_telescoping(scn, entry):
    simplex = scn.chart_simplex(entry)
    T = todd_invariant(entry.get("arity", simplex.level - 1))
    report = verify_telescoping(simplex, T, tol=entry["tolerance"])
    return _residual_result(report, entry)


def run_dk_validate(scn, entry):
    simplex = scn.chart_simplex(entry)
    T = todd_invariant(entry.get("arity", min(simplex.level, scn.n)))
    labeling = cf_map(simplex, T)
    complex_ = shifted_form_complex(scn.n, T.arity, simplex.source_points)
    report = dk_validate(labeling, complex_, tol=entry["tolerance"])
    return _residual_result(report, entry)


def run_theta_composition(scn, entry):
    tol = entry["tolerance"]
    worst = 0.0
    rows = []
    for fname, gname in entry.get("pairs", []):
        f = scn.map_named(fname, "theta-composition")
        g = scn.map_named(gname, "theta-composition")
        points = entry.get("points")
        pts = [tuple(complex(c[0], c[1]) for c in p) for p in points] if points \
            else g.domain.samples
        lhs = theta(compose(f, g, check=False))
        rhs = sharp_pullback(g, theta(f)) + theta(g)
        resid = (lhs - rhs).max_norm(pts)
        scale_ref = 1.0 + lhs.max_norm(pts)
        rel = resid / scale_ref
        rows.append({"pair": [fname, gname], "residual": rel})
        worst = max(worst, rel)
    return {"status": "pass" if worst <= tol else "fail", "max_residual": worst,
            "pairs": rows}


def run_bm_dbar(scn, entry):
    n = entry.get("n", 2)
    h = entry.get("step", 1e-3)
    count = entry.get("probes", 12)
    z = tuple(entry.get("z", [0.0] * n))
    rng = np.random.default_rng(entry.get("seed", 5))
    probes = []
    for _ in range(count):
        v = rng.normal(size=2 * n).reshape(n, 2)
        v = v / np.linalg.norm(v)
        probes.append(tuple(z[i] + complex(v[i, 0], v[i, 1]) for i in range(n)))
    report = dbar_closed_check(n, z, probes, h)
    status = "pass" if report["pass"] and report["order_two"] else "fail"
    return dict(report, status=status, max_residual=report["max_residual_h"])


def run_bm_reproducing(scn, entry):
    order = entry.get("order", 32)
    radii = entry.get("radii", [0.5, 1.0, 2.0])
    tol = entry["tolerance"]
    rows = []
    worst = 0.0
    for r in radii:
        val = reproducing_integral(radius=r, order=order)
        err = abs(val - 1.0)
        rows.append({"radius": r, "value": [val.real, val.imag], "error": err})
        worst = max(worst, err)
    return {"status": "pass" if worst <= tol else "fail", "max_residual": worst,
            "radii": rows}


def _residual_result(report, entry):
    ok = report["pass"]
    if entry.get("expect") == "fail":
        ok = not ok
        detail = "negative control: failure expected and observed" if ok \
            else "negative control did not trip"
    else:
        detail = None
    out = {"status": "pass" if ok else "fail",
           "max_residual": report.get("max_residual", 0.0)}
    if detail:
        out["detail"] = detail
    worst = report.get("worst_cell")
    if worst:
        out["worst_cell"] = str(worst)
    cells = report.get("cells")
    if cells:
        out["worst"] = cells[0]
    return out


CHECK_RUNNERS = {
    "affine-vanishing": run_affine_vanishing,
    "tau-closedness": run_tau_closedness,
    "witness": run_witness,
    "telescoping": run_telescoping,
    "dk-validate": run_dk_validate,
    "theta-composition": run_theta_composition,
    "bm-dbar": run_bm_dbar,
    "bm-reproducing": run_bm_reproducing,
}


def execute_checks(scn):
    """Run all checks, preserving declaration order in the report."""

    def one(entry):
        started = time.monotonic()
        try:
            result = CHECK_RUNNERS[entry["type"]](scn, entry)
        except Exception as err:  # checks never abort the batch
            result = {"status": "error", "error": "%s: %s" % (type(err).__name__, err)}
        result["seconds"] = round(time.monotonic() - started, 4)
        return dict(result, name=entry["name"], type=entry["type"],
                    tolerance=entry["tolerance"])

    workers = int(os.environ.get("COCYCLE_THREADS", "0")) or None
    if workers == 1 or len(scn.checks) <= 1:
        results = [one(e) for e in scn.checks]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, scn.checks))
    return results


def build_report(scn, results):
    return {
        "tool": "cocyclekit",
        "version": __version__,
        "scenario_hash": scn.hash,
        "sign_convention": SIGN_CONVENTION,
        "checks": results,
        "pass": all(r["status"] == "pass" for r in results),
    }


def write_report(report, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _print_check_lines(report, stream=sys.stdout):
    for r in report["checks"]:
        line = "[%s] %s" % (r["status"].upper(), r["name"])
        if "max_residual" in r:
            line += "  max_residual=%.3e" % r["max_residual"]
        if "error" in r:
            line += "  " + r["error"]
        print(line, file=stream)
    print("overall: %s" % ("PASS" if report["pass"] else "FAIL"), file=stream)


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args):
    scn = Scenario.load(args.scenario)
    results = execute_checks(scn)
    report = build_report(scn, results)
    write_report(report, args.output or scn.output)
    _print_check_lines(report)
    return 0 if report["pass"] else 1


def cmd_symfun(args):
    k = args.degree
    if args.kind in ("todd", "chern") and k < 1:
        raise ValidationError("degree must be >= 1 for %s" % args.kind)
    if args.kind == "todd":
        f_power = todd_component(k)
    elif args.kind == "chern":
        f_power = chern_character_component(k)
    else:
        payload = json.load(open(args.input) if args.input else sys.stdin)
        f = SymFun.from_json(payload)
        converted = newton_convert(f, ELEMENTARY if f.basis == POWER else POWER)
        print(format_symfun(converted))
        if args.json:
            print(json.dumps(converted.to_json(), sort_keys=True))
        return 0
    f_elem = newton_convert(f_power, ELEMENTARY)
    line = "%s = %s" % (format_symfun(f_elem), format_symfun(f_power))
    print(line)
    if args.json:
        print(json.dumps({"power": f_power.to_json(), "elementary": f_elem.to_json()},
                         sort_keys=True))
    return 0


def cmd_bm_check(args):
    n = args.n
    z = tuple([0.0] * n)
    rng = np.random.default_rng(11)
    probes = []
    for _ in range(args.probes):
        v = rng.normal(size=2 * n).reshape(n, 2)
        v = v / np.linalg.norm(v)
        probes.append(tuple(z[i] + complex(v[i, 0], v[i, 1]) for i in range(n)))
    dbar = dbar_closed_check(n, z, probes, args.step)
    report = {"dbar": dbar, "sign_convention": SIGN_CONVENTION}
    ok = dbar["pass"] and dbar["order_two"]
    if n == 2:
        rows = []
        for r in (args.radius, args.radius * 2):
            val = reproducing_integral(radius=r, order=args.quad_order)
            rows.append({"radius": r, "value": [val.real, val.imag],
                         "error": abs(val - 1.0)})
        report["reproducing"] = rows
        ok = ok and all(row["error"] <= 1e-3 for row in rows)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if ok else 1


def _tau_for_scenario(scn, arity=None):
    T = todd_invariant(arity or scn.n)
    return T, tau_invariant(scn.cover, scn.action, scn.atlas, T)


def cmd_todd_cocycle(args):
    scn = Scenario.load(args.scenario)
    if scn.cover is None or scn.atlas is None:
        raise ScenarioError("scenario has no cover/atlas sections")
    T, tau = _tau_for_scenario(scn)
    cells = []
    for (m, q) in tau.bidegrees():
        for J, G in enumerate_cells(scn.cover, scn.action, m, q):
            sampled = tau.sample((m, q), J, G)
            cells.append({
                "bidegree": [m, q],
                "indices": list(map(str, J)),
                "words": [repr(w) for w in G],
                "on": sorted(map(str, cell_multi_index(scn.action, J, G))),
                "max_abs": sampled.max_abs(),
                "values": sampled.to_json(),
            })
    report = {"tool": "cocyclekit", "version": __version__,
              "scenario_hash": scn.hash, "sign_convention": SIGN_CONVENTION,
              "arity": T.arity, "cells": cells}
    out = args.output or "todd-cocycle.json"
    write_report(report, out)
    print("wrote %s (%d cells)" % (out, len(cells)))
    return 0


def cmd_verify_cocycle(args):
    scn = Scenario.load(args.scenario)
    T, tau = _tau_for_scenario(scn)
    report = closedness_report(tau, tol=args.tolerance)
    report = {"tool": "cocyclekit", "version": __version__,
              "scenario_hash": scn.hash, "closedness": report,
              "pass": report["pass"]}
    write_report(report, args.output or "cocycle-report.json")
    status = "PASS" if report["pass"] else "FAIL"
    print("[%s] mixed-differential residual %.3e (tol %.1e)"
          % (status, report["closedness"]["max_residual"], args.tolerance))
    return 0 if report["pass"] else 1


def cmd_group_invariant(args):
    scn = Scenario.load(args.scenario)
    T, tau = _tau_for_scenario(scn)
    rows = []
    q = T.arity
    for J, G in enumerate_cells(scn.cover, scn.action, 0, q):
        sampled = tau.sample((0, q), J, G)
        rows.append({"index": str(J[0]), "words": [repr(w) for w in G],
                     "max_abs": sampled.max_abs(), "values": sampled.to_json()})
    print(json.dumps({"cells": rows}, indent=2, sort_keys=True))
    return 0


def cmd_witness(args):
    scn = Scenario.load(args.scenario)
    if scn.atlas_b is None:
        raise ScenarioError("scenario has no atlas_b section")
    T = todd_invariant(scn.n)
    tau_a = tau_invariant(scn.cover, scn.action, scn.atlas, T)
    tau_b = tau_invariant(scn.cover, scn.action, scn.atlas_b, T)
    wit = cohomologous_witness(scn.cover, scn.action, scn.atlas, scn.atlas_b, T)
    report = witness_report(wit, tau_a, tau_b, tol=args.tolerance)
    write_report({"witness": report, "scenario_hash": scn.hash}, args.output)
    status = "PASS" if report["pass"] else "FAIL"
    print("[%s] d(witness) vs tau difference: residual %.3e (tol %.1e)"
          % (status, report["max_residual"], args.tolerance))
    return 0 if report["pass"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="cocyclekit",
                                     description="cocycle-level characteristic class checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every check in a scenario file")
    p.add_argument("scenario")
    p.add_argument("--output", help="report path (defaults to the scenario's 'output')")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("symfun", help="print exact symmetric function expansions")
    p.add_argument("kind", choices=["todd", "chern", "convert"])
    p.add_argument("degree", type=int, nargs="?", default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--input", help="JSON SymFun file for 'convert' (default stdin)")
    p.set_defaults(fn=cmd_symfun)

    p = sub.add_parser("bm-check", help="kernel dbar and reproducing checks")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--probes", type=int, default=12)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--quad-order", type=int, default=32)
    p.add_argument("--radius", type=float, default=1.0)
    p.set_defaults(fn=cmd_bm_check)

    p = sub.add_parser("todd-cocycle", help="compute and dump the Todd cocycle")
    p.add_argument("scenario")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_todd_cocycle)

    p = sub.add_parser("verify-cocycle", help="closedness of the Todd cocycle")
    p.add_argument("scenario")
    p.add_argument("--tolerance", type=float, default=1e-7)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_verify_cocycle)

    p = sub.add_parser("group-invariant", help="pure group components of tau")
    p.add_argument("scenario")
    p.set_defaults(fn=cmd_group_invariant)

    p = sub.add_parser("witness", help="cohomologous witness between two atlases")
    p.add_argument("scenario")
    p.add_argument("--tolerance", type=float, default=1e-7)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_witness)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as err:
        print("scenario error: %s" % err, file=sys.stderr)
        return 2
    except (ValidationError, OSError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
