"""Command-line driver.

Subcommands:
  ball-forms     closed-form ball integrals and the equality identity
  minkowski      deficit report and hypothesis audit for a domain spec
  check-reilly   term-by-term identity residual for a named field/weight
  solve-neumann  weighted Neumann solve, residuals and the inequality chain
  flow           equidistant flow trace with concavity/variational checks
  suite          run every spec in a corpus directory against its expected
                 verdict sidecar

Domain spec files are TOML (schema in the README); machine reports go to
--out as deterministic JSON; flow traces can be dumped as CSV.  Exit codes:
0 all verdicts pass, 2 spec parse error, 3 precondition violation, 4
verification failure.
"""

import argparse
import math
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .domains import Domain, ball_domain, star_domain, boundary_geometry
from .errors import (
    CausticError,
    CompatibilityError,
    GeometryDomainError,
    PreconditionError,
    SpecFileError,
    UnsupportedSpaceError,
)
from .fields import PotentialField, named_field
from .flow import comparison_inequalities, flow_trace, trace_to_csv, variational_formula_check
from .minkowski import hypothesis_audit, minkowski_report
from .neumann import minkowski_via_reilly, solve_weighted_neumann
from .quadrature import ball_closed_forms, minkowski_formula_residual
from .reilly import boundary_identity_residuals, reilly_breakdown
from .report import Report, Verdict, write_report
from .spaceform import SpaceForm

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_VERIFY = 4

SPACE_NAMES = {"hyperbolic": -1, "euclidean": 0, "hemisphere": 1}
RESOLUTION_ENV = "SFMINK_RESOLUTION"

DEFAULT_TOLERANCES = {
    "reilly": 1e-6,
    "boundary_identities": 1e-6,
    "pde": 1e-5,
    "bc": 1e-5,
    "slack": 1e-7,
    "accounting": 1e-6,
    "positivity": 1e-7,
    "concavity": 1e-7,
    "variational": 1e-5,
    "comparison": 1e-7,
    "closed_form": 1e-12,
}


def load_domain_spec(path):
    """Parse a TOML domain spec; reports the first violated invariant by name."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise SpecFileError("spec-file-exists", str(exc)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise SpecFileError("toml-syntax", f"{path}: {exc}") from exc

    for key in ("space", "n", "shape"):
        if key not in data:
            raise SpecFileError("required-key", f"{path}: missing {key!r}")
    space_name = data["space"]
    if space_name not in SPACE_NAMES:
        raise SpecFileError(
            "space-name", f"{path}: space must be one of {sorted(SPACE_NAMES)}, got {space_name!r}"
        )
    n = data["n"]
    if not isinstance(n, int) or n < 2:
        raise SpecFileError("dimension", f"{path}: n must be an integer >= 2, got {n!r}")
    space = SpaceForm(SPACE_NAMES[space_name], n)

    env_res = os.environ.get(RESOLUTION_ENV)
    resolution = data.get("resolution", int(env_res) if env_res else 128)
    if not isinstance(resolution, int) or resolution < 8:
        raise SpecFileError("resolution", f"{path}: resolution must be an integer >= 8")

    shape = data["shape"]
    try:
        if "ball" in shape:
            ball = shape["ball"]
            domain = ball_domain(
                space, ball["R"], ball.get("d", 0.0), resolution=resolution
            )
        elif "star" in shape:
            star = shape["star"]
            domain = star_domain(
                space,
                fourier=star.get("fourier"),
                cosine=star.get("cosine"),
                profile=star.get("profile"),
                resolution=resolution,
            )
        else:
            raise SpecFileError("shape-kind", f"{path}: shape must contain 'ball' or 'star'")
    except KeyError as exc:
        raise SpecFileError("shape-field", f"{path}: missing shape field {exc}") from exc
    except GeometryDomainError as exc:
        raise SpecFileError("domain-invariant", f"{path}: {exc}") from exc

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, val in data.get("tolerances", {}).items():
        if key not in tolerances:
            raise SpecFileError("tolerance-name", f"{path}: unknown tolerance {key!r}")
        tolerances[key] = float(val)
    echo = {
        "space": space_name,
        "n": n,
        "resolution": resolution,
        "shape": {k: dict(v) if isinstance(v, dict) else v for k, v in shape.items()},
        "path": os.path.basename(path),
    }
    return domain, tolerances, echo


# ---------------------------------------------------------------------------
# Subcommand implementations (each returns a Report).
# ---------------------------------------------------------------------------


def run_ball_forms(space_name, n, R, tol):
    space = SpaceForm(SPACE_NAMES[space_name], n)
    wi = ball_closed_forms(space, R)
    deficit = wi.weighted_area**2 - n * wi.weighted_volume * wi.weighted_mean_curv
    normalized = deficit / wi.weighted_area**2
    results = {
        "weighted_area": wi.weighted_area,
        "weighted_volume": wi.weighted_volume,
        "weighted_mean_curv": wi.weighted_mean_curv,
        "unweighted_area": wi.unweighted_area,
        "unweighted_volume": wi.unweighted_volume,
        "deficit": deficit,
        "normalized_deficit": normalized,
    }
    verdicts = [Verdict("ball-equality-identity", abs(normalized) < tol, abs(normalized), tol)]
    domain = {"space": space_name, "n": n, "shape": {"ball": {"R": R, "d": 0.0}}}
    return Report("ball-forms", domain, None, results, verdicts)


def run_minkowski(domain, tolerances, echo):
    bg = boundary_geometry(domain)
    rep = minkowski_report(domain, bg)
    audit = hypothesis_audit(domain, bg)
    mink_res = minkowski_formula_residual(bg)
    results = {
        "integrals": rep.integrals,
        "deficit": rep.deficit,
        "normalized_deficit": rep.normalized_deficit,
        "convexity_margin": rep.convexity_margin,
        "horoconvexity_margin": rep.horoconvexity_margin,
        "hypothesis_satisfied": rep.hypothesis_satisfied,
        "equality_flag": rep.equality_flag,
        "h_variation": rep.h_variation,
        "deficit_tol": rep.tol,
        "minkowski_formula_residual": mink_res,
        "audit": {
            "min_eig_h": float(np.min(audit.min_eig_h)),
            "condition_margin": audit.condition_margin,
            "horoconvex": audit.horoconvex,
            "convex": audit.convex,
            "implication_holds": audit.implication_holds,
            "violating_samples": audit.violating_samples,
            "horoconvexity_violations": audit.horoconvexity_violations,
        },
    }
    verdicts = [
        Verdict("minkowski-formula", mink_res < 1e-8, mink_res, 1e-8),
    ]
    if rep.hypothesis_satisfied:
        verdicts.append(
            Verdict(
                "minkowski-positivity",
                rep.normalized_deficit >= -tolerances["positivity"],
                rep.normalized_deficit,
                tolerances["positivity"],
            )
        )
    return Report("minkowski", echo, domain.resolution, results, verdicts)


def run_check_reilly(domain, tolerances, echo, field_name, weight_name, kparam):
    space = domain.space
    f = named_field(space, field_name)
    weight = named_field(space, weight_name)
    K = space.K if kparam is None else float(kparam)
    bd = reilly_breakdown(domain, f, weight, K)
    scale = max(abs(bd.lhs_bulk), 1.0)
    rel = abs(bd.residual) / scale
    r_ss, r_rr = boundary_identity_residuals(domain)
    results = {
        "field": field_name,
        "weight": weight_name,
        "K_param": K,
        "lhs_bulk": bd.lhs_bulk,
        "b_main": bd.b_main,
        "b_vnu": bd.b_vnu,
        "t_ricci": bd.t_ricci,
        "t_zero": bd.t_zero,
        "residual": bd.residual,
        "relative_residual": rel,
        "boundary_identity_ss": r_ss,
        "boundary_identity_rr": r_rr,
    }
    tol = tolerances["reilly"]
    tb = tolerances["boundary_identities"]
    verdicts = [
        Verdict("reilly-residual", rel < tol, rel, tol),
        Verdict("boundary-identity-ss", r_ss < tb, r_ss, tb),
        Verdict("boundary-identity-rr", r_rr < tb, r_rr, tb),
    ]
    return Report("check-reilly", echo, domain.resolution, results, verdicts)


def run_solve_neumann(domain, tolerances, echo):
    sol = solve_weighted_neumann(domain)
    chain = minkowski_via_reilly(domain, solution=sol)
    results = {
        "c": sol.c,
        "gauge": sol.gauge,
        "residuals": sol.residuals,
        "lhs": chain.lhs,
        "rhs": chain.rhs,
        "slack": chain.slack,
        "hessian_deficit": chain.hessian_deficit,
        "boundary_quadratic": chain.boundary_quadratic,
        "accounting_residual": chain.accounting_residual,
        "convexity_margin": chain.convexity_margin,
        "hypothesis_ok": chain.hypothesis_ok,
    }
    scale = max(abs(chain.lhs), 1.0)
    verdicts = [
        Verdict("neumann-pde-residual", sol.residuals["pde_interior"] < tolerances["pde"],
                sol.residuals["pde_interior"], tolerances["pde"]),
        Verdict("neumann-bc-residual", sol.residuals["bc_boundary"] < tolerances["bc"],
                sol.residuals["bc_boundary"], tolerances["bc"]),
        Verdict("neumann-compatibility", sol.residuals["compatibility"] < 1e-10,
                sol.residuals["compatibility"], 1e-10),
        Verdict("chain-accounting", chain.accounting_residual / scale < tolerances["accounting"],
                chain.accounting_residual / scale, tolerances["accounting"]),
    ]
    if chain.hypothesis_ok:
        verdicts.append(
            Verdict("chain-slack", chain.slack >= -tolerances["slack"], chain.slack,
                    tolerances["slack"])
        )
    return Report("solve-neumann", echo, domain.resolution, results, verdicts)


def run_flow(domain, tolerances, echo, t_max, steps):
    trace = flow_trace(domain, t_max, steps)
    res1, res2 = variational_formula_check(trace)
    cmp_rec = comparison_inequalities(trace)
    concavity_max = float(np.nanmax(trace.concavity_residuals))
    results = {
        "t_max": t_max,
        "steps": steps,
        "A_final": float(trace.A[-1]),
        "S_final": float(trace.S[-1]),
        "concavity_max": concavity_max,
        "variational_res1": res1,
        "variational_res2": res2,
        "comparison": cmp_rec,
    }
    verdicts = [
        Verdict("flow-concavity", concavity_max <= tolerances["concavity"],
                concavity_max, tolerances["concavity"]),
        Verdict("flow-variational-1", res1 < tolerances["variational"], res1,
                tolerances["variational"]),
        Verdict("flow-variational-2", res2 < tolerances["variational"], res2,
                tolerances["variational"]),
        Verdict("flow-comparison", cmp_rec.min_slack >= -tolerances["comparison"],
                cmp_rec.min_slack, tolerances["comparison"]),
    ]
    if cmp_rec.isoperimetric_limit is not None:
        err = abs(cmp_rec.isoperimetric_limit - cmp_rec.isoperimetric_target)
        verdicts.append(Verdict("flow-isoperimetric-limit", err < 1e-3, err, 1e-3))
    return Report("flow", echo, domain.resolution, results, verdicts), trace


CHECK_RUNNERS = ("minkowski", "solve-neumann", "flow", "check-reilly")


def run_suite(corpus_dir, out=None):
    """Run every spec file against its expected-verdict sidecar."""
    if not os.path.isdir(corpus_dir):
        raise SpecFileError("corpus-directory", f"not a directory: {corpus_dir}")
    specs = sorted(
        f for f in os.listdir(corpus_dir)
        if f.endswith(".toml") and not f.endswith(".expect.toml")
    )
    if not specs:
        raise SpecFileError("corpus-empty", f"no spec files in {corpus_dir}")
    rows = []
    all_ok = True
    sub_reports = {}
    for name in specs:
        spec_path = os.path.join(corpus_dir, name)
        expect_path = spec_path[: -len(".toml")] + ".expect.toml"
        expectations = {"checks": ["minkowski"], "verdict": "pass"}
        if os.path.exists(expect_path):
            with open(expect_path, "rb") as fh:
                expectations.update(tomllib.load(fh))
        domain, tolerances, echo = load_domain_spec(spec_path)
        expected_pass = expectations["verdict"] == "pass"
        for check in expectations["checks"]:
            if check == "minkowski":
                rep = run_minkowski(domain, tolerances, echo)
            elif check == "solve-neumann":
                rep = run_solve_neumann(domain, tolerances, echo)
            elif check == "flow":
                rep, _ = run_flow(
                    domain, tolerances, echo,
                    expectations.get("t_max", 1.0), expectations.get("steps", 40),
                )
            elif check == "check-reilly":
                rep = run_check_reilly(
                    domain, tolerances, echo,
                    expectations.get("field", "rsq"), expectations.get("weight", "V"),
                    expectations.get("kparam"),
                )
            else:
                raise SpecFileError("expect-check", f"unknown check {check!r} in {expect_path}")
            ok = rep.passed == expected_pass
            all_ok = all_ok and ok
            rows.append((name, check, rep.passed, expected_pass, ok))
            sub_reports[f"{name}:{check}"] = rep.to_dict()
    width = max(len(r[0]) for r in rows)
    print(f"{'spec':<{width}}  {'check':<14} {'verdict':<8} {'expected':<9} ok")
    for name, check, got, want, ok in rows:
        print(
            f"{name:<{width}}  {check:<14} {'pass' if got else 'fail':<8} "
            f"{'pass' if want else 'fail':<9} {'yes' if ok else 'NO'}"
        )
    print(f"suite: {'PASS' if all_ok else 'FAIL'} ({len(rows)} checks)")
    if out:
        suite_report = Report(
            "suite", {"corpus": os.path.basename(os.path.normpath(corpus_dir))}, None,
            {"reports": sub_reports},
            [Verdict("suite-expectations", all_ok, float(len(rows)), float(len(rows)))],
        )
        write_report(suite_report, out)
    return all_ok


# ---------------------------------------------------------------------------
# Argument parsing and dispatch.
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sfmink",
        description="Numerical verification of weighted Reilly/Minkowski identities in space forms",
    )
    parser.add_argument("--version", action="version", version=f"sfmink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ball-forms", help="closed-form ball integrals")
    p.add_argument("--space", required=True, choices=sorted(SPACE_NAMES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--out")

    for name in ("minkowski", "solve-neumann"):
        p = sub.add_parser(name)
        p.add_argument("spec")
        p.add_argument("--out")

    p = sub.add_parser("check-reilly")
    p.add_argument("spec")
    p.add_argument("--field", default="rsq")
    p.add_argument("--weight", default="V")
    p.add_argument("--kparam", type=float, default=None)
    p.add_argument("--out")

    p = sub.add_parser("flow")
    p.add_argument("spec")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--csv")

    p = sub.add_parser("suite")
    p.add_argument("corpus")
    p.add_argument("--out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "ball-forms":
            report = run_ball_forms(args.space, args.n, args.R, DEFAULT_TOLERANCES["closed_form"])
            trace = None
        elif args.command == "suite":
            ok = run_suite(args.corpus, args.out)
            print(f"elapsed: {time.perf_counter() - started:.2f}s")
            return EXIT_OK if ok else EXIT_VERIFY
        else:
            domain, tolerances, echo = load_domain_spec(args.spec)
            trace = None
            if args.command == "minkowski":
                report = run_minkowski(domain, tolerances, echo)
            elif args.command == "check-reilly":
                report = run_check_reilly(
                    domain, tolerances, echo, args.field, args.weight, args.kparam
                )
            elif args.command == "solve-neumann":
                report = run_solve_neumann(domain, tolerances, echo)
            elif args.command == "flow":
                report, trace = run_flow(domain, tolerances, echo, args.tmax, args.steps)
    except SpecFileError as exc:
        print(f"spec error ({exc.invariant}): {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, CompatibilityError, CausticError, GeometryDomainError) as exc:
        # domain-invariant failures at spec load time are wrapped as
        # SpecFileError above; geometry errors past that point are runtime
        # precondition violations (hemisphere exits, equator guards, ...)
        name = getattr(exc, "invariant", type(exc).__name__)
        print(f"precondition violated ({name}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (UnsupportedSpaceError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE

    for line in report.human_lines():
        print(line)
    print(f"elapsed: {time.perf_counter() - started:.2f}s")
    if getattr(args, "out", None):
        write_report(report, args.out)
    if getattr(args, "csv", None) and trace is not None:
        trace_to_csv(trace, args.csv)
    return EXIT_OK if report.passed else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
