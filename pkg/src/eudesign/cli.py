"""eudesign command line.

Exit codes: 0 success / verified, 1 verification or deformation failed,
2 usage error, infeasible parameters or malformed input.
"""

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from eudesign import construct
from eudesign.design import (
    DEFAULT_TOL,
    classify_tightness,
    decompose_shells,
    design_dimension_bound,
    design_matrix_M,
    moment_residuals,
    tight_identity_check,
    verify_design_integral,
)
from eudesign.io import MalformedDesignError, design_to_dict, read_design, to_jsonable, write_design
from eudesign.rigidity import (
    RANK_TOL,
    DeformationError,
    SingularJacobianError,
    build_design_system,
    coordinate_quadratic_basis,
    newton_deform,
    rank_analysis,
    same_shell_pair,
    search_free_sets,
    simplex_dependent_columns,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FAMILIES = ("simplex", "two-design-radii", "four-design-r2", "five-design-r2", "bajnok3", "crosspoly3")
FAMILY_STRENGTH = {
    "simplex": 2,
    "two-design-radii": 2,
    "four-design-r2": 4,
    "five-design-r2": 5,
    "bajnok3": 3,
    "crosspoly3": 3,
}


class UsageError(Exception):
    pass


def default_tol():
    raw = os.environ.get("ED_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"ED_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise UsageError("ED_TOL must be positive")
    return tol


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


# reports


def emit(report, as_json, out=None):
    out = out or sys.stdout
    report = to_jsonable(report)
    if as_json:
        out.write(json.dumps(report, indent=1) + "\n")
        return
    width = max(len(k) for k in report)
    for key, value in report.items():
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, (list, dict)):
            value = json.dumps(value)
        out.write(f"{key:<{width}}  {value}\n")


def _base(args, tolerances):
    return {"command": " ".join(args.argv), "tolerances": tolerances}


# construct


def build_family(family, n=None, radii=None, r=None):
    if family == "simplex":
        if n is None:
            raise UsageError("simplex needs --n")
        return construct.regular_simplex(n)
    if family in ("two-design-radii", "bajnok3", "crosspoly3"):
        if not radii:
            raise UsageError(f"{family} needs --radii")
        if family == "two-design-radii":
            return construct.tight_two_design_from_radii(radii)
        if family == "bajnok3":
            return construct.bajnok_three_design(radii)
        return construct.cross_polytope_three_design(radii)
    if r is None:
        raise UsageError(f"{family} needs --r")
    if family == "four-design-r2":
        return construct.tight_four_design_r2(r)
    return construct.antipodal_five_design_r2(r)


def cmd_construct(args):
    radii = _floats(args.radii) if args.radii else None
    try:
        X = build_family(args.family, args.n, radii, args.r)
    except construct.InfeasibleError as exc:
        print(f"error: {exc} (violated: {exc.condition})", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        write_design(X, args.output)
        report = _base(args, {})
        report.update(family=args.family, dimension=X.n, points=X.N, output=str(args.output))
        emit(report, args.json, sys.stderr if args.output == "-" else None)
    else:
        sys.stdout.write(json.dumps(design_to_dict(X), indent=1) + "\n")
    return EXIT_OK


# verify / tightness


def cmd_verify(args):
    X = read_design(args.file)
    tol = args.tol
    rep = moment_residuals(X, args.strength, tol)
    report = _base(args, {"tol": tol})
    report.update(rep.to_dict())
    if args.integral:
        report["integral_discrepancy"] = verify_design_integral(X, args.strength, args.group_tol)
        report["tolerances"]["group_tol"] = args.group_tol
    emit(report, args.json)
    return EXIT_OK if rep.is_design else EXIT_FAIL


def cmd_tightness(args):
    X = read_design(args.file)
    tol = args.tol
    tr = classify_tightness(X, args.strength, tol, args.group_tol)
    report = _base(args, {"tol": tol, "group_tol": args.group_tol})
    report.update(tr.to_dict())
    relation = "=" if tr.cardinality == tr.bound else (">" if tr.cardinality > tr.bound else "<")
    report["summary"] = f"{tr.classification}, {tr.cardinality} {relation} {tr.bound}"
    if tr.classification != "not-tight":
        e = args.strength // 2
        odd = bool(args.strength % 2)
        diag, off = tight_identity_check(X, e, args.group_tol, antipodal=odd)
        mc = design_matrix_M(X, e, args.group_tol, antipodal=odd)
        report.update(
            identity_diagonal_residual=diag,
            identity_offdiagonal_residual=off,
            M_gram_residual=mc.gram_residual,
            M_outer_residual=mc.outer_residual,
        )
    emit(report, args.json)
    return EXIT_OK if moment_residuals(X, args.strength, tol).is_design else EXIT_FAIL


# rank


def _system_for(args, X):
    basis = coordinate_quadratic_basis(X.n) if args.basis == "coordinate" else None
    if basis is not None and args.strength > 2:
        raise UsageError("--basis coordinate only covers strength <= 2")
    return build_design_system(X.n, X.N, args.strength, args.antipodal, basis)


def cmd_rank(args):
    X = read_design(args.file)
    system = _system_for(args, X)
    try:
        xi = system.pack(X)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = _base(args, {"rank_tol": args.rank_tol})
    report.update(system=repr(system), equations=system.K, variables=system.V)
    J = system.jacobian(xi)
    if args.search:
        if args.size is None:
            raise UsageError("--search needs --size")
        predicate = None
        if args.constraint == "same-shell-nonantipodal":
            predicate = same_shell_pair(system, xi, antipodal_pair=False)
        elif args.constraint == "same-shell-antipodal":
            predicate = same_shell_pair(system, xi, antipodal_pair=True)
        res = search_free_sets(system, xi, args.size, predicate, args.rank_tol, args.budget)
        report.update(
            constraint=args.constraint,
            size=args.size,
            free_sets=[list(s) for s in res.free_sets],
            count=len(res.free_sets),
            rank_tests=res.rank_tests,
            complete=res.complete,
        )
        emit(report, args.json)
        return EXIT_OK
    if args.columns and args.free:
        raise UsageError("give --free or --columns, not both")
    if args.columns:
        spec = simplex_dependent_columns(X.n) if args.columns == "simplex" else args.columns
        cols = system.parse(spec)
    elif args.free:
        free = set(system.parse(args.free))
        cols = [k for k in range(system.V) if k not in free]
    else:
        cols = list(range(system.V))
    ja = rank_analysis(J[:, cols], args.rank_tol, tuple(system.names[k] for k in cols))
    report.update(ja.to_dict())
    emit(report, args.json)
    return EXIT_OK


# deform


def _groups(text):
    if not text:
        return ()
    out = []
    for chunk in text.split(";"):
        try:
            out.append(tuple(int(v) - 1 for v in chunk.split(",") if v.strip()))
        except ValueError:
            raise UsageError(f"cannot parse point group {chunk!r}") from None
    return tuple(out)


def cmd_deform(args):
    X = read_design(args.file)
    system = build_design_system(X.n, X.N, args.strength, args.antipodal)
    try:
        eta = system.pack(X)
        free = system.parse(args.free)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    if args.offsets:
        offsets = np.array(_floats(args.offsets))
        if len(offsets) != len(free):
            raise UsageError(f"{len(free)} free variables but {len(offsets)} offsets")
    else:
        offsets = np.random.default_rng(args.seed).uniform(-args.perturb, args.perturb, len(free))
    tolerances = {"newton_tol": args.newton_tol, "tol": args.tol, "group_tol": args.group_tol}
    report = _base(args, tolerances)
    try:
        res = newton_deform(
            system, eta, free, eta[free] + offsets,
            tol=args.newton_tol, max_iter=args.max_iter, cospherical=_groups(args.cospherical),
        )
    except SingularJacobianError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DeformationError as exc:
        report.update(converged=False, error=str(exc))
        emit(report, args.json)
        return EXIT_FAIL
    Y = res.deformed
    meta = dict(X.metadata)
    meta.update(deformed_from=str(args.file), free=list(res.free), seed=args.seed, perturb=args.perturb)
    Y = Y.__class__(Y.points, Y.weights, meta)
    check = moment_residuals(Y, args.strength, args.tol)
    shells_before = decompose_shells(X, args.group_tol).p
    shells_after = decompose_shells(Y, args.group_tol).p
    report.update(
        converged=True,
        iterations=res.iterations,
        residual=res.residual,
        offsets=offsets.tolist(),
        max_displacement=float(np.max(res.displacement)),
        max_weight_delta=float(np.max(np.abs(res.weight_delta))),
        shells_before=shells_before,
        shells_after=shells_after,
        norms_after=res.norms_after.tolist(),
        reverified_residual=check.max_abs_residual,
        reverified=check.is_design,
    )
    if args.output:
        write_design(Y, args.output)
        report["output"] = str(args.output)
    emit(report, args.json)
    return EXIT_OK if check.is_design else EXIT_FAIL


# dims


def cmd_dims(args):
    bound = design_dimension_bound(args.n, args.e, args.shells, int(args.origin), args.parity)
    report = _base(args, {})
    report.update(n=args.n, e=args.e, shells=args.shells, origin=args.origin, parity=args.parity, dimension=bound)
    emit(report, args.json)
    return EXIT_OK


# sweep


def _grid(args):
    family = args.family
    entries = []
    if args.grid:
        for chunk in args.grid.split(";"):
            if not chunk.strip():
                continue
            vals = _floats(chunk)
            if family == "simplex":
                entries.append({"n": int(vals[0])})
            elif family in ("four-design-r2", "five-design-r2"):
                entries.extend({"r": v} for v in vals)
            else:
                entries.append({"radii": vals})
    if args.shell_cycle:
        if family != "two-design-radii" or args.n is None:
            raise UsageError("--shell-cycle needs family two-design-radii and --n")
        rng = np.random.default_rng(args.seed)
        for k in range(args.shell_cycle):
            p = 1 + k % (args.n + 1)
            entries.append({"radii": construct.shell_count_radii(args.n, p, rng=rng)})
    return entries


def sweep_job(family, params, path, strength, tol, group_tol):
    try:
        X = build_family(family, **params)
    except ValueError as exc:
        return {"params": params, "file": None, "error": str(exc), "verified": False}
    write_design(X, path)
    rep = moment_residuals(X, strength, tol)
    tr = classify_tightness(X, strength, tol, group_tol)
    return {
        "params": params,
        "file": str(path),
        "residual": rep.max_abs_residual,
        "verified": rep.is_design,
        "shells": tr.p,
        "classification": tr.classification,
    }


def cmd_sweep(args):
    entries = _grid(args)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    strength = args.strength or FAMILY_STRENGTH[args.family]
    jobs = [
        (args.family, params, out / f"{args.family}_{k:03d}.json", strength, args.tol, args.group_tol)
        for k, params in enumerate(entries)
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(sweep_job, *zip(*jobs)))
    else:
        rows = [sweep_job(*job) for job in jobs]
    ok = all(r["verified"] for r in rows)
    shell_counts = Counter(r["shells"] for r in rows if r.get("file"))
    summary = _base(args, {"tol": args.tol, "group_tol": args.group_tol})
    summary.update(
        family=args.family,
        strength=strength,
        count=len(rows),
        verified=sum(r["verified"] for r in rows),
        shell_counts={str(k): v for k, v in sorted(shell_counts.items())},
        rows=rows,
    )
    (out / "summary.json").write_text(json.dumps(to_jsonable(summary), indent=1) + "\n")
    if args.json:
        emit(summary, True)
    else:
        print(f"{'file':<36} {'residual':>12} {'shells':>6}  classification")
        for r in rows:
            if r.get("file"):
                print(f"{Path(r['file']).name:<36} {r['residual']:>12.3e} {r['shells']:>6}  {r['classification']}")
            else:
                print(f"{'-':<36} {'':>12} {'':>6}  error: {r['error']}")
        print(f"{len(rows)} designs, {summary['verified']} verified, shells {summary['shell_counts']}")
        print(f"tol {args.tol:g}, group_tol {args.group_tol:g}")
    return EXIT_OK if ok else EXIT_FAIL


# parser


def build_parser(tol):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the machine-readable report")
    common.add_argument("--tol", type=float, default=tol, help="residual tolerance (env ED_TOL)")
    common.add_argument("--group-tol", type=float, default=1e-8, help="shell grouping tolerance")

    parser = argparse.ArgumentParser(prog="eudesign", description="Weighted Euclidean designs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a design family")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--radii", help="comma-separated (squared norms for two-design-radii)")
    p.add_argument("--r", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="check the moment conditions")
    p.add_argument("file")
    p.add_argument("--strength", "-t", type=int, required=True)
    p.add_argument("--integral", action="store_true", help="also cross-check with shell averages")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tightness", parents=[common], help="classify tightness")
    p.add_argument("file")
    p.add_argument("--strength", "-t", type=int, required=True)
    p.set_defaults(func=cmd_tightness)

    p = sub.add_parser("rank", parents=[common], help="Jacobian rank and free-set search")
    p.add_argument("file")
    p.add_argument("--strength", "-t", type=int, required=True)
    p.add_argument("--free", help="free variables I' (e.g. w1,w2 or x3.*)")
    p.add_argument("--columns", help="Jacobian columns to keep, or 'simplex'")
    p.add_argument("--antipodal", action="store_true")
    p.add_argument("--basis", choices=("nullspace", "coordinate"), default="nullspace")
    p.add_argument("--search", action="store_true")
    p.add_argument("--size", type=int)
    p.add_argument(
        "--constraint",
        choices=("none", "same-shell-nonantipodal", "same-shell-antipodal"),
        default="none",
    )
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--rank-tol", type=float, default=RANK_TOL)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("deform", parents=[common], help="Newton deformation of a design")
    p.add_argument("file")
    p.add_argument("--strength", "-t", type=int, required=True)
    p.add_argument("--free", default="w*")
    p.add_argument("--perturb", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--offsets", help="explicit comma-separated offsets for the free variables")
    p.add_argument("--antipodal", action="store_true")
    p.add_argument("--cospherical", help="point groups kept on one sphere, e.g. '1,2,3;5,6'")
    p.add_argument("--newton-tol", type=float, default=1e-11)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("dims", parents=[common], help="dim Pol_e(S) for p concentric spheres")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--shells", type=int, required=True)
    p.add_argument("--origin", action="store_true")
    p.add_argument("--parity", choices=("full", "even"), default="full")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("sweep", parents=[common], help="construct and verify a parameter grid")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--grid", default="", help="';'-separated entries (radii lists, r values or n)")
    p.add_argument("--shell-cycle", type=int, default=0, help="add this many radii vectors on 1..n+1 shells")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strength", "-t", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(default_tol())
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    args.argv = ["eudesign"] + argv
    try:
        return args.func(args)
    except (UsageError, MalformedDesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KeyError, ValueError) as exc:
        print(f"error: {str(exc).strip(chr(39))}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
