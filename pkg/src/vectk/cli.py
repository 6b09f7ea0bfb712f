"""Command-line interface.

Exit codes: 0 on success, 1 when a verification fails or an obstruction is
found (or no spectral gap exists), 2 on bad input.
"""

import argparse
import math
import os
import sys
from pathlib import Path

from . import io
from .approx import FamilyApproximation, index_of_family, kernel_line_transitions
from .cech import U1Cochain, chern_number, dd_class, rank_obstruction
from .config import Tolerances
from .exceptions import ComputationError, InputError, VectkError
from .scenarios import SCENARIOS, builtin_scenario
from .simplicial import cohomology
from .vectorial import graded_index, support, verify, verify_twisted

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _clean(obj):
    """Make a report JSON-safe and reproducible."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return io.fmt(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def _emit(args, report, summary):
    print(summary)
    out = getattr(args, "report", None) or (args.out if args.command != "approximate" else None)
    if out:
        io.write_json(out, _clean(report))


def _tolerances(args):
    return Tolerances().with_overrides(eps_doteq=args.tol_doteq, gap_tol=args.gap_tol,
                                       eps_eig=args.eps_eig, q_max=args.q_max)


def _jobs(args):
    jobs = args.jobs
    if jobs is None:
        env = os.environ.get("VECTK_JOBS")
        try:
            jobs = int(env) if env else 1
        except ValueError:
            raise InputError(f"VECTK_JOBS must be an integer, got {env!r}") from None
    if jobs < 1:
        raise InputError("--jobs must be at least 1")
    return jobs


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"{args.command} needs {', '.join(missing)}")


def _load_cocycle(path, K):
    c = io.cochain_from_dict(K, io.read_json(path))
    if not isinstance(c, U1Cochain):
        raise InputError(f"{path} holds an integer cochain; expected 'turns'")
    return c


def cmd_cohomology(args):
    _require(args, "complex", "degree")
    K = io.load_complex(str(args.complex))
    if args.degree < 0:
        raise InputError("degree must be nonnegative")
    G = cohomology(K, args.degree)
    report = {"command": "cohomology", "degree": args.degree, "group": str(G),
              "free_rank": G.free_rank, "torsion": list(G.torsion)}
    _emit(args, report, str(G))
    return EXIT_OK


def cmd_dd(args):
    _require(args, "complex", "cocycle")
    K = io.load_complex(str(args.complex))
    c = _load_cocycle(args.cocycle, K)
    cls = dd_class(c)
    report = {"command": "dd", "class": cls.to_dict()}
    summary = f"H^3 = {cls.group}; class free {list(cls.free)} torsion {list(cls.torsion)}; " \
              f"order {'infinite' if cls.order is None else cls.order}"
    _emit(args, report, summary)
    return EXIT_OK


def cmd_obstruction(args):
    _require(args, "complex", "cocycle", "rank")
    K = io.load_complex(str(args.complex))
    c = _load_cocycle(args.cocycle, K)
    res = rank_obstruction(c, args.rank)
    verdict = "Solvable" if res.solvable else "Obstructed"
    report = {"command": "obstruction", "rank": args.rank, "verdict": verdict, "order": res.order,
              "witness": None if res.witness is None else res.witness.to_dict()}
    order = "infinite" if res.order is None else res.order
    _emit(args, report, f"{verdict} (rank {args.rank}, class order {order})")
    return EXIT_OK if res.solvable else EXIT_FAIL


def _kernel_chern(E):
    K = E.complex
    if K.dim != 2:
        return None
    try:
        return chern_number(kernel_line_transitions(E))
    except InputError:
        return None


def cmd_approximate(args):
    _require(args, "family", "out")
    tol = _tolerances(args)
    jobs = _jobs(args)
    lifts = io.read_json(args.lifts) if args.lifts else None
    family = io.family_from_dict(io.read_json(args.family), base_dir=Path(args.family).parent,
                                 lifts=lifts, tol=tol)
    est = FamilyApproximation(lambda_max=args.lambda_max, n_jobs=jobs, tol=tol)
    E = est.fit_transform(family)
    rep = verify(E, tol, jobs)
    io.write_json(args.out, io.bundle_to_dict(E))
    index = graded_index(E)
    report = {"command": "approximate", "cutoffs": {str(p): mu for p, mu in sorted(E.cutoffs.items())},
              "index": list(index), "index_of_family": index_of_family(family),
              "support_size": len(support(E)), "verification": rep.to_dict()}
    if E.twist is not None:
        report["twist"] = dd_class(E.twist).to_dict()
    chern = _kernel_chern(E)
    if chern is not None:
        report["kernel_chern"] = chern
    _emit(args, report, rep.summary() + f"\nindex {list(index)}"
          + ("" if chern is None else f"\nkernel chern number {chern}"))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _load_bundle(args, tol):
    return io.bundle_from_dict(io.read_json(args.bundle), base_dir=Path(args.bundle).parent, tol=tol)


def cmd_verify(args):
    _require(args, "bundle")
    tol = _tolerances(args)
    jobs = _jobs(args)
    E = _load_bundle(args, tol)
    if args.cocycle:
        rep = verify_twisted(E, _load_cocycle(args.cocycle, E.complex), tol, jobs)
    else:
        rep = verify(E, tol, jobs)
    report = {"command": "verify", "verification": rep.to_dict()}
    _emit(args, report, rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_index(args):
    _require(args, "bundle")
    E = _load_bundle(args, _tolerances(args))
    index = graded_index(E)
    _emit(args, {"command": "index", "index": list(index)}, " ".join(str(i) for i in index))
    return EXIT_OK


def cmd_scenario(args):
    _require(args, "name", "out")
    sc = builtin_scenario(args.name, {"seed": args.seed} if args.seed is not None else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "complex.json", sc.complex.to_dict())
    family = io.family_to_dict(sc.family, complex_ref="complex.json")
    files = ["complex.json", "family.json"]
    if "lifts" in sc.extras:
        io.write_json(out / "lifts.json", io.lifts_to_dict(sc.extras["lifts"]))
        io.write_json(out / "cocycle.json", sc.extras["cocycle"].to_dict())
        family["lifts"] = "lifts.json"
        files += ["lifts.json", "cocycle.json"]
    if "bundle" in sc.extras:
        io.write_json(out / "bundle.json", io.bundle_to_dict(sc.extras["bundle"]))
        files.append("bundle.json")
    io.write_json(out / "family.json", family)
    meta = {"name": sc.name, "lambda_max": sc.lambda_max, "files": files + ["scenario.json"],
            "expected": sc.expected}
    io.write_json(out / "scenario.json", _clean(meta))
    print(f"wrote {', '.join(meta['files'])} to {out}")
    return EXIT_OK


COMMANDS = {
    "cohomology": cmd_cohomology,
    "dd": cmd_dd,
    "obstruction": cmd_obstruction,
    "approximate": cmd_approximate,
    "verify": cmd_verify,
    "index": cmd_index,
    "scenario": cmd_scenario,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--complex")
    common.add_argument("--cocycle")
    common.add_argument("--lifts")
    common.add_argument("--family")
    common.add_argument("--bundle")
    common.add_argument("--rank", type=int)
    common.add_argument("--degree", type=int)
    common.add_argument("--lambda-max", type=float, default=1.0)
    common.add_argument("--tol-doteq", type=float)
    common.add_argument("--gap-tol", type=float)
    common.add_argument("--eps-eig", type=float)
    common.add_argument("--q-max", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="report path (bundle path for 'approximate', directory for 'scenario')")
    common.add_argument("--report", help="JSON report path (overrides --out for reports)")
    parser = argparse.ArgumentParser(prog="vectk", description="Spectral truncation of operator "
                                     "families into graded vectorial bundles.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "scenario":
            p.add_argument("name", choices=SCENARIOS)
            p.add_argument("--seed", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except VectkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
