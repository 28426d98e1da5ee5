"""Command-line front end.

Exit codes: 0 feasible / valid, 2 certified infeasible, 1 error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import List, Optional

from . import io
from .behaviors import Behavior, BehaviorError, Event
from .certify import (CertificateError, NonBracketingError, NumericalFailure, solve_feasibility,
                      sweep_noise, verify_certificate)
from .constraints import DEFAULT_MAX_VARIABLES, CompileError, compile_system, shared_bit_system
from .exact import format_exact
from .inequalities import bkp_score, ghz_inequality_terms, i_bell_conditioned, i_same
from .inflation import DEFAULT_MAX_RAW_WIRINGS, TooLargeError, enumerate_inflations, lp_inflations
from .network import InvalidScenarioError, canonical_scenario
from .quantum import (OracleError, fidelity_of, ghz_behavior, ghz_parties, svetlichny_lhvm_behavior,
                      svetlichny_ns_behavior, w_behavior)

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

log = logging.getLogger("losrcert")


def _emit(obj):
    sys.stdout.write(io.dumps(obj))


def _jsonable(v):
    if isinstance(v, float):
        return v
    if isinstance(v, int):
        return v
    return {"exact": format_exact(v), "float": float(v)}


def _scenario_for(b: Behavior, sc):
    return sc if sc is not None else canonical_scenario(b.n, b.parties)


def cmd_inflations(args) -> int:
    sc = canonical_scenario(args.n)
    classes = enumerate_inflations(sc, args.order, symmetric=not args.copy_classes,
                                   max_raw_wirings=args.max_raw_wirings)
    print(f"scenario N={args.n} order K={args.order}: {len(classes)} classes")
    for i, c in enumerate(classes):
        print(f"class {i + 1}: multiplicity {c.multiplicity} raw wirings {c.raw_count}")
        print(c.representative.describe())
    return EXIT_OK


def _parse_noise(text: str):
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad noise value {text!r}") from None


def cmd_oracle(args) -> int:
    if args.family == "ghz":
        b = ghz_behavior(args.n, args.noise if not args.float else float(args.noise), exact=not args.float)
    elif args.family == "w":
        b = w_behavior(args.m)
    elif args.family == "lhvm":
        b = svetlichny_lhvm_behavior()
    else:
        b = svetlichny_ns_behavior()
    text = io.dumps(io.behavior_to_json(b))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _system(args):
    b, sc = io.read_behavior(args.behavior)
    sc = _scenario_for(b, sc)
    infs = lp_inflations(sc, args.order, max_raw_wirings=args.max_raw_wirings)
    return compile_system(sc, b, infs, max_variables=args.max_variables)


def cmd_certify(args) -> int:
    system = _system(args)
    res = solve_feasibility(system, exact=args.exact or None)
    out = {"verdict": res.verdict, "backend": res.backend, "violation": res.objective,
           "residual": res.residual, "near_boundary": res.near_boundary, "exact": res.exact,
           "rows": system.n_rows, "variables": system.n_vars, "notes": res.notes}
    if not res.feasible:
        out["witness_value"] = _jsonable(res.certificate.value)
        if args.cert_out:
            io.write_certificate(args.cert_out, res.certificate)
            out["certificate"] = args.cert_out
    _emit(out)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_verify(args) -> int:
    cert = io.read_certificate(args.cert)
    system = _system(args)
    if tuple(b.inflation.wiring for b in system.blocks) != cert.inflations:
        raise CertificateError("certificate was issued for a different inflation list")
    ok = verify_certificate(cert, system)
    _emit({"valid": ok, "witness_value": _jsonable(cert.evaluate(system.p))})
    return EXIT_OK if ok else EXIT_ERROR


def cmd_sweep(args) -> int:
    if args.family != "ghz":
        raise BehaviorError("only the ghz family is swept")
    sc = canonical_scenario(args.n, ghz_parties(args.n))
    infs = lp_inflations(sc, args.order, max_raw_wirings=args.max_raw_wirings)
    res = sweep_noise(lambda p: ghz_behavior(args.n, p), sc, infs, args.tol)
    for p, verdict in res.history:
        print(f"p={float(p):.6f} ({p}) {verdict}")
    out = {"p_feasible": format_exact(res.lo), "p_infeasible": format_exact(res.hi),
           "interval": [float(res.lo), float(res.hi)],
           "fidelity_at_infeasible": float(fidelity_of(res.hi, args.n)),
           "witness_value": _jsonable(res.certificate.value)}
    if args.cert_out:
        io.write_certificate(args.cert_out, res.certificate)
        out["certificate"] = args.cert_out
    _emit(out)
    return EXIT_OK


def cmd_eval(args) -> int:
    b, _ = io.read_behavior(args.behavior)
    if args.inequality == "ghz":
        out = {k: _jsonable(v) for k, v in ghz_inequality_terms(b, b.n).items()}
    elif args.inequality == "same":
        out = {"i_same": _jsonable(i_same(b, b.n))}
    elif args.inequality == "bell":
        out = {"i_bell": _jsonable(i_bell_conditioned(b))}
    else:
        given = None
        if args.conditioned:
            given = Event({b.names[-1]: 1}, outputs={b.names[-1]: 0})
        out = {"i_bkp": _jsonable(bkp_score(b, args.m, given))}
    _emit(out)
    return EXIT_OK


def cmd_demo(args) -> int:
    system = shared_bit_system(args.n)
    res = solve_feasibility(system, exact=True)
    _emit({"n": args.n, "verdict": res.verdict, "rows": system.n_rows, "variables": system.n_vars,
           "row_tags": system.structure.tag_counts(),
           "witness_value": _jsonable(res.certificate.value) if res.certificate else None})
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="losrcert", allow_abbrev=False,
                                 description="Inflation-LP certification of genuine network nonlocality")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                    help="parallelism degree (accepted; the pipeline currently runs serially)")
    ap.add_argument("--seed", type=int, default=None, help="reserved; the pipeline is deterministic")
    ap.add_argument("--max-raw-wirings", type=int, default=DEFAULT_MAX_RAW_WIRINGS)
    ap.add_argument("--max-variables", type=int, default=DEFAULT_MAX_VARIABLES)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inflations", help="list inflation classes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--copy-classes", action="store_true", help="do not merge by network symmetries")
    p.set_defaults(func=cmd_inflations)

    p = sub.add_parser("oracle", help="write a behavior file")
    p.add_argument("--family", choices=["ghz", "w", "lhvm", "lhvm-ns"], required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--noise", type=_parse_noise, default=Fraction(1))
    p.add_argument("--m", type=int, default=2, help="BKP parameter for the w family")
    p.add_argument("--float", action="store_true", help="float tables instead of exact ones")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("certify", help="decide the inflation LP for a behavior")
    p.add_argument("--behavior", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--cert-out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="check a certificate exactly")
    p.add_argument("--cert", required=True)
    p.add_argument("--behavior", required=True)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="bisect the critical noise of a family")
    p.add_argument("--family", choices=["ghz"], default="ghz")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--cert-out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate an inequality on a behavior")
    p.add_argument("--inequality", choices=["ghz", "bkp", "same", "bell"], required=True)
    p.add_argument("--behavior", required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--conditioned", action="store_true",
                   help="bkp only: condition on the last party outputting 0 at input 1")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="built-in demonstrations")
    dsub = p.add_subparsers(dest="demo", required=True)
    d = dsub.add_parser("shared-bit", help="a shared random bit fails the order-2 test")
    d.add_argument("--n", type=int, default=3)
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TooLargeError as e:
        print(f"resource error: {e}", file=sys.stderr)
    except io.FileFormatError as e:
        print(f"parse error: {e}", file=sys.stderr)
    except NonBracketingError as e:
        print(f"sweep error: {e}", file=sys.stderr)
    except (BehaviorError, CompileError, CertificateError, NumericalFailure, OracleError,
            InvalidScenarioError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
