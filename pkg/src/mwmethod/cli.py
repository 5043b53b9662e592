"""Command line entry point: ``mwmethod <subcommand> --scenario PATH``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import serialize
from .approx import (
    approximate_constant,
    covering_number,
    thickness_cover_bridge,
    thickness_number,
)
from .descent import basic_descent, extract_model, recursive_chain
from .errors import BudgetExhausted, MWError
from .groups import inverse_set, product_set
from .measure import check_mean_axioms
from .scenario import bundled_scenarios, load_scenario
from .systems import mu_thickness_bound_check
from .verify import verify_certificate

SUBCOMMANDS = ("axioms", "constants", "descent", "chain", "model", "verify")


def _resolve_scenario(arg: str):
    path = Path(arg)
    if not path.exists():
        for p in bundled_scenarios():
            if p.stem == arg:
                path = p
                break
    return load_scenario(path)


def _apply_overrides(sc, args):
    if args.budget_depth is not None:
        sc.budgets["max_translators"] = args.budget_depth
    if args.budget_candidates is not None:
        sc.budgets["max_candidates"] = args.budget_candidates
    if args.jobs is not None:
        sc.budgets["n_jobs"] = args.jobs
    if args.seed is not None:
        sc.seed = args.seed
    sc.exact_only = args.exact_only
    return sc


def run_axioms(sc, args) -> tuple[dict, bool]:
    action = sc.action
    report = {
        "group": {"order": sc.group.order, "abelian": sc.group.is_abelian(),
                  "validated": True},
        "action": {"space_size": action.space_size, "orbits": len(action.orbits())},
        "measure": check_mean_axioms(sc.m, seed=sc.seed).to_json(),
        "group_measure": check_mean_axioms(sc.mu, seed=sc.seed).to_json(),
    }
    ok = report["measure"]["ok"] and report["group_measure"]["ok"]
    return report, ok


def _cover_entry(A, B, strict):
    try:
        return covering_number(A, B, "exact", strict=strict).to_json()
    except BudgetExhausted as exc:
        return {"error": str(exc)}


def run_constants(sc, args) -> tuple[dict, bool]:
    strict = sc.exact_only
    lam, A, C = sc.lam, sc.A, sc.C
    lam2 = product_set(lam, lam)
    out = {"approximate_constant": approximate_constant(lam, strict=strict).to_json(),
           "covering": {"lambda_by_A": _cover_entry(A, lam, strict),
                        "C_by_A": _cover_entry(A, C, strict),
                        "lambda2_by_lambda": _cover_entry(lam, lam2, strict)}}
    th = thickness_number(product_set(inverse_set(A), A), lam, "exact", strict=strict)
    out["thickness"] = {"AinvA_in_lambda": th.to_json()}
    ok = True
    if len(lam) <= 64 and len(lam2) <= 64:
        bridge = thickness_cover_bridge(lam, lam2)
        out["bridge"] = bridge.to_json()
        ok = ok and bridge.ok
    W = sc.W if sc.W is not None else A
    report = mu_thickness_bound_check(lam, A, C, sc.mu, W)
    out["mu_thickness"] = report.to_json()
    ok = ok and report.ok
    return out, ok


def _with_verdict(cert, sc) -> tuple[dict, bool]:
    verdict = verify_certificate(cert, sc)
    for c in verdict.failed():
        logging.error("clause failed: %s %s", c.name, c.detail)
    return cert.to_json(), verdict.ok


def run_descent(sc, args):
    cert = basic_descent(sc.lam, sc.gamma, sc.A, sc.B, sc.m, sc.make_system(), sc.descent_params())
    return _with_verdict(cert, sc)


def _chain(sc):
    return recursive_chain(sc.lam, sc.A, sc.B, sc.m, sc.make_system(), sc.n,
                           sc.budgets["chain_depth"], sc.descent_params())


def run_chain(sc, args):
    return _with_verdict(_chain(sc), sc)


def run_model(sc, args):
    return _with_verdict(extract_model(_chain(sc), sc.lam, sc.n), sc)


def run_verify(sc, args):
    if args.cert is None:
        raise MWError("verify needs --cert PATH")
    verdict = verify_certificate(serialize.load(args.cert), sc)
    for c in verdict.failed():
        print(f"FAILED clause: {c.name} {c.detail}".rstrip(), file=sys.stderr)
    return verdict.to_json(), verdict.ok


RUNNERS = {"axioms": run_axioms, "constants": run_constants, "descent": run_descent,
           "chain": run_chain, "model": run_model, "verify": run_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwmethod", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--scenario", required=True,
                        help="scenario JSON file, or the name of a bundled scenario")
    parser.add_argument("--out", help="write the JSON result here instead of stdout")
    parser.add_argument("--cert", help="certificate file to check (verify only)")
    parser.add_argument("--budget-depth", type=int, help="max translates intersected (t)")
    parser.add_argument("--budget-candidates", type=int, help="max candidates kept per level")
    parser.add_argument("--jobs", type=int, help="threads for candidate scoring")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--exact-only", action="store_true",
                        help="fail rather than emit greedy witnesses")
    parser.add_argument("--log-level", default="WARNING")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(message)s")
    try:
        sc = _apply_overrides(_resolve_scenario(args.scenario), args)
        result, ok = RUNNERS[args.subcommand](sc, args)
    except MWError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = serialize.dumps(result)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
