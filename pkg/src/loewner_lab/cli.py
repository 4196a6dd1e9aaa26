"""Command-line surface: ``loewner-lab (verify | campaign | hunt)``.

Exit codes: 0 when everything holds (or no counterexample was found),
1 when a chain fails or a counterexample is found, 2 on configuration or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .campaign import CampaignConfig, emit_report, run_campaign
from .chains import build_chain, evaluate_chain, hunt_counterexample, resolve_theorem
from .errors import IoError, LoewnerLabError
from .functions import parse_function_spec
from .instances import instance_from_dict
from .maps import sample_map
from .serialize import dumps_canonical


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loewner-lab",
        description="Build and verify operator inequality chains at desk scale.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="evaluate one chain on an instance file")
    p_verify.add_argument("--theorem", required=True, help="theorem id, e.g. lc-quad")
    p_verify.add_argument("--instance", required=True, help="path to the instance JSON file")
    p_verify.add_argument("--function", required=True, help='function spec, e.g. "exp" or "pow:p=-1"')
    p_verify.add_argument("--map", default="identity", help="map spec for single-map theorems")
    p_verify.add_argument("--tol", type=float, default=1e-9)
    p_verify.add_argument("--seed", type=int, default=0, help="seed for map realization")

    p_campaign = sub.add_parser("campaign", help="run a configured verification campaign")
    p_campaign.add_argument("--config", required=True, help="path to the campaign config JSON")
    p_campaign.add_argument("--out", required=True, help="path for the report JSON")
    p_campaign.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_campaign.add_argument("--jobs", type=int, default=1, help="parallel cells (same output)")

    p_hunt = sub.add_parser("hunt", help="search for counterexamples under a relaxed hypothesis")
    p_hunt.add_argument("--theorem", required=True)
    p_hunt.add_argument("--relax", default=None,
                        help="hypothesis to drop: cond-i-f, cond-i-sum, cond-ii-f, "
                             "cond-ii-sum, equal-sum; omit to sample valid instances")
    p_hunt.add_argument("--function", required=True)
    p_hunt.add_argument("--budget", type=int, default=1000)
    p_hunt.add_argument("--seed", type=int, default=0)
    p_hunt.add_argument("--map", default="identity")
    p_hunt.add_argument("--dims", default="1,2,3", help="comma-separated dimensions to cycle")
    p_hunt.add_argument("--m", type=float, default=1.0)
    p_hunt.add_argument("--M", type=float, default=2.0)
    p_hunt.add_argument("--tol", type=float, default=1e-9)
    return parser


def _cmd_verify(args) -> int:
    spec = resolve_theorem(args.theorem)
    f = parse_function_spec(args.function)
    try:
        with open(args.instance, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read instance file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IoError(f"instance file is not valid JSON: {exc}") from exc
    inst = instance_from_dict(payload)
    maps = None
    if spec.map_mode == "single":
        maps = sample_map(args.map, inst.dim, args.seed)
    chain = build_chain(spec.id, inst, f, maps, tol=args.tol)
    report = evaluate_chain(chain, args.tol, seed=args.seed)
    print(dumps_canonical(report.to_dict()))
    return 0 if report.passed else 1


def _cmd_campaign(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IoError(f"config file is not valid JSON: {exc}") from exc
    if args.seed is not None:
        payload["seed"] = args.seed
    config = CampaignConfig.from_dict(payload)
    report = run_campaign(config, jobs=max(1, args.jobs))
    emit_report(report, args.out)
    ran = [c for c in report.cells if not c.skipped]
    skipped = len(report.cells) - len(ran)
    fails = sum(c.fail_count for c in ran)
    print(f"campaign {report.verdict}: {len(ran)} cells run, {skipped} skipped, "
          f"{fails} failing instances -> {args.out}")
    return 0 if report.passed else 1


def _cmd_hunt(args) -> int:
    f = parse_function_spec(args.function)
    dims = tuple(int(d) for d in args.dims.split(",") if d.strip())
    if not dims or any(d < 1 for d in dims):
        raise LoewnerLabError(f"bad --dims value {args.dims!r}")
    result = hunt_counterexample(
        args.theorem, args.relax, args.budget, args.seed, f,
        map_spec=args.map, dims=dims, m=args.m, M=args.M, tol=args.tol,
    )
    if result is None:
        print(dumps_canonical({
            "found": False,
            "theorem": resolve_theorem(args.theorem).id,
            "relaxation": args.relax,
            "budget": int(args.budget),
            "seed": int(args.seed),
        }))
        return 0
    print(dumps_canonical({
        "found": True,
        "theorem": resolve_theorem(args.theorem).id,
        "relaxation": args.relax,
        "attempt": int(result.attempt_index),
        "seed": int(args.seed),
        "instance": result.instance.to_dict(),
        "report": result.report.to_dict(),
    }))
    return 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "campaign":
            return _cmd_campaign(args)
        if args.command == "hunt":
            return _cmd_hunt(args)
        parser.error(f"unknown command {args.command!r}")
    except LoewnerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


def cli_main(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
