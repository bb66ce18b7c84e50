"""Command line entry point: ``verify``, ``run`` and ``bracket``.

Exit codes: 0 when every check passes, 1 on a check failure, 2 on a
configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import List, Optional

from .config import SCENARIOS, ConfigError, load_config, load_preset
from .geobundle import BundleChart, NotProjectableError, lie_bracket, require_projectable
from .symexpr import ParseError, parse

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write_csv(path: str, header: List[str], rows: List[List[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_verify(args) -> int:
    from .suite import CHECKS, run_suite

    cfg = load_config(args.config) if args.config else load_preset("verify-default")
    if args.n is not None:
        cfg.n = args.n
    if args.k is not None:
        cfg.k = args.k
    if (args.n is not None or args.k is not None) and not args.config:
        cfg.eta = cfg.iota = cfg.gamma = None
    try:
        BundleChart(cfg.n, cfg.k)
        cfg.metric_blocks()
        if cfg.eta is not None and len(cfg.eta) != cfg.n or cfg.iota is not None and len(cfg.iota) != cfg.k:
            raise ConfigError("metric blocks do not match --n/--k")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    checks = [c.strip() for c in args.checks.split(",") if c.strip()] if args.checks else None
    if checks:
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)} (known: {', '.join(CHECKS)})")
    results = run_suite(cfg, checks)
    total = 0.0
    for r in results:
        total += r.seconds
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail} [{r.seconds:.2f}s]")
        if not r.passed and r.residual:
            print(f"     residual: {r.residual}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed (n={cfg.n}, k={cfg.k}, seed={cfg.resolved_seed()}) in {total:.2f}s")
    if args.json:
        report = {"n": cfg.n, "k": cfg.k, "seed": cfg.resolved_seed(), "checks": [r.as_dict() for r in results], "passed": not failed}
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(_dump_json(report))
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_run(args) -> int:
    from .flows import IntegrationError
    from .scenarios import run_scenario

    cfg = load_config(args.config) if args.config else load_preset(args.scenario)
    if cfg.scenario is not None and cfg.scenario != args.scenario:
        raise ConfigError(f"config is for scenario {cfg.scenario!r}, not {args.scenario!r}")
    cfg.scenario = args.scenario
    try:
        result = run_scenario(cfg)
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    summary = _dump_json(result.summary)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_csv(os.path.join(args.out, f"{result.name}.csv"), result.header, result.rows)
        with open(os.path.join(args.out, f"{result.name}.json"), "w", encoding="utf-8") as fh:
            fh.write(summary)
    sys.stdout.write(summary)
    return EXIT_OK if result.passed else EXIT_FAIL


def _parse_field(chart: BundleChart, text: str, name: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != chart.dim:
        raise ConfigError(f"--{name} needs {chart.dim} comma-separated components, got {len(parts)}")
    exprs = []
    for j, p in enumerate(parts):
        try:
            exprs.append(parse(p))
        except ParseError as exc:
            raise ConfigError(f"--{name} component {j + 1}: {exc}") from exc
    for e in exprs:
        try:
            chart.check_expr(e, chart.y_coords)
        except ValueError as exc:
            raise ConfigError(f"--{name}: {exc}") from exc
    return chart.vector_field(exprs)


def cmd_bracket(args) -> int:
    from .multiphase import exact_term_Z, momentum_observable_Z, poisson_Z
    from .vframe import bracket_defect_LVY, momentum_observable_LVY, poisson_LVY

    try:
        chart = BundleChart(args.n, args.k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    xi = _parse_field(chart, args.xi, "xi")
    zeta = _parse_field(chart, args.zeta, "zeta")
    try:
        require_projectable(xi, zeta)
    except NotProjectableError as exc:
        raise ConfigError(str(exc)) from exc
    br = lie_bracket(xi, zeta)
    print(f"[xi, zeta] = {br}")
    if args.space == "Z":
        print(f"J(xi) = {momentum_observable_Z(xi)}")
        print(f"J(zeta) = {momentum_observable_Z(zeta)}")
        print(f"{{J(xi), J(zeta)}} = {poisson_Z(xi, zeta)}")
        print(f"J([xi, zeta]) = {momentum_observable_Z(br)}")
        defect = poisson_Z(xi, zeta) - momentum_observable_Z(br)
        print(f"defect = {defect}")
        print(f"-d(xi_Z ⨼ zeta_Z ⨼ Theta) = {-exact_term_Z(xi, zeta)}")
    else:
        print(f"J(xi) = {momentum_observable_LVY(xi)}")
        print(f"J(zeta) = {momentum_observable_LVY(zeta)}")
        print(f"{{J(xi), J(zeta)}} = {poisson_LVY(xi, zeta)}")
        print(f"J([xi, zeta]) = {momentum_observable_LVY(br)}")
        print(f"defect = {bracket_defect_LVY(xi, zeta)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vertframe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the symbolic identity suite")
    p.add_argument("--config", help="config JSON (version 1)")
    p.add_argument("--checks", help="comma-separated check names")
    p.add_argument("--n", type=int, help="base dimension")
    p.add_argument("--k", type=int, help="fiber dimension")
    p.add_argument("--json", help="write the report as JSON to this path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run a worked scenario and emit CSV/JSON")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--config", help="config JSON (defaults to the bundled preset)")
    p.add_argument("--out", help="directory for <scenario>.csv and <scenario>.json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bracket", help="print momentum observables of two generators and their bracket")
    p.add_argument("--space", choices=("Z", "LVY"), required=True)
    p.add_argument("--xi", required=True, help="n+k comma-separated component expressions")
    p.add_argument("--zeta", required=True, help="n+k comma-separated component expressions")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(func=cmd_bracket)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
