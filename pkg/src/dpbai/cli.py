"""Command-line interface: oracle / run / sweep / validate subcommands.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from .concentration import report_csv_rows, run_manifest
from .divergences import PrivacyParams
from .harness import (ConfigError, ExperimentConfig, load_config, monte_carlo,
                      parse_instance, sweep_epsilon)
from .oracle import (beta_characteristic_time, characteristic_time,
                     lower_bound_time, regime_boundary)


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--runs", type=int, default=None)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--workers", type=int, default=None)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.runs is not None:
        cfg = replace(cfg, runs=args.runs)
    if args.out is not None:
        cfg = replace(cfg, output_path=args.out)
    if args.eps is not None:
        cfg = replace(cfg, params=replace(cfg.params, eps=args.eps))
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _cmd_oracle(args) -> int:
    instance = parse_instance(args.instance)
    sol = characteristic_time(args.eps, instance)
    print(f"instance means: {instance.means}")
    print(f"T*_eps        : {sol.t_star!r}")
    print(f"w*_eps        : {[round(w, 6) for w in sol.w_star]}")
    print(f"lower bound   : {lower_bound_time(args.eps, instance)!r}")
    per_arm, boundary = regime_boundary(instance)
    print(f"regime eps    : {boundary!r} (per arm {per_arm})")
    if args.beta is not None:
        bsol = beta_characteristic_time(args.eps, instance, args.beta)
        print(f"T*_eps,beta   : {bsol.t_star!r} (beta={args.beta})")
        print(f"w*_eps,beta   : {[round(w, 6) for w in bsol.w_star]}")
    return 0


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    res = monte_carlo(cfg)
    s = res.summary
    print(f"policy={s.policy} eps={s.eps} runs={s.runs} "
          f"mean={s.mean:.1f} std={s.std:.1f} error_rate={s.error_rate:.4f}")
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    results = sweep_epsilon(cfg)
    _, boundary = regime_boundary(cfg.instance)
    print(f"regime boundary eps = {boundary:.4f}")
    for res in results:
        s = res.summary
        print(f"eps={s.eps:<10g} mean={s.mean:>12.1f} std={s.std:>12.1f} "
              f"error_rate={s.error_rate:.4f} oracle_T={s.oracle_t:.1f}")
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    return 0


def _cmd_validate(args) -> int:
    reports = run_manifest(only=args.lemma)
    rows = report_csv_rows(reports)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.lemma_id}: freq={r.frequency:.3e} "
              f"bound={r.bound:.3e} margin={r.bound_margin:.3e}")
    return 0 if all(r.passed for r in reports) else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dpbai",
        description="Fixed-confidence best arm identification under "
                    "epsilon-global differential privacy.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_oracle = sub.add_parser("oracle", help="characteristic time and allocation")
    p_oracle.add_argument("--instance", required=True,
                          help="preset name (mu1..mu6) or comma list of means")
    p_oracle.add_argument("--eps", type=float, required=True)
    p_oracle.add_argument("--beta", type=float, default=None)

    p_run = sub.add_parser("run", help="Monte Carlo batch at one epsilon")
    p_run.add_argument("--config", required=True)
    _add_overrides(p_run)

    p_sweep = sub.add_parser("sweep", help="Monte Carlo batches over eps_grid")
    p_sweep.add_argument("--config", required=True)
    _add_overrides(p_sweep)

    p_val = sub.add_parser("validate", help="concentration bound validation")
    p_val.add_argument("--lemma", default=None,
                       help="substring filter on lemma ids")
    p_val.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except IOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
