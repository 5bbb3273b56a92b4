"""Command-line entry point.

Subcommands:
  simulate   run a TOML-configured scenario and write the CSV trace
  paper-sim  run the built-in reference scenario
  certify    print the Lyapunov certificate for a config's gains/references
  project    reconstruct the attitude from a pair of vector estimates
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import lyapunov, scenario
from .reconstruct import ReferenceBasis, project_polar, reconstruct_tilde


def _load_config(path: str) -> scenario.ScenarioConfig:
    with open(path, "r", encoding="utf-8") as f:
        return scenario.parse_config(f.read())


def _parse_vec(text: str, name: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--{name} expects 'x,y,z'")
    return np.array([float(p) for p in parts])


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    result = scenario.run_scenario(cfg)
    if args.out:
        scenario.write_csv(result, args.out)
    print(json.dumps(result.summary, indent=2))
    return 0


def _cmd_paper_sim(args) -> int:
    result = scenario.run_scenario(scenario.paper_scenario(seed=args.seed))
    if args.out:
        scenario.write_csv(result, args.out)
    print(json.dumps(result.summary, indent=2))
    return 0


def _cmd_certify(args) -> int:
    cfg = _load_config(args.config)
    c_omega = cfg.c_omega if cfg.c_omega is not None else 1.0
    params = lyapunov.find_certificate(c_omega, cfg.gains, cfg.alpha_i, cfg.beta_i)
    coeffs = lyapunov.strictness_coefficients(params, cfg.gains, cfg.alpha_i, cfg.beta_i)
    print(f"c_omega = {params.c_omega:.6g}")
    print(f"mu      = {params.mu:.10g}")
    print(f"epsilon = {params.epsilon:.10g}")
    print(f"sigma1  = {params.sigma1:.10g}")
    print(f"sigma2  = {params.sigma2:.10g}")
    for name, value in coeffs.as_dict().items():
        print(f"{name:20s} = {value:.10g}")
    print("certificate valid" if coeffs.all_positive else "certificate INVALID")
    return 0 if coeffs.all_positive else 3


def _cmd_project(args) -> int:
    cfg = _load_config(args.config)
    basis = ReferenceBasis.from_references(cfg.alpha_i, cfg.beta_i)
    alpha_hat = _parse_vec(args.alpha, "alpha")
    beta_hat = _parse_vec(args.beta, "beta")
    R_tilde = reconstruct_tilde(alpha_hat, beta_hat, basis)
    rec = project_polar(R_tilde, alpha_hat, beta_hat, basis)
    np.set_printoptions(precision=12, suppress=False)
    print("R_tilde =")
    print(R_tilde)
    print("R_hat =")
    print(rec.R_hat)
    print(f"degenerate_flag = {rec.degenerate_flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attobs",
        description="Attitude and gyro-bias observer simulator and certifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured scenario")
    p.add_argument("--config", required=True, help="TOML scenario file")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", default=None, help="CSV trace output path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("paper-sim", help="run the built-in reference scenario")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="CSV trace output path")
    p.set_defaults(func=_cmd_paper_sim)

    p = sub.add_parser("certify", help="print the Lyapunov certificate")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("project", help="reconstruct attitude from estimates")
    p.add_argument("--alpha", required=True, help="alpha_hat as 'x,y,z'")
    p.add_argument("--beta", required=True, help="beta_hat as 'x,y,z'")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_project)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (scenario.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
