"""Command line interface.

Subcommands:
    bounds    tabulate minimax excess-risk rates to CSV
    run       execute an experiment config and write the report CSV
    sample    draw from an isotropic Gaussian target with the MALA sampler
    localize  output-perturbation release of a ridge minimizer
    params    print derived pipeline parameters for given problem constants
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .erm import LossModel, certify_bounds
from .experiment import emit_diagnostics_csv, emit_report_csv, parse_config, run_experiment
from .geometry import DomainBall
from .localization import output_perturb
from .pipeline import derive_params_gdp, derive_params_pure
from .privacy import PrivacyBudget, stream
from .rates import RateQuery, sweep, write_sweep_csv
from .sampler import MalaSchedule, default_schedule, run_mala
from .data import synthetic_ridge, SyntheticSpec, standardize


def _budget_from_args(args) -> PrivacyBudget:
    if (args.epsilon is None) == (args.mu is None):
        raise SystemExit("exactly one of --epsilon or --mu is required")
    if args.epsilon is not None:
        return PrivacyBudget.pure(args.epsilon)
    return PrivacyBudget.gdp(args.mu)


def _cmd_bounds(args) -> int:
    regimes = [r.strip() for r in args.regimes.split(",") if r.strip()]
    points = [float(p) for p in args.points.split(",") if p.strip()]
    rows = []
    for regime in regimes:
        template = RateQuery(
            regime=regime,
            d=args.d,
            n=points[0] if args.axis == "n" else args.n,
            lipschitz=args.lipschitz,
            strong_convexity=args.alpha,
            epsilon=args.epsilon,
            mu=args.mu,
            delta=args.delta,
        )
        rows.extend(sweep(template, args.axis, points))
    write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rates to {args.out}")
    return 0


def _cmd_run(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    report = run_experiment(cfg)
    emit_report_csv(report, args.out)
    if args.diagnostics:
        emit_diagnostics_csv(report, args.diagnostics)
    failed = sum(r.failures for r in report.rows)
    print(
        f"dataset n={report.n} d={report.d} G={report.certified_lipschitz:.6g} "
        f"cells={len(report.rows)} failed_reps={failed} -> {args.out}"
    )
    return 0 if failed == 0 else 1


def _gaussian_target_model(dim: int, sigma: float) -> LossModel:
    """Zero-feature ridge model whose Gibbs posterior at gamma=1/sigma^2 is
    N(0, sigma^2 I): J(theta) = ||theta||^2 / 2."""
    from .erm import Dataset

    ds = Dataset(features=np.zeros((1, dim)), labels=np.zeros(1))
    return LossModel(dataset=ds, reg_alpha=1.0)


def _cmd_sample(args) -> int:
    model = _gaussian_target_model(args.d, args.sigma)
    gamma = 1.0 / (args.sigma * args.sigma)
    ball = DomainBall(center=np.zeros(args.d), radius=args.ball_radius * args.sigma)
    schedule = MalaSchedule(
        gamma=gamma,
        step_size=args.step_size * args.sigma * args.sigma,
        n_steps=args.steps,
        max_restarts=args.max_restarts,
        init_std=args.sigma,
    )
    rng = stream(args.seed, "cli-sample")
    trace = open(args.trace, "w") if args.trace else None
    if trace:
        trace.write("restart,step,log_target,accepted\n")
    rows = []
    try:
        for i in range(args.samples):
            res = run_mala(model, schedule, ball, rng, trace_file=trace)
            rows.append((i, res.restarts_used, res.mh_acceptance_rate, res.theta))
    finally:
        if trace:
            trace.close()
    with open(args.out, "w") as fh:
        coords = ",".join(f"theta_{k}" for k in range(args.d))
        fh.write(f"sample,restarts,acceptance_rate,{coords}\n")
        for i, restarts, acc, theta in rows:
            coord_s = ",".join(f"{v:.17g}" for v in theta)
            fh.write(f"{i},{restarts},{acc:.17g},{coord_s}\n")
    acc_mean = float(np.mean([r[2] for r in rows]))
    print(f"wrote {len(rows)} samples to {args.out} (mean acceptance {acc_mean:.4f})")
    return 0


def _cmd_localize(args) -> int:
    rng = stream(args.seed, "cli-localize")
    spec = SyntheticSpec(n=args.n, d=args.d, label_noise=args.label_noise)
    ds = standardize(synthetic_ridge(spec, rng))
    model = LossModel(dataset=ds, reg_alpha=args.alpha)
    bounds = certify_bounds(model, args.domain_radius)
    budget = _budget_from_args(args)
    loc = output_perturb(model, bounds, args.tau, budget, rng)
    print(f"sensitivity = {loc.sensitivity:.17g}")
    print("theta_private = " + " ".join(f"{v:.10g}" for v in loc.theta_private))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("coord,theta_private,theta_opt\n")
            for k, (a, b) in enumerate(zip(loc.theta_private, loc.theta_opt)):
                fh.write(f"{k},{a:.17g},{b:.17g}\n")
    return 0


def _cmd_params(args) -> int:
    from .erm import RegularityBounds

    bounds = RegularityBounds(
        lipschitz=args.lipschitz,
        strong_convexity=args.alpha,
        smoothness=args.beta,
        domain_radius=float("inf"),
        domain_center=np.zeros(args.d),
    )
    budget = _budget_from_args(args)
    if budget.kind == "pure":
        params = derive_params_pure(args.n, args.d, bounds, budget.value, args.rho, args.tau)
    else:
        params = derive_params_gdp(args.n, args.d, bounds, budget.value, args.rho, args.tau)
    ball = DomainBall(center=np.zeros(args.d), radius=params.ball_radius)
    schedule = default_schedule(
        bounds, params.gamma, args.n, args.d, ball, params.delta_winf, params.norm,
        k_max=args.k_max,
    )
    print(f"gamma       = {params.gamma:.17g}")
    print(f"ball_radius = {params.ball_radius:.17g}")
    print(f"delta_winf  = {params.delta_winf:.17g}")
    print(f"R1          = {params.inner_radius_req:.17g}")
    print(f"norm        = {params.norm}")
    print(f"step_size   = {schedule.step_size:.17g}")
    print(f"K_used      = {schedule.n_steps}")
    print(f"K_theory    = {schedule.n_steps_theoretical:.6g}")
    print(f"tau_max     = {schedule.max_restarts}")
    print(f"log_xi      = {schedule.log_xi:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dperm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"dperm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="tabulate excess-risk rates")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=float, default=1e4)
    p.add_argument("--lipschitz", "-G", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--axis", choices=("n", "epsilon", "mu", "d"), default="n")
    p.add_argument("--points", required=True, help="comma-separated axis values")
    p.add_argument("--regimes", default="pure", help="comma-separated: pure,gdp,approx")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics", default=None, help="optional extended per-cell CSV")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sample", help="MALA samples from N(0, sigma^2 I)")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.05,
                   help="step size in units of sigma^2")
    p.add_argument("--ball-radius", type=float, default=10.0,
                   help="ball radius in units of sigma")
    p.add_argument("--max-restarts", type=int, default=10)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="per-step trace CSV (debug)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("localize", help="output perturbation on a synthetic ridge")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--label-noise", type=float, default=0.2)
    p.add_argument("--tau", type=float, default=1e-6)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--domain-radius", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_localize)

    p = sub.add_parser("params", help="derived pipeline parameters")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lipschitz", "-G", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--tau", type=float, default=1e-6)
    p.add_argument("--k-max", type=int, default=None)
    p.set_defaults(func=_cmd_params)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
