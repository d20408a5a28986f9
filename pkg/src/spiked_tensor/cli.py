"""Command-line front end.

Subcommands emit CSV (default) or JSON tables:

* ``thresholds`` - per-d lower/upper bounds, the noise injective-norm limit,
  optional replica predictions and asymptotics (phase-diagram curve data);
* ``ratefn``     - (t, f(t)) tables, optionally with exact finite-n tails;
* ``replica``    - fixed-point branch tables or per-d threshold pairs;
* ``simulate``   - seeded Monte Carlo runs: detect | recover | tails |
  norms | bbp.

Every command is deterministic given its flags and seed; output ordering is
fixed, so runs with different ``--threads`` are byte-identical.  Exit codes
report execution health only (0 = completed), never statistical outcomes.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import montecarlo, replica, thresholds
from .montecarlo import ExperimentConfig, PowerIterationSettings
from .output import OutputSpec, write_table
from .parallel import parallel_map, resolve_threads
from .rates import exact_overlap_tail, rate_function_for, EXACT_TAIL_MAX_N
from .rng import RngSeed
from .tensors import SpikePrior, sample_spiked, sample_wigner


def _parse_d_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [int(text)]
    if not values or values[0] < 2 or values[-1] > 10**6:
        raise ValueError(f"d range {text!r} outside 2..10^6")
    return values


def _parse_lambda_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _prior_from_args(parser: argparse.ArgumentParser, args) -> SpikePrior:
    if args.prior is None:
        parser.error("--prior is required for this command")
    if args.prior == "spherical":
        return SpikePrior.spherical()
    if args.prior == "rademacher":
        return SpikePrior.rademacher()
    if args.rho is None:
        parser.error("--prior sparse requires --rho")
    return SpikePrior.sparse(args.rho)


def _output_spec(args) -> OutputSpec:
    return OutputSpec(format=args.format, path=args.out, precision=args.precision)


def _add_common(p: argparse.ArgumentParser, *, prior_required: bool = True) -> None:
    p.add_argument(
        "--prior",
        choices=["spherical", "rademacher", "sparse"],
        required=prior_required,
        default=None,
    )
    p.add_argument("--rho", type=float, default=None, help="sparsity for --prior sparse")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--precision", type=int, default=9)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiked-tensor",
        description="Phase-transition bounds and Monte Carlo checks for spiked Gaussian tensors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="per-d threshold bound table")
    _add_common(p)
    p.add_argument("--d", required=True, help="single order or range a..b")
    p.add_argument("--replica", action="store_true", help="add the replica prediction column")
    p.add_argument("--asymptotics", action="store_true", help="add asymptotic columns")

    p = sub.add_parser("ratefn", help="(t, f(t)) table for a prior")
    _add_common(p)
    p.add_argument("--grid", type=int, default=100, help="number of t points (>= 2)")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--n", type=int, default=None, help="add exact finite-n tail columns")

    p = sub.add_parser("replica", help="replica fixed points / thresholds")
    _add_common(p)
    p.add_argument("--d", required=True, help="single order or range a..b")
    p.add_argument("--lambda", dest="snr", default=None, help="snr value or comma list")
    p.add_argument("--thresholds", action="store_true", help="emit (lambda1, lambda2) per d")

    p = sub.add_parser("simulate", help="seeded Monte Carlo experiments")
    p.add_argument("subkind", choices=["detect", "recover", "tails", "norms", "bbp"])
    _add_common(p, prior_required=False)  # bbp needs no prior; others check at dispatch
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--d", type=str, default="3")
    p.add_argument("--lambda", dest="snr", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--test", choices=list(montecarlo.TESTS), default="mle")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--tgrid", default=None, help="comma list of t values (tails)")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--records", default=None, help="write per-trial CSV to this path")
    return parser


def cmd_thresholds(parser, args) -> int:
    prior = _prior_from_args(parser, args)
    ds = _parse_d_range(args.d)
    threads = resolve_threads(args.threads)
    reports = parallel_map(
        lambda d: thresholds.threshold_report(prior, d, include_replica=args.replica),
        ds,
        threads,
    )
    columns = ["d", "lambda_lower", "lambda_upper", "mu_d"]
    if args.replica:
        columns.append("replica")
    if args.asymptotics:
        columns += ["asymptotic_lower", "asymptotic_upper"]
    rows = []
    for rep in reports:
        row = {
            "d": rep.d,
            "lambda_lower": rep.lambda_lower,
            "lambda_upper": rep.lambda_upper,
            "mu_d": rep.mu_d if rep.mu_d is not None else math.nan,
            "replica": rep.replica_prediction if rep.replica_prediction is not None else math.nan,
            "asymptotic_lower": rep.asymptotic_lower if rep.asymptotic_lower is not None else math.nan,
            "asymptotic_upper": rep.asymptotic_upper if rep.asymptotic_upper is not None else math.nan,
        }
        rows.append(row)
    write_table(columns, rows, _output_spec(args), {"command": "thresholds", "prior": prior.label()})
    return 0


def cmd_ratefn(parser, args) -> int:
    prior = _prior_from_args(parser, args)
    if args.grid < 2:
        parser.error("--grid must be >= 2")
    rate = rate_function_for(prior)
    tmax = args.tmax
    if tmax is None:
        tmax = 1.0 - 1e-9 if prior.kind == "spherical" else 1.0
    ts = np.linspace(0.0, tmax, args.grid)
    columns = ["t", "rate"]
    if args.n is not None:
        if prior.is_discrete and args.n > EXACT_TAIL_MAX_N:
            parser.error(f"--n exceeds the exact-combinatorics cap {EXACT_TAIL_MAX_N}")
        columns += ["exact_tail", "exact_rate"]
    rows = []
    for t in ts:
        row = {"t": float(t), "rate": rate.eval(float(t))}
        if args.n is not None:
            tail = exact_overlap_tail(prior, args.n, float(t))
            row["exact_tail"] = tail
            row["exact_rate"] = -math.log(tail) / args.n if tail > 0 else math.inf
        rows.append(row)
    write_table(columns, rows, _output_spec(args), {"command": "ratefn", "prior": prior.label()})
    return 0


def cmd_replica(parser, args) -> int:
    prior = _prior_from_args(parser, args)
    if prior.kind == "sparse_rademacher":
        parser.error("replica solvers cover the spherical and rademacher priors only")
    ds = _parse_d_range(args.d)
    threads = resolve_threads(args.threads)
    spec = _output_spec(args)
    if args.thresholds:
        def one(d: int):
            if prior.kind == "rademacher":
                l1, l2 = replica.rademacher_replica_thresholds(d)
            else:
                l1 = replica.spherical_appearance_snr(d)
                l2 = replica.spherical_replica_threshold(d) if d >= 3 else 1.0
            return {"d": d, "lambda1": l1, "lambda2": l2}

        rows = parallel_map(one, ds, threads)
        write_table(
            ["d", "lambda1", "lambda2"], rows, spec,
            {"command": "replica_thresholds", "prior": prior.label()},
        )
        return 0
    if args.snr is None:
        parser.error("replica branch tables require --lambda (or use --thresholds)")
    if len(ds) != 1:
        parser.error("branch tables take a single --d")
    d = ds[0]
    rows = []
    for snr in _parse_lambda_list(args.snr):
        sols = (
            replica.rademacher_fixed_points(d, snr)
            if prior.kind == "rademacher"
            else replica.spherical_fixed_points(d, snr)
        )
        for s in sols:
            rows.append(
                {
                    "lambda": snr,
                    "branch": s.branch,
                    "q": s.q,
                    "mu": s.mu,
                    "free_energy": s.free_energy,
                    "residual": s.residual,
                }
            )
    write_table(
        ["lambda", "branch", "q", "mu", "free_energy", "residual"], rows, spec,
        {"command": "replica", "prior": prior.label(), "d": d},
    )
    return 0


def _write_records(path: str, result, precision: int) -> None:
    rows = [
        {
            "trial": r.trial,
            "arm": r.arm,
            "statistic": r.statistic,
            "decision": r.decision,
            "overlap": r.overlap,
        }
        for r in result.records
    ]
    write_table(
        ["trial", "arm", "statistic", "decision", "overlap"],
        rows,
        OutputSpec(format="csv", path=path, precision=precision),
    )


def cmd_simulate(parser, args) -> int:
    threads = resolve_threads(args.threads)
    seed = RngSeed(args.seed)
    spec = _output_spec(args)
    settings = PowerIterationSettings(args.restarts, args.max_iters, args.tol)

    if args.subkind == "bbp":
        summary = montecarlo.bbp_reference_experiment(
            args.n, args.snr, args.trials, seed, settings, threads
        )
        row = {
            "n": summary.n,
            "lambda": summary.snr,
            "trials": summary.trials,
            "mean_top_eigenvalue": summary.mean_top_eigenvalue,
            "predicted_top_eigenvalue": summary.predicted_top_eigenvalue,
            "mean_alignment_sq": summary.mean_alignment_sq,
            "predicted_alignment_sq": summary.predicted_alignment_sq,
        }
        write_table(list(row), [row], spec, {"command": "simulate_bbp"})
        return 0

    prior = _prior_from_args(parser, args)
    d = _parse_d_range(args.d)[0]

    if args.subkind == "tails":
        t_grid = (
            _parse_lambda_list(args.tgrid)
            if args.tgrid
            else [round(0.05 * i, 2) for i in range(13)]
        )
        rows_out = montecarlo.overlap_tail_experiment(
            prior, args.n, args.trials, t_grid, seed, threads
        )
        rows = [
            {
                "t": r.t,
                "empirical_tail": r.empirical_tail,
                "empirical_rate": r.empirical_rate,
                "rate_value": r.rate_value,
                "exact_tail": r.exact_tail if r.exact_tail is not None else math.nan,
                "exact_rate": r.exact_rate if r.exact_rate is not None else math.nan,
            }
            for r in rows_out
        ]
        write_table(
            ["t", "empirical_tail", "empirical_rate", "rate_value", "exact_tail", "exact_rate"],
            rows, spec, {"command": "simulate_tails", "prior": prior.label(), "n": args.n},
        )
        return 0

    if args.subkind == "norms":
        def one(k: int):
            trial_seed = seed.offset(2 + k)
            if args.snr > 0:
                x, tensor = sample_spiked(prior, args.n, d, args.snr, trial_seed)
                est = montecarlo.injective_norm_estimate(tensor, settings, trial_seed, spike_start=x)
            else:
                tensor = sample_wigner(args.n, d, trial_seed)
                est = montecarlo.injective_norm_estimate(tensor, settings, trial_seed)
            return {"trial": k, "estimate": est.value, "converged": est.converged}

        rows = parallel_map(one, range(args.trials), threads)
        write_table(
            ["trial", "estimate", "converged"], rows, spec,
            {"command": "simulate_norms", "prior": prior.label(), "n": args.n, "d": d},
        )
        return 0

    try:
        config = ExperimentConfig(
            prior=prior, n=args.n, d=d, snr=args.snr, trials=args.trials,
            seed=seed, test=args.test, epsilon=args.epsilon, power_iter=settings,
        )
    except montecarlo.SupportTooLargeError as exc:
        parser.error(str(exc))

    if args.subkind == "detect":
        result = montecarlo.detection_experiment(config, threads)
        row = {
            "test": args.test, "n": args.n, "d": d, "lambda": args.snr,
            "trials": args.trials, "epsilon": config.threshold_margin,
            "threshold": result.threshold, "accuracy": result.accuracy,
            "type_i_rate": result.type_i_rate, "type_ii_rate": result.type_ii_rate,
            "mean_abs_overlap": result.mean_abs_overlap,
        }
    else:
        result = montecarlo.recovery_experiment(config, threads)
        row = {
            "test": args.test, "n": args.n, "d": d, "lambda": args.snr,
            "trials": args.trials,
            "mean_abs_overlap": result.mean_abs_overlap,
            "mean_overlap_pow_d": result.mean_overlap_pow_d,
        }
    write_table(list(row), [row], spec, {"command": f"simulate_{args.subkind}"})
    if args.records:
        _write_records(args.records, result, args.precision)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    dispatch = {
        "thresholds": cmd_thresholds,
        "ratefn": cmd_ratefn,
        "replica": cmd_replica,
        "simulate": cmd_simulate,
    }
    try:
        return dispatch[args.command](parser, args)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
