"""Batch front end: compute bound sweeps, run coding simulations, certify
derandomized ensembles and run the lemma harnesses, emitting CSV and JSON.

Every output file embeds the semantic invocation (inputs and seed, not
execution knobs like --threads or --out-dir), so identical invocations give
byte-identical files regardless of worker count or output location.  All
randomness descends from the single --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import (
    DeterministicJammer,
    deterministic_jammer_family,
    load_jammers,
    worst_case_search,
)
from .bounds import GridConfig, compute_bound_report
from .coding import (
    CodebookFamily,
    CodingParams,
    SessionConfig,
    sample_typical_sources,
    simulate_session,
)
from .derandomize import build_stochastic_code, certify_ensemble, sample_ensemble
from .errors import AvrsError, ConfigurationError, UsageError
from .lemmas import (
    run_conditional_typicality,
    run_covering,
    run_markov_conclusion,
    run_packing,
    trend_check,
)
from .model import load_policy, load_problem_spec
from .mtypes import SymbolVector, nearest_type
from .probability import CondDistribution
from .rng import derive_seed, philox_stream

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

_HARNESSES = ("cond-typicality", "covering", "packing", "markov")


def _file_fingerprint(path_str: str) -> str:
    """Basename plus content digest: identifies an input file independently
    of where the invocation happened."""
    import hashlib

    p = Path(path_str)
    try:
        digest = hashlib.sha256(p.read_bytes()).hexdigest()[:12]
    except OSError:
        return p.name
    return f"{p.name}:{digest}"


def _metadata(command: str, args: argparse.Namespace, skip: tuple[str, ...]) -> dict:
    semantic = {}
    for k, v in sorted(vars(args).items()):
        if k in skip + ("func", "command", "out_dir", "threads") or v is None:
            continue
        if k in ("spec", "policy") or (k == "jammers" and Path(str(v)).is_file()):
            semantic[k] = _file_fingerprint(str(v))
        else:
            semantic[k] = v
    return {"command": command, "version": __version__, "invocation": semantic}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, meta: dict, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, meta: dict, payload: dict) -> None:
    doc = {"meta": meta, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _parallel_map(fn, items: list, threads: int) -> list:
    """Order-preserving map; thread count never changes the result."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _resolve_jammers(name_or_path: str, spec, config, n: int, seed: int, budget: int):
    if name_or_path == "trivial":
        return [DeterministicJammer((0,) * spec.x_alphabet.size, spec.j_alphabet, "trivial")]
    if name_or_path == "all-deterministic":
        return deterministic_jammer_family(spec)
    if name_or_path == "greedy-search":
        x = sample_typical_sources(spec, n, n ** (-1.0 / 3.0), 1, derive_seed(seed, "search-x"))[0]
        found = worst_case_search(config, x, budget, derive_seed(seed, "search"))
        return [found.jammer]
    return load_jammers(name_or_path, spec)


def _coding_config(args, spec, policy) -> SessionConfig:
    params = CodingParams(
        eps=args.eps,
        delta2=args.delta2,
        gamma=args.gamma,
        f_eps=args.f_eps,
        size_cap=args.cap,
    )
    return SessionConfig(spec, policy, params)


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args: argparse.Namespace) -> int:
    spec = load_problem_spec(args.spec)
    grid = GridConfig(
        coarse_step=args.coarse_step,
        refine_step=args.refine_step,
        refine=not args.no_refine,
    )
    if args.d_grid is not None:
        d_values = [float(v) for v in args.d_grid.split(",") if v.strip() != ""]
    else:
        d_values = None
    report = compute_bound_report(
        spec,
        d_values if d_values is not None else [],
        grid,
        u_size_upper=args.u_upper,
        u_size_lower=args.u_lower,
        game_iterations=args.game_iterations,
    )
    if d_values is None and args.d_points > 0:
        lo, hi = report.d0, report.d1
        fracs = np.linspace(0.3, 0.9, args.d_points)
        d_values = [float(lo + f * (hi - lo)) for f in fracs]
        report = compute_bound_report(
            spec,
            d_values,
            grid,
            u_size_upper=args.u_upper,
            u_size_lower=args.u_lower,
            game_iterations=args.game_iterations,
        )
    meta = _metadata("bounds", args, skip=())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        [p.d, p.r_upper, p.r_lower, p.uncertainty_upper, p.uncertainty_lower]
        for p in report.points
    ]
    _write_csv(
        out / "bounds.csv",
        meta,
        ["D", "R_upper", "R_lower", "uncertainty_upper", "uncertainty_lower"],
        rows,
    )
    payload = {
        "d0": report.d0,
        "d1": report.d1,
        "d0_gap": report.d0_gap,
        "d1_gap": report.d1_gap,
        "points": [
            {
                "d": p.d,
                "feasible": p.feasible,
                "r_upper": p.r_upper,
                "r_lower": p.r_lower,
                "uncertainty_upper": p.uncertainty_upper,
                "uncertainty_lower": p.uncertainty_lower,
                "strategy_upper": p.strategy_upper,
                "strategy_lower": p.strategy_lower,
            }
            for p in report.points
        ],
    }
    _write_json(out / "bounds.json", meta, payload)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = load_problem_spec(args.spec)
    policy = load_policy(args.policy, spec)
    config = _coding_config(args, spec, policy)
    jammers = _resolve_jammers(args.jammers, spec, config, args.n, args.seed, args.search_budget)
    family = CodebookFamily(config)
    cdf = np.cumsum(spec.p_x.mass)
    cdf[-1] = 1.0

    def one(task: tuple[int, int]) -> tuple:
        jam_id, trial = task
        s = derive_seed(args.seed, "trial", jam_id, trial)
        x = SymbolVector(
            spec.x_alphabet,
            np.searchsorted(cdf, philox_stream(s, "x").random(args.n), side="right"),
        )
        rep = simulate_session(x, jammers[jam_id], config, s, family=family)
        return (args.n, jam_id, rep.distortion, rep.e_enc, rep.e_dec1, rep.e_dec2)

    tasks = [(j, t) for j in range(len(jammers)) for t in range(args.trials)]
    rows = _parallel_map(one, tasks, args.threads)

    meta = _metadata("simulate", args, skip=())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "trials.csv",
        meta,
        ["n", "jammer_id", "distortion", "E_enc", "E_dec1", "E_dec2"],
        [list(r) for r in rows],
    )
    summary = []
    for j in range(len(jammers)):
        vals = [r[2] for r in rows if r[1] == j]
        summary.append(
            {
                "jammer_id": j,
                "descriptor": getattr(jammers[j], "descriptor", type(jammers[j]).__name__),
                "trials": len(vals),
                "mean_distortion": float(np.mean(vals)) if vals else None,
                "enc_fallback_rate": float(np.mean([r[3] for r in rows if r[1] == j]))
                if vals
                else None,
            }
        )
    _write_json(out / "simulate.json", meta, {"jammers": summary})
    return EXIT_OK


def cmd_derandomize(args: argparse.Namespace) -> int:
    spec = load_problem_spec(args.spec)
    policy = load_policy(args.policy, spec)
    config = _coding_config(args, spec, policy)
    jammers = _resolve_jammers(args.jammers, spec, config, args.n, args.seed, args.search_budget)
    k = args.K if args.K is not None else args.n * args.n
    ensemble = sample_ensemble(config, args.n, k, master_seed=derive_seed(args.seed, "ensemble"))
    report = certify_ensemble(
        ensemble,
        jammers,
        x_count=args.x_samples,
        trials_per_member=max(args.trials, 1),
        mu=args.mu,
        seed=derive_seed(args.seed, "certify"),
    )
    code = build_stochastic_code(ensemble)
    meta = _metadata("derandomize", args, skip=())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "k": report.k,
        "n": report.n,
        "mu": report.mu,
        "passed": report.passed,
        "max_excess": report.max_excess,
        "note": report.note,
        "rate_overhead": code.rate_overhead,
        "index_bits": code.index_bits,
        "cells": [
            {
                "x_index": c.x_index,
                "jammer_index": c.jammer_index,
                "ensemble_mean": c.ensemble_mean,
                "parent_mean": c.parent_mean,
                "excess": c.excess,
                "std_error": c.std_error,
                "sessions": c.sessions,
            }
            for c in report.cells
        ],
    }
    _write_json(out / "derandomize.json", meta, payload)
    return EXIT_OK


def cmd_lemmas(args: argparse.Namespace) -> int:
    spec = load_problem_spec(args.spec)
    policy = load_policy(args.policy, spec)
    config = _coding_config(args, spec, policy)
    ns = [int(v) for v in args.n_ladder.split(",") if v.strip()]
    selected = set(args.harness) if args.harness else set(_HARNESSES)
    if "all" in selected:
        selected = set(_HARNESSES)
    trivial_jam = DeterministicJammer((0,) * spec.x_alphabet.size, spec.j_alphabet, "trivial")
    p_y = np.einsum("x,xy->y", spec.p_x.mass, spec.w.y_marginal_kernel[:, 0, :])

    rows: list[list] = []

    def run_for_n(n: int) -> list[list]:
        local: list[list] = []
        if args.trials < 1:
            return local
        if "cond-typicality" in selected:
            w_ts = CondDistribution(spec.x_alphabet, spec.y_alphabet, spec.w.y_marginal_kernel[:, 0, :])
            res = run_conditional_typicality(
                spec.p_x, w_ts, n, args.delta0, args.trials, derive_seed(args.seed, "ct", n)
            )
            verdict = "vacuous" if res.vacuous else ("pass" if res.within_bound else "fail")
            local.append([res.name, n, res.empirical, res.bound, res.sigma, verdict])
        if "covering" in selected:
            res = run_covering(
                config, nearest_type(p_y, n), args.trials, derive_seed(args.seed, "cov", n)
            )
            local.append([res.name, n, res.empirical, res.bound, res.sigma, "n/a"])
        if "packing" in selected:
            res = run_packing(config, trivial_jam, n, args.trials, derive_seed(args.seed, "pk", n))
            local.append([res.name, n, res.empirical, res.bound, res.sigma, "n/a"])
        if "markov" in selected:
            res = run_markov_conclusion(
                config, trivial_jam, n, args.delta4, args.trials, derive_seed(args.seed, "mk", n)
            )
            local.append([res.name, n, res.empirical, res.bound, res.sigma, "n/a"])
        return local

    chunks = _parallel_map(run_for_n, ns, args.threads)
    for chunk in chunks:
        rows.extend(chunk)

    # trend summaries over the ladder for the trend-style harnesses
    from .lemmas import HarnessResult

    for name, decreasing in (("covering", False), ("packing", True), ("markov-conclusion", True)):
        series = [r for r in rows if r[0] == name]
        if len(series) >= 2:
            results = [
                HarnessResult(name, r[1], r[2], None, r[4], args.trials, False) for r in series
            ]
            tc = trend_check(results, decreasing=decreasing)
            rows.append(
                [
                    f"{name}-trend",
                    series[-1][1],
                    tc.values[-1] - tc.values[0],
                    None,
                    0.0,
                    "pass" if tc.ok else "fail",
                ]
            )

    meta = _metadata("lemmas", args, skip=())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "lemmas.csv",
        meta,
        ["harness", "n", "empirical", "bound", "sigma", "verdict"],
        rows,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", required=True, help="problem instance JSON file")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads")


def _add_coding(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", required=True, help="auxiliary policy JSON file")
    p.add_argument("--n", type=int, required=True, help="blocklength")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--delta2", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--f-eps", dest="f_eps", type=float, default=None)
    p.add_argument("--cap", type=int, default=4096, help="codebook size cap")
    p.add_argument(
        "--jammers",
        default="trivial",
        help="jammer file or builtin: trivial | all-deterministic | greedy-search",
    )
    p.add_argument("--search-budget", type=int, default=60)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avrs",
        description="Minimax rate-distortion bounds and coding simulation "
        "for jammed remote sources",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="compute the distortion floors and rate bounds")
    _add_common(p)
    p.add_argument("--d-grid", default=None, help="comma-separated distortion levels")
    p.add_argument("--d-points", type=int, default=5, help="auto grid size when --d-grid absent")
    p.add_argument("--coarse-step", type=float, default=0.05)
    p.add_argument("--refine-step", type=float, default=0.005)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--u-upper", type=int, default=None)
    p.add_argument("--u-lower", type=int, default=None)
    p.add_argument("--game-iterations", type=int, default=8000)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="run coding sessions against jammers")
    _add_common(p)
    _add_coding(p)
    p.add_argument("--trials", type=int, default=100, help="sessions per jammer")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("derandomize", help="sample and certify a code ensemble")
    _add_common(p)
    _add_coding(p)
    p.add_argument("--K", type=int, default=None, help="ensemble size (default n^2)")
    p.add_argument("--mu", type=float, default=0.02)
    p.add_argument("--trials", type=int, default=1, help="sessions per ensemble member")
    p.add_argument("--x-samples", type=int, default=2)
    p.set_defaults(func=cmd_derandomize)

    p = sub.add_parser("lemmas", help="run the statistical lemma harnesses")
    _add_common(p)
    _add_coding(p)
    p.add_argument("--harness", action="append", choices=_HARNESSES + ("all",))
    p.add_argument("--n-ladder", default="8,16,32")
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--delta0", type=float, default=0.1)
    p.add_argument("--delta4", type=float, default=0.35)
    p.set_defaults(func=cmd_lemmas)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AvrsError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
