"""Command-line interface: ``estimate``, ``simulate`` and ``check``.

Exit codes: 0 success/converged, 1 usage or I/O error, 2 not converged,
3 degenerate or diverged run. Partial artifacts are kept on failure so
traces can be inspected.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .graph import AttributeTable, Graph
from .changestats import full_statistics
from .model import EDGE, ModelSpec, parse_model
from .sampler import (
    BasicProposal,
    IfdProposal,
    RngStream,
    SimulationConfig,
    derive_seed,
    simulate,
)
from .estimator import (
    DegeneracyError,
    EEConfig,
    EstimationDivergedError,
    calibrate_gains,
    cd1_initialize,
    ee_estimate,
    post_estimation_check,
    random_graph,
    refine_gains,
    standard_errors,
)
from .io import (
    AttributeData,
    load_attributes,
    load_edge_list,
    save_edge_list,
    write_estimates,
    write_manifest,
    write_node_map,
    write_statistics_csv,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_DEGENERATE = 3


def _out_dir(args) -> Path:
    out = os.environ.get("ERGMEE_OUT_DIR") or args.out
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _threads(args) -> int:
    env = os.environ.get("ERGMEE_THREADS")
    return int(env) if env else args.threads


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _proposal(args, target_edges: int):
    if args.proposal == "basic":
        return BasicProposal()
    return IfdProposal(target_edges, aux_step=args.ifd_aux_step)


def _load_model_inputs(args) -> tuple[ModelSpec, Graph, list[str], AttributeTable | None]:
    data = load_edge_list(args.edges)
    if data.duplicates_dropped or data.self_loops_dropped:
        print(
            f"ingestion: dropped {data.duplicates_dropped} duplicate edges, "
            f"{data.self_loops_dropped} self-loops",
            file=sys.stderr,
        )
    spec = parse_model(args.model)
    attrs = None
    if args.attrs:
        attrs = load_attributes(args.attrs).bind(data.labels)
    spec.validate_attributes(attrs)
    return spec, data.graph, data.labels, attrs


# -- estimate ----------------------------------------------------------------


def _estimate_one(
    spec: ModelSpec,
    attrs: AttributeTable | None,
    x_obs: Graph,
    args,
    seed: int,
    out: Path,
) -> dict:
    """One full estimation run; returns a manifest fragment."""
    t_start = time.perf_counter()
    rng_cd = RngStream(derive_seed(seed, "cd1"))
    rng_cal = RngStream(derive_seed(seed, "calibrate"))
    rng_ee = RngStream(derive_seed(seed, "ee"))

    status = "converged"
    exit_code = EXIT_OK
    if args.theta0:
        theta0 = np.array([float(v) for v in args.theta0.split(",")])
        if theta0.shape != (spec.n_terms,):
            raise ValueError(f"--theta0 needs {spec.n_terms} comma-separated values")
    else:
        theta0 = cd1_initialize(spec, attrs, x_obs.copy(), args.cd1_steps, rng_cd)
    gains = calibrate_gains(
        spec, attrs, x_obs, theta0, args.pilot_steps, rng_cal, gain_scale=args.gain_scale
    )
    proposal = _proposal(args, x_obs.edge_count)
    gains = refine_gains(
        spec,
        attrs,
        x_obs,
        theta0,
        gains,
        rng_cal,
        kind=proposal,
        inner_steps=args.inner_steps,
        target_step=args.target_step,
    )
    cfg = EEConfig(
        outer_steps=args.outer_steps,
        inner_steps=args.inner_steps,
        gain_scale=args.gain_scale,
        gain_decay=args.gain_decay,
        gain_decay_trigger=args.gain_decay_trigger,
        burn_in_fraction=args.burn_in_fraction,
        seed=seed,
        stop_when_converged=args.stop_when_converged,
        compute_se=not args.no_se,
    )
    trace = None
    report = None
    try:
        trace, report = ee_estimate(
            spec, attrs, x_obs, theta0, gains, cfg, kind=proposal, rng=rng_ee
        )
        if not report.convergence.converged:
            status = "not_converged"
            exit_code = EXIT_NOT_CONVERGED
    except (DegeneracyError, EstimationDivergedError) as exc:
        status = f"degenerate: {exc}"
        exit_code = EXIT_DEGENERATE
        trace = exc.trace

    if trace is not None:
        write_trace_csv(out / "trace.csv", trace)
    if report is not None:
        write_estimates(
            out / "estimates.json",
            out / "estimates.txt",
            report,
            extra={
                "model": args.model,
                "seed": seed,
                "theta0": [float(v) for v in theta0],
            },
        )
    return {
        "status": status,
        "exit_code": exit_code,
        "seed": seed,
        "theta0": [float(v) for v in theta0],
        "gains": [float(v) for v in gains.values],
        "near_degenerate_terms": list(gains.near_degenerate),
        "wall_time_s": round(time.perf_counter() - t_start, 3),
        "outer_steps_run": 0 if trace is None else trace.n_steps,
    }


def cmd_estimate(args) -> int:
    spec, x_obs, labels, attrs = _load_model_inputs(args)
    out = _out_dir(args)
    write_node_map(out / "nodes.tsv", labels)

    cfg_echo = {
        "command": "estimate",
        "edges": str(args.edges),
        "attrs": str(args.attrs) if args.attrs else None,
        "model": args.model,
        "outer_steps": args.outer_steps,
        "inner_steps": args.inner_steps,
        "cd1_steps": args.cd1_steps,
        "pilot_steps": args.pilot_steps,
        "gain_scale": args.gain_scale,
        "gain_decay": args.gain_decay,
        "gain_decay_trigger": args.gain_decay_trigger,
        "burn_in_fraction": args.burn_in_fraction,
        "target_step": args.target_step,
        "proposal": args.proposal,
        "seed": args.seed,
        "replicates": args.replicates,
    }
    t0 = time.perf_counter()
    results = []
    if args.replicates == 1:
        results.append(_estimate_one(spec, attrs, x_obs, args, args.seed, out))
    else:
        reps = list(range(args.replicates))
        dirs = []
        for r in reps:
            rep_dir = out / f"rep_{r:03d}"
            rep_dir.mkdir(exist_ok=True)
            dirs.append(rep_dir)
        workers = max(1, _threads(args))

        def job(r: int) -> dict:
            seed_r = derive_seed(args.seed, f"rep{r}")
            return _estimate_one(spec, attrs, x_obs.copy(), args, seed_r, dirs[r])

        if workers == 1:
            results = [job(r) for r in reps]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, reps))

    exit_code = max(r["exit_code"] for r in results)
    manifest = {
        "version": __version__,
        "config": cfg_echo,
        "config_hash": _config_hash(cfg_echo),
        "graph": {
            "n": x_obs.n,
            "edges": x_obs.edge_count,
            "density": x_obs.density(),
        },
        "runs": results,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "exit_code": exit_code,
    }
    write_manifest(out / "manifest.json", manifest)
    for r in results:
        print(f"run seed={r['seed']}: {r['status']} ({r['wall_time_s']}s)")
    return exit_code


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    spec = parse_model(args.model)
    theta = np.array([float(v) for v in args.theta.split(",")])
    if theta.shape != (spec.n_terms,):
        raise ValueError(
            f"--theta needs {spec.n_terms} comma-separated values for model {args.model!r}"
        )
    attrs = None
    if any(t.attribute for t in spec.terms):
        raise ValueError("simulate does not support attribute terms without --attrs input")
    out = _out_dir(args)
    rng = RngStream(derive_seed(args.seed, "sim-start"))
    g0 = random_graph(args.n, args.start_density, rng)
    kind = _proposal(args, max(1, g0.edge_count))

    # one continuous chain; every emitted network gets its statistics row,
    # so the CSV recomputes exactly from the written edge lists
    nets_dir = out / "networks"
    nets_dir.mkdir(exist_ok=True)
    g = g0
    written = []
    stats = []
    accepted_steps = 0.0
    total_steps = 0
    degenerate = False
    seed_chain = derive_seed(args.seed, "sim")
    for s in range(args.samples):
        steps = args.burn_in + args.sample_interval if s == 0 else args.sample_interval
        cfg_s = SimulationConfig(
            steps=steps, burn_in=0, sample_interval=steps,
            seed=derive_seed(seed_chain, str(s)),
        )
        res_s = simulate(spec, attrs, theta, g, cfg_s, kind)
        g = res_s.final_graph
        degenerate = degenerate or res_s.degenerate
        accepted_steps += res_s.acceptance_rate * steps
        total_steps += steps
        path = nets_dir / f"sample_{s:03d}.edges"
        save_edge_list(path, g)
        written.append(str(path.name))
        stats.append(full_statistics(g, attrs, spec))

    samples = np.array(stats)
    write_statistics_csv(out / "statistics.csv", spec.labels, samples)
    manifest = {
        "version": __version__,
        "config": {
            "command": "simulate",
            "model": args.model,
            "theta": [float(v) for v in theta],
            "n": args.n,
            "samples": args.samples,
            "burn_in": args.burn_in,
            "sample_interval": args.sample_interval,
            "proposal": args.proposal,
            "seed": args.seed,
        },
        "networks": written,
        "acceptance_rate": accepted_steps / max(total_steps, 1),
        "degenerate": degenerate,
        "statistic_means": [float(v) for v in samples.mean(axis=0)],
    }
    manifest["config_hash"] = _config_hash(manifest["config"])
    write_manifest(out / "manifest.json", manifest)
    print(f"wrote {len(written)} networks with statistics to {out}")
    return EXIT_DEGENERATE if degenerate else EXIT_OK


# -- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    est_path = Path(args.estimates)
    if not est_path.exists():
        raise FileNotFoundError(f"estimates file not found: {est_path}")
    payload = json.loads(est_path.read_text())
    terms = payload["terms"]
    model = payload.get("model")
    if model is None:
        raise ValueError(f"{est_path}: missing 'model' entry")
    spec = parse_model(model)
    theta = np.array([row["theta"] for row in terms])

    data = load_edge_list(args.edges)
    attrs = load_attributes(args.attrs).bind(data.labels) if args.attrs else None
    spec.validate_attributes(attrs)
    z_obs = full_statistics(data.graph, attrs, spec)

    steps = args.steps
    cfg = SimulationConfig(
        steps=steps,
        burn_in=steps // 4,
        sample_interval=args.sample_interval,
        seed=derive_seed(args.seed, "check"),
    )
    t = post_estimation_check(
        spec, attrs, theta, z_obs, data.graph.n, cfg, RngStream(args.seed)
    )
    ok = np.abs(t) < args.t_threshold
    for name, value, good in zip(spec.labels, t, ok):
        print(f"{name:<24} t={value:+.4f}  {'ok' if good else 'FAIL'}")
    out = _out_dir(args)
    write_manifest(
        out / "check.json",
        {
            "version": __version__,
            "estimates": str(est_path),
            "t_statistics": {n: float(v) for n, v in zip(spec.labels, t)},
            "threshold": args.t_threshold,
            "passed": bool(ok.all()),
        },
    )
    return EXIT_OK if ok.all() else EXIT_NOT_CONVERGED


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergmee",
        description="ERGM parameter estimation on undirected networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="ergmee_out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--proposal", choices=["basic", "ifd"], default="basic",
            help="Metropolis-Hastings proposal kind",
        )
        p.add_argument("--ifd-aux-step", type=float, default=1e-3)

    est = sub.add_parser("estimate", help="estimate parameters from an edge list")
    est.add_argument("--edges", required=True)
    est.add_argument("--attrs", default=None)
    est.add_argument("--model", required=True, help='e.g. "edge,altstar(2),alttriangle(2)"')
    est.add_argument("--outer-steps", type=int, default=4000)
    est.add_argument("--inner-steps", type=int, default=1000)
    est.add_argument("--cd1-steps", type=int, default=200_000)
    est.add_argument("--pilot-steps", type=int, default=10_000)
    est.add_argument("--gain-scale", type=float, default=1e-4)
    est.add_argument("--gain-decay", type=float, default=0.1)
    est.add_argument("--gain-decay-trigger", type=float, default=0.5)
    est.add_argument("--burn-in-fraction", type=float, default=0.5)
    est.add_argument("--target-step", type=float, default=0.02)
    est.add_argument("--stop-when-converged", action="store_true")
    est.add_argument(
        "--theta0", default=None,
        help="comma-separated starting parameters (skips the seed phase)",
    )
    est.add_argument("--no-se", action="store_true", help="skip standard errors")
    est.add_argument("--replicates", type=int, default=1)
    est.add_argument("--threads", type=int, default=1)
    common(est)
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="generate networks from given parameters")
    sim.add_argument("--model", required=True)
    sim.add_argument("--theta", required=True, help="comma-separated parameter values")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--samples", type=int, default=10)
    sim.add_argument("--burn-in", type=int, default=100_000)
    sim.add_argument("--sample-interval", type=int, default=10_000)
    sim.add_argument("--start-density", type=float, default=0.005)
    common(sim)
    sim.set_defaults(func=cmd_simulate)

    chk = sub.add_parser("check", help="independent moment check of an estimates file")
    chk.add_argument("--estimates", required=True)
    chk.add_argument("--edges", required=True)
    chk.add_argument("--attrs", default=None)
    chk.add_argument("--steps", type=int, default=500_000)
    chk.add_argument("--sample-interval", type=int, default=500)
    chk.add_argument("--t-threshold", type=float, default=0.3)
    common(chk)
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
