"""Command line front end.

    codiffuse run|sweep|analyze|meanfield|graph-dump --config PATH [--seed N]
              [--workers N] [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 runtime error. Progress goes to
stderr; data goes to files under --out. Worker count resolves as
--workers, then $CODIFFUSE_WORKERS, then the cpu count.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import SweepSpec, enumerate_parameter_sets, load_spec, run_config_for
from .engine import frozen_graph, stream, GRAPH_STREAM, build_graph
from .errors import AnalysisError, ConfigurationError, GraphGenerationError, IntegrationError
from .kernel import DormancyParams, KernelParams
from .meanfield import MeanFieldParams, MeanFieldState, integrate, write_trajectory
from .sweep import analyze, run_single, sweep
from .topology import write_edgelist


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codiffuse",
                                     description="Two-contagion multiplex diffusion simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "one parameter set, full per-iteration series"),
        ("sweep", "the whole parameter cube"),
        ("analyze", "recompute statistics from a sweep's stored series"),
        ("meanfield", "well-mixed ODE trajectory for one parameter set"),
        ("graph-dump", "write both layers as edge lists"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--workers", type=int, help="worker process count")
        p.add_argument("--out", default="results", help="output directory (default: results)")
    return parser


def _load(args: argparse.Namespace) -> SweepSpec:
    spec = load_spec(args.config) if args.config else SweepSpec()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {args.seed}")
        spec.seed = args.seed
    return spec


def _workers(args: argparse.Namespace) -> int:
    if args.workers is not None:
        value = args.workers
    elif os.environ.get("CODIFFUSE_WORKERS"):
        try:
            value = int(os.environ["CODIFFUSE_WORKERS"])
        except ValueError as exc:
            raise ConfigurationError(f"CODIFFUSE_WORKERS must be an integer: {exc}") from exc
    else:
        value = os.cpu_count() or 1
    if value < 1:
        raise ConfigurationError(f"worker count must be >= 1, got {value}")
    return value


def _cmd_run(args: argparse.Namespace) -> int:
    spec = _load(args)
    run_single(spec, args.out, workers=_workers(args))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _load(args)
    manifest = sweep(spec, args.out, workers=_workers(args))
    if manifest["failures"]:
        print(f"{len(manifest['failures'])} parameter set(s) failed; see manifest.json",
              file=sys.stderr)
        return 3
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    analyze(args.out)
    return 0


def _cmd_meanfield(args: argparse.Namespace) -> int:
    spec = _load(args)
    sets = enumerate_parameter_sets(spec)
    if len(sets) != 1:
        raise ConfigurationError(
            f"meanfield wants a single parameter set, config enumerates {len(sets)}")
    _, alpha, tau_a, tau_b = sets[0]
    params = MeanFieldParams(
        kernel=KernelParams(alpha=alpha, k_a=spec.k_a, k_b=spec.k_b,
                            mode=spec.adoption, threshold_mode=spec.thresholds),
        dormancy=DormancyParams(tau_a=tau_a, tau_b=tau_b),
        kappa=spec.mf_kappa, h=spec.mf_h, horizon=spec.mf_horizon)
    n = spec.side * spec.side
    x0 = spec.seeds_per_contagion / n
    initial = MeanFieldState(x_a=x0, x_b=x0, x_ab=0.0, x_naive=1.0 - 2 * x0, x_r=0.0)
    traj = integrate(initial, params)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "meanfield.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trajectory(traj, fh)
    print(f"wrote {path} (kappa={params.kappa} carried, unused)", file=sys.stderr)
    return 0


def _cmd_graph_dump(args: argparse.Namespace) -> int:
    spec = _load(args)
    cfg = run_config_for(spec, 0, spec.alphas[0], spec.tau_a[0], spec.tau_b[0])
    if cfg.freeze_rrg or cfg.graph_mode == "single":
        graph = frozen_graph(cfg)
    else:
        rng = stream(cfg.master_seed, 0, GRAPH_STREAM, 0)
        graph = build_graph(cfg, rng, stream_label=f"({cfg.master_seed},0,graph)")
    os.makedirs(args.out, exist_ok=True)
    for layer, label in ((graph.layer_a, "A"), (graph.layer_b, "B")):
        path = os.path.join(args.out, f"layer_{label}.edgelist")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            write_edgelist(layer, label, fh)
        print(f"wrote {path}", file=sys.stderr)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "meanfield": _cmd_meanfield,
    "graph-dump": _cmd_graph_dump,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AnalysisError, GraphGenerationError, IntegrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
