"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 numerical/solver failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .design_fd import design_robust_graph, select_leader
from .design_fj import (
    ROUNDING_RULES,
    flip_preferences_budget,
    flip_preferences_l1,
    lambda_grid,
    optimize_weights,
    random_flip_baseline,
)
from .dynamics import FdModel, FjModel, fd_steady_state, fj_steady_state, simulate_trajectory
from .errors import InsufficientEdgeBudget, SolverError
from .experiment import CSV_HEADER, run_flip_experiment
from .graph import DEDUPE_POLICIES, largest_connected_component, laplacian_kit
from .indices import fd_report, fj_report, per_edge_disagreement
from .io import (
    dumps_report,
    format_edge_list,
    generate_random_beta,
    read_edge_list,
    read_node_attributes,
    write_csv,
    write_edge_list,
    write_json,
    write_trajectory_csv,
)

logger = logging.getLogger("polarnet")

DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def default_seed() -> int:
    raw = os.environ.get("POLARNET_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"POLARNET_SEED must be an integer, got {raw!r}") from None


# -- argument helpers ----------------------------------------------------------


def _graph_args(p):
    p.add_argument("--edges", required=True, help="edge list: 'u v [w]' per line")
    p.add_argument("--dedupe", choices=DEDUPE_POLICIES, default="keep-first")
    p.add_argument("--lcc", action="store_true", help="restrict to the largest connected component")


def _attr_args(p):
    p.add_argument("--nodes", help="node attributes: 'v kappa beta' per line")
    p.add_argument("--kappa", type=float, help="uniform susceptibility when --nodes is absent (default 1)")
    p.add_argument("--prob-zero", type=float, help="draw binary beta with this P(beta=0) when --nodes is absent")


def _output_args(p):
    p.add_argument("-o", "--output", help="JSON report path (default: stdout)")


def _seed_arg(p):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $POLARNET_SEED or 42)")


def _rho_arg(p, default=0.5):
    p.add_argument("--rho", type=float, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="polarnet",
        description="Opinion polarization and disagreement on weighted graphs.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="steady state and indices of one model")
    _graph_args(p)
    p.add_argument("--model", choices=("fd", "fj"), required=True)
    p.add_argument("--s0", type=int)
    p.add_argument("--s1", type=int)
    _attr_args(p)
    _rho_arg(p)
    _seed_arg(p)
    p.add_argument("--edge-csv", help="write per-edge disagreement CSV")
    p.add_argument("--trajectory", help="write an RK4 trajectory CSV (t, x_0..x_n-1)")
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--dt", type=float)
    p.add_argument("--record-every", type=int, default=1)
    _output_args(p)

    p = sub.add_parser("distances", help="resistance and biharmonic distances")
    _graph_args(p)
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--csv", help="all-pairs CSV (u, v, resistance, biharmonic)")
    _output_args(p)

    p = sub.add_parser("select-leader", help="best opposing leader for a fixed s0")
    _graph_args(p)
    p.add_argument("--s0", type=int, required=True)
    _rho_arg(p)
    _output_args(p)

    p = sub.add_parser("design-sparse", help="sparse graph with near-minimal polarization for all leader pairs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="maximum edge count")
    p.add_argument("--budget", "-W", type=float, required=True, help="total weight budget")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--scale", type=float, default=1.0, help="extra weight factor in (0, 1]")
    p.add_argument("--oversample", type=float, default=4.0)
    p.add_argument("--strict", action="store_true", help="fail (exit 2) if epsilon is not certified")
    p.add_argument("--graph-out", help="write the designed graph as an edge list")
    _seed_arg(p)
    _output_args(p)

    p = sub.add_parser("design-weights", help="optimize edge weights (rho = 1/2)")
    _graph_args(p)
    _attr_args(p)
    _seed_arg(p)
    p.add_argument("--lower", type=float, required=True)
    p.add_argument("--upper", type=float, required=True)
    p.add_argument("--budget", "-W", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--graph-out", help="write the weighted graph as an edge list")
    _output_args(p)

    p = sub.add_parser("flip-prefs", help="choose preferences to flip")
    _graph_args(p)
    _attr_args(p)
    _seed_arg(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--lambda", dest="lam", type=float, help="l1 weight (regularized relaxation)")
    mode.add_argument("--k", type=int, help="flip budget (budget relaxation)")
    _rho_arg(p)
    p.add_argument("--rounding", choices=ROUNDING_RULES, default="prefix")
    p.add_argument("--trials", type=int, default=0, help="also run this many random-flip trials")
    _output_args(p)

    p = sub.add_parser("experiment", help="lambda sweep: l1 vs top-k vs random flips")
    _graph_args(p)
    p.add_argument("--nodes", help="node attributes (otherwise kappa=1 and random beta)")
    p.add_argument("--prob-zero", type=float, default=0.35)
    p.add_argument("--lambda-min", type=float, default=0.45)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--lambda-count", type=int, default=12)
    p.add_argument("--trials", type=int, default=100)
    _rho_arg(p)
    p.add_argument("--rounding", choices=ROUNDING_RULES, default="paper")
    p.add_argument("--keep-weights", action="store_true", help="keep input weights instead of setting all to 1")
    p.add_argument("--csv", help="plot-ready CSV mirror of the table")
    _seed_arg(p)
    _output_args(p)
    return parser


# -- commands ----------------------------------------------------------------


def _load_graph(args):
    g = read_edge_list(args.edges, dedupe=args.dedupe)
    mapping = None
    if args.lcc:
        g, mapping = largest_connected_component(g)
    elif not g.is_connected():
        raise UsageError(f"{args.edges}: graph is not connected (use --lcc)")
    return g, mapping


def _load_attributes(args, n, seed):
    if args.nodes:
        if args.kappa is not None or args.prob_zero is not None:
            raise UsageError("--nodes cannot be combined with --kappa/--prob-zero")
        return read_node_attributes(args.nodes, n)
    if args.prob_zero is None:
        raise UsageError("give --nodes or --prob-zero to define preferences")
    kappa = np.full(n, 1.0 if args.kappa is None else args.kappa)
    if not np.all(kappa > 0):
        raise UsageError("--kappa must be positive")
    return kappa, generate_random_beta(n, args.prob_zero, seed)


def _rho(args):
    if not 0.0 <= args.rho <= 1.0:
        raise UsageError(f"--rho must lie in [0, 1], got {args.rho}")
    return args.rho


def _seed(args):
    return default_seed() if args.seed is None else args.seed


def cmd_analyze(args):
    rho = _rho(args)
    g, mapping = _load_graph(args)
    if args.model == "fd":
        if args.s0 is None or args.s1 is None:
            raise UsageError("--model fd needs --s0 and --s1")
        if args.nodes or args.kappa is not None or args.prob_zero is not None:
            raise UsageError("--nodes/--kappa/--prob-zero only apply to --model fj")
        if args.seed is not None:
            raise UsageError("--seed only applies to --model fj")
        if args.s0 == args.s1:
            raise UsageError("leaders must differ")
        model = FdModel(g, args.s0, args.s1)
        x = fd_steady_state(model)
        report = fd_report(model, rho, x).to_dict()
        report.update(s0=args.s0, s1=args.s1)
    else:
        if args.s0 is not None or args.s1 is not None:
            raise UsageError("--s0/--s1 only apply to --model fd")
        seed = _seed(args)
        kappa, beta = _load_attributes(args, g.n, seed)
        model = FjModel(g, kappa, beta)
        x = fj_steady_state(model)
        report = fj_report(model, rho, x).to_dict()
        if not args.nodes:
            report["seed"] = seed
    report.update(n=g.n, m=g.m, steady_state=x)
    if mapping is not None:
        report["node_map"] = {str(k): v for k, v in mapping.items()}
    if args.edge_csv:
        per = per_edge_disagreement(g, x)
        write_csv(args.edge_csv, ["u", "v", "w", "disagreement"],
                  ([u, v, w, d] for (u, v, w), d in zip(g.edges, per)))
    if args.trajectory:
        traj = simulate_trajectory(model, dt=args.dt, horizon=args.horizon, record_every=args.record_every)
        write_trajectory_csv(args.trajectory, traj.times, traj.states)
        report["trajectory_final_error"] = float(np.max(np.abs(traj.final - x)))
    return report


def cmd_distances(args):
    g, _ = _load_graph(args)
    kit = laplacian_kit(g)
    if (args.u is None) != (args.v is None):
        raise UsageError("give both --u and --v, or neither")
    report = {"n": g.n, "m": g.m}
    if args.u is not None:
        for s in (args.u, args.v):
            if not 0 <= s < g.n:
                raise UsageError(f"node {s} out of range for n={g.n}")
        report.update(u=args.u, v=args.v, resistance=kit.resistance(args.u, args.v),
                      biharmonic=kit.biharmonic(args.u, args.v))
    elif not args.csv:
        raise UsageError("give --u/--v for one pair or --csv for all pairs")
    if args.csv:
        rows = ((u, v, kit.resistance(u, v), kit.biharmonic(u, v))
                for u in range(g.n) for v in range(u + 1, g.n))
        write_csv(args.csv, ["u", "v", "resistance", "biharmonic"], rows)
        report["pairs_written"] = g.n * (g.n - 1) // 2
    return report


def cmd_select_leader(args):
    rho = _rho(args)
    g, _ = _load_graph(args)
    choice = select_leader(g, args.s0, rho)
    return choice.to_dict()


def cmd_design_sparse(args):
    seed = _seed(args)
    design = design_robust_graph(
        args.n, args.k, args.budget, args.epsilon, seed=seed,
        oversample=args.oversample, scale=args.scale, strict=args.strict,
    )
    report = design.to_dict()
    if args.graph_out:
        write_edge_list(args.graph_out, design.graph)
        report["graph_path"] = args.graph_out
    else:
        report["edge_list"] = format_edge_list(design.graph)
    return report


def cmd_design_weights(args):
    g, _ = _load_graph(args)
    seed = _seed(args)
    kappa, beta = _load_attributes(args, g.n, seed)
    design = optimize_weights(g, kappa, beta, args.lower, args.upper, args.budget,
                              tol=args.tol, max_iter=args.max_iter)
    report = design.to_dict()
    report.update(n=g.n, m=g.m, edges=[[u, v] for u, v, _ in g.edges], seed=None if args.nodes else seed)
    if args.graph_out:
        if design.graph is None:
            raise UsageError("some optimized weights are zero; cannot write an edge list")
        write_edge_list(args.graph_out, design.graph)
    return report


def cmd_flip_prefs(args):
    rho = _rho(args)
    g, _ = _load_graph(args)
    seed = _seed(args)
    kappa, beta = _load_attributes(args, g.n, seed)
    if args.lam is not None:
        plan = flip_preferences_l1(g, kappa, beta, args.lam, rho, rounding=args.rounding)
    else:
        plan = flip_preferences_budget(g, kappa, beta, args.k, rho, rounding=args.rounding)
    report = plan.to_dict()
    report["seed"] = None if args.nodes else seed
    if args.trials:
        base = random_flip_baseline(g, kappa, beta, plan.flip_count, args.trials, seed, rho)
        report["random_baseline"] = base.to_dict()
    return report


def cmd_experiment(args):
    rho = _rho(args)
    seed = _seed(args)
    g = read_edge_list(args.edges, dedupe=args.dedupe)
    kappa = beta = None
    if args.nodes:
        if args.lcc:
            raise UsageError("--nodes already fixes node ids; drop --lcc")
        if not g.is_connected():
            raise UsageError("--nodes needs a connected graph")
        kappa, beta = read_node_attributes(args.nodes, g.n)
    lams = lambda_grid(args.lambda_min, args.lambda_max, args.lambda_count)
    report = run_flip_experiment(
        g, kappa, beta, prob_zero=args.prob_zero, seed=seed, lambdas=lams, rho=rho,
        trials=args.trials, rounding=args.rounding, unit_weights=not args.keep_weights,
    )
    if args.csv:
        write_csv(args.csv, CSV_HEADER, report.csv_rows())
    return report.to_dict()


COMMANDS = {
    "analyze": cmd_analyze,
    "distances": cmd_distances,
    "select-leader": cmd_select_leader,
    "design-sparse": cmd_design_sparse,
    "design-weights": cmd_design_weights,
    "flip-prefs": cmd_flip_prefs,
    "experiment": cmd_experiment,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.WARNING - 10 * min(args.verbose, 2),
            format="%(levelname)s %(name)s: %(message)s",
        )
        report = COMMANDS[args.command](args)
        report = {"command": args.command, **report}
        if args.output:
            write_json(args.output, report)
        else:
            sys.stdout.write(dumps_report(report))
        return 0
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except InsufficientEdgeBudget as exc:
        print(f"polarnet: {exc}", file=sys.stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"polarnet: solver failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"polarnet: {exc}", file=sys.stderr)
        return 1


def main():  # pragma: no cover - console entry point
    sys.exit(run_cli())
