"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 input validation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .dist import DEFAULT_CAP, DEFAULT_EPS, DelayDistribution, deadline_quantile
from .engine import EngineReport, golfar_bound, run_lifecd
from .errors import DomainError, LifecdError, NumericError, ParseError, TooLarge, ValidationError
from .graph import FailureGraph, load_graph, parse_graph
from .oracle import exact_distribution
from .sim import monte_carlo, run_seeds, worker_count

log = logging.getLogger("lifecd")

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
BUNDLED = ("fig2a.csv", "fig3b.csv")


@dataclass(frozen=True)
class Sweep:
    edge: tuple[int, int]
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 12) for i in range(count)]


@dataclass(frozen=True)
class RunConfig:
    graph_path: str
    source: int
    eps_trunc: float = DEFAULT_EPS
    n_max_cap: int = DEFAULT_CAP
    runs: int = 5000
    seed: int = 0
    deadline_tau: float | None = None
    sweep: Sweep | None = None
    out: str | None = None
    trace: bool = False


class UsageError(LifecdError):
    pass


def parse_sweep(text: str) -> Sweep:
    try:
        edge, start, stop, step = text.split(":")
        i, j = (int(x) for x in edge.replace(",", "-").split("-"))
        sw = Sweep((i, j), float(start), float(stop), float(step))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected EDGE:START:STOP:STEP like 3-5:0.01:0.99:0.02, got {text!r}")
    if sw.step <= 0:
        raise argparse.ArgumentTypeError("sweep step must be > 0")
    if not 0.0 <= sw.start <= sw.stop < 1.0:
        raise argparse.ArgumentTypeError("sweep needs 0 <= start <= stop < 1")
    return sw


def _tau(text: str) -> float:
    t = float(text)
    if not 0.0 < t < 1.0:
        raise argparse.ArgumentTypeError("tau must lie in (0,1)")
    return t


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _eps(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("eps must lie in (0,1)")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def read_graph(path: str) -> FailureGraph:
    """Load a graph file; bare names of the bundled examples also resolve."""
    p = Path(path)
    if not p.exists() and path in BUNDLED:
        text = resources.files("lifecd").joinpath("data", path).read_text(encoding="utf-8")
        return parse_graph(text)
    return load_graph(p)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, metavar="PATH",
                        help=f"edge-list file 'i,j,p' per line (bundled: {', '.join(BUNDLED)})")
    common.add_argument("--source", required=True, type=int, metavar="N", help="node holding the maximum (1-based)")
    common.add_argument("--eps", type=_eps, default=DEFAULT_EPS, metavar="E",
                        help="truncation tail tolerance (default: %(default)g)")
    common.add_argument("--nmax-cap", type=_positive_int, default=DEFAULT_CAP, metavar="K",
                        help="hard cap on the truncation window (default: %(default)d)")
    common.add_argument("--runs", type=_positive_int, default=5000, metavar="R",
                        help="Monte Carlo runs (default: %(default)d)")
    common.add_argument("--seed", type=_seed, default=0, metavar="S", help="master seed (default: %(default)d)")
    common.add_argument("--tau", type=_tau, default=None, metavar="T", help="deadline confidence in (0,1)")
    common.add_argument("--sweep", type=parse_sweep, default=None, metavar="EDGE:START:STOP:STEP",
                        help="vary one edge's failure probability, e.g. 3-5:0.01:0.99:0.02")
    common.add_argument("--out", default=None, metavar="PATH", help="write CSV here instead of stdout")
    common.add_argument("--trace", action="store_true", help="print the reduction steps to stderr")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="lifecd",
        description="Max-consensus convergence-time distributions under Bernoulli link failures.",
        epilog="LIFECD_THREADS caps worker threads (default 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="analytic pmf/cdf as k,pmf,cdf")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo pmf/cdf plus JSON metadata")
    sub.add_parser("compare", parents=[common], help="analytic and simulated pmf/cdf side by side")
    sub.add_parser("sweep", parents=[common], help="E[Z] over one edge's failure probability")
    sub.add_parser("deadline", parents=[common], help="smallest k with Pr(Z <= k) >= tau")
    sub.add_parser("oracle", parents=[common], help="exact informed-set chain distribution (n <= 20)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        graph_path=args.graph,
        source=args.source,
        eps_trunc=args.eps,
        n_max_cap=args.nmax_cap,
        runs=args.runs,
        seed=args.seed,
        deadline_tau=args.tau,
        sweep=args.sweep,
        out=args.out,
        trace=args.trace,
    )


def _emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(x: float) -> str:
    return repr(float(x))


def _summary(rep: EngineReport) -> str:
    return (
        f"E[Z]={rep.expected_value:.6f} exact={str(rep.exact).lower()} "
        f"tail_mass={rep.tail_mass:.3g} n_max={rep.n_max} golfar={rep.golfar:.6g}"
    )


def _analyze(g: FailureGraph, cfg: RunConfig) -> EngineReport:
    return run_lifecd(g, cfg.source, cfg.eps_trunc, cfg.n_max_cap)


def cmd_compute(cfg: RunConfig, stdout, stderr) -> int:
    g = read_graph(cfg.graph_path)
    if g.node_count == 1:
        print("warning: trivial network (single node), consensus holds at k=0", file=stderr)
    rep = _analyze(g, cfg)
    _emit(rep.distribution.to_csv(), cfg.out, stdout)
    print(_summary(rep), file=stderr)
    if cfg.trace:
        for step in rep.reduction_trace:
            print(step.describe(), file=stderr)
    return 0


def cmd_simulate(cfg: RunConfig, stdout, stderr) -> int:
    g = read_graph(cfg.graph_path)
    res = monte_carlo(g, cfg.source, cfg.runs, cfg.seed)
    _emit(res.distribution.to_csv(elide=False), cfg.out, stdout)
    meta = res.metadata_json()
    if cfg.out is None:
        stderr.write(meta)
    else:
        Path(cfg.out).with_suffix(".json").write_text(meta, encoding="utf-8")
    print(f"mean={res.sample_mean:.6f} std={res.sample_std:.6f} stderr={res.std_error:.6f}", file=stderr)
    return 0


def merge_rows(calc: DelayDistribution, sim: DelayDistribution) -> list[list]:
    """Rows k,pmf_calc,cdf_calc,pmf_sim,cdf_sim over the union of both ranges."""
    last = max(calc.last_informative(), sim.n_max)
    a = calc.extended(max(last, calc.n_max))
    b = sim.extended(max(last, sim.n_max))
    return [[k, a.pmf[k], a.cdf[k], b.pmf[k], b.cdf[k]] for k in range(last + 1)]


def cmd_compare(cfg: RunConfig, stdout, stderr) -> int:
    g = read_graph(cfg.graph_path)
    rep = _analyze(g, cfg)
    res = monte_carlo(g, cfg.source, cfg.runs, cfg.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "pmf_calc", "cdf_calc", "pmf_sim", "cdf_sim"])
    for k, *vals in merge_rows(rep.distribution, res.distribution):
        w.writerow([k, *map(_fmt, vals)])
    _emit(buf.getvalue(), cfg.out, stdout)
    print(_summary(rep), file=stderr)
    print(f"simulation mean={res.sample_mean:.6f} std={res.sample_std:.6f} runs={res.run_count}", file=stderr)
    return 0


def sweep_rows(g: FailureGraph, cfg: RunConfig, simulate: bool = True) -> list[tuple[float, float, float, float]]:
    """(p, calc, sim, golfar) per sweep value, ordered by p."""
    sw = cfg.sweep
    values = sw.values()
    seeds = run_seeds(cfg.seed, len(values))

    def point(args):
        p, seed = args
        gp = g.with_prob(*sw.edge, p)
        calc = run_lifecd(gp, cfg.source, cfg.eps_trunc, cfg.n_max_cap).expected_value
        sim = monte_carlo(gp, cfg.source, cfg.runs, seed, workers=1).sample_mean if simulate else float("nan")
        return p, calc, sim, golfar_bound(gp, cfg.source)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(point, zip(values, seeds)))
    return [point(a) for a in zip(values, seeds)]


def cmd_sweep(cfg: RunConfig, stdout, stderr) -> int:
    if cfg.sweep is None:
        raise UsageError("sweep requires --sweep EDGE:START:STOP:STEP")
    g = read_graph(cfg.graph_path)
    g.prob(*cfg.sweep.edge)  # UnknownEdge before any work
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "calc", "sim", "golfar"])
    for row in sweep_rows(g, cfg):
        w.writerow([_fmt(x) for x in row])
    _emit(buf.getvalue(), cfg.out, stdout)
    return 0


def cmd_deadline(cfg: RunConfig, stdout, stderr) -> int:
    if cfg.deadline_tau is None:
        raise UsageError("deadline requires --tau")
    g = read_graph(cfg.graph_path)
    rep = _analyze(g, cfg)
    k = deadline_quantile(rep.distribution, cfg.deadline_tau)
    _emit(f"{k}\n", cfg.out, stdout)
    print(f"Pr(Z <= {k}) = {rep.distribution.cdf[k]:.12g} >= tau={cfg.deadline_tau}", file=stderr)
    return 0


def cmd_oracle(cfg: RunConfig, stdout, stderr) -> int:
    g = read_graph(cfg.graph_path)
    horizon = _analyze(g, cfg).n_max
    dist = exact_distribution(g, cfg.source, horizon)
    _emit(dist.to_csv(), cfg.out, stdout)
    print(f"E[Z]={dist.expectation():.6f} tail_mass={dist.tail_mass:.3g} horizon={horizon}", file=stderr)
    return 0


COMMANDS = {
    "compute": cmd_compute,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "deadline": cmd_deadline,
    "oracle": cmd_oracle,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=stderr)
    cfg = config_from_args(args)
    try:
        return COMMANDS[args.command](cfg, stdout, stderr)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, TooLarge, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
