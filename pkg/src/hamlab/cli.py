"""Command-line entry point: ``hamlab <sample|solve|certify|sweep|obstruct> ...``.

Exit codes: 0 success or positive verdict, 1 runtime error, 2 usage error,
3 negative verdict (falsified expansion, or non-Hamiltonian under ``--exact``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, gen
from .edgelist import EdgeListError, format_edgelist, read_edgelist
from .expansion import (
    E3_PARTNERS,
    E123Params,
    ExpansionBudgetError,
    ExpansionSpec,
    check_E1_E2_E3,
    check_expander,
    h1_claim_check,
)
from .gen import RngStream
from .graph import Graph
from .harness import (
    TrialConfig,
    c_grid,
    obstruct,
    plotdata_tsv,
    sweep,
    sweep_csv,
)
from .oracle import DEFAULT_LIMIT, hamilton_cycle_exact
from .posa import format_certificate, solve, verify_hamilton_cycle

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NEGATIVE = 3


class UsageError(Exception):
    pass


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def probability(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return x


def open_unit(text: str) -> float:
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return x


def positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return x


def nonneg_int(text: str) -> int:
    x = int(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


def positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names with or without dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


# graph input shared by solve and certify

def add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", nargs="?", help="edge-list file (header 'n m', then 'u v' lines)")
    p.add_argument("--n", type=positive_int, help="generate instead: number of vertices")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=probability, help="edge probability of the random part")
    g.add_argument("--lambda", dest="lam", type=float, help="expected degree, p = lambda / n")
    p.add_argument("--family", choices=["gnp", "bipartite", "clique-blobs"], default="gnp",
                   help="seed graph joined with G(n, p) (default: gnp, no seed graph)")
    p.add_argument("--alpha", type=open_unit, default=0.02, help="seed density, |A| = ceil(alpha n)")
    p.add_argument("--seed", type=nonneg_int, default=0, help="master seed")


def edge_probability(args) -> float:
    if args.lam is not None:
        p = args.lam / args.n
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"--lambda gives p = {p} outside [0, 1]")
        return p
    return 0.0 if args.p is None else args.p


def seed_graph(family: str, n: int, alpha: float) -> Graph:
    if family == "bipartite":
        return gen.unbalanced_bipartite(n, alpha)[0]
    if family == "clique-blobs":
        return gen.clique_blobs(n, alpha)
    return Graph(n)


def generated_graph(args) -> Graph:
    g = seed_graph(args.family, args.n, args.alpha)
    return g.add_edges(gen.sample_gnp_edges(args.n, edge_probability(args), RngStream(args.seed, 0)))


def load_graph(args) -> Graph:
    if args.graph and args.n is not None:
        raise UsageError("give either a graph file or --n, not both")
    if args.graph:
        return read_edgelist(args.graph)
    if args.n is None:
        raise UsageError("a graph file or --n is required")
    return generated_graph(args)


# subcommands

def cmd_sample(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    g = generated_graph(args)
    text = format_edgelist(g.n, g.edges())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    g = load_graph(args)
    work = g.copy()
    res = solve(work, rotation_cap=args.cap)
    cycle = res.cycle if res.found else None
    verdict = "HAMILTONIAN" if res.found else "EXHAUSTED"
    if cycle is None and args.exact:
        if g.n > DEFAULT_LIMIT.max_n_dp:
            raise UsageError(f"--exact supports n <= {DEFAULT_LIMIT.max_n_dp}, graph has n={g.n}")
        c = hamilton_cycle_exact(g)
        if c is None:
            verdict = "NON-HAMILTONIAN"
        else:
            cycle = np.asarray(c, dtype=np.int64)
            verdict = "HAMILTONIAN"
    if cycle is not None and not verify_hamilton_cycle(g, cycle):
        raise RuntimeError("internal error: cycle failed verification")
    print(verdict)
    if cycle is not None:
        print(" ".join(str(int(v)) for v in cycle))
        if args.certificate:
            res.cycle = cycle
            Path(args.certificate).write_text(format_certificate(res), encoding="utf-8", newline="\n")
    if not args.quiet:
        print(f"# n={g.n} m={g.edge_count()} path_length={res.path_length} rotations={res.rotations}")
    return EXIT_NEGATIVE if verdict == "NON-HAMILTONIAN" else EXIT_OK


def _emit_reports(reports, args) -> int:
    for r in reports:
        print(r.summary())
        if r.witness is not None and args.show_witness:
            print("witness: " + " ".join(str(v) for v in r.witness))
    if args.json:
        Path(args.json).write_text(
            json.dumps([r.to_record() for r in reports], sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_NEGATIVE if any(r.falsified for r in reports) else EXIT_OK


def cmd_certify(args) -> int:
    rng = RngStream(args.seed, 1)
    if args.mode == "expander":
        g = load_graph(args)
        k = args.k_bound if args.k_bound is not None else g.n // 4
        if k > g.n:
            raise UsageError(f"--k-bound {k} exceeds n={g.n}")
        spec = ExpansionSpec("randomized" if args.randomized else "exact", k, args.factor, args.budget)
        return _emit_reports([check_expander(g, spec, rng)], args)
    L = math.log(1 / args.alpha)
    lam = (1 + args.eta) * L
    if args.mode == "e123":
        if args.graph:
            R = read_edgelist(args.graph)
        elif args.n is not None:
            R = gen.sample_gnp(args.n, min(1.0, lam / args.n), RngStream(args.seed, 0))
        else:
            raise UsageError("a graph file or --n is required")
        params = E123Params(R.n, args.K, lam, gen.ceil_alpha_n(args.alpha, R.n), args.eta)
        return _emit_reports(list(check_E1_E2_E3(R, params, rng, budget=args.budget, e3_partner=args.e3_partner)), args)
    # h1: seed family joined with a first random round of expected degree lambda
    if args.n is None:
        raise UsageError("--mode h1 needs --n")
    family = "bipartite" if args.family == "gnp" else args.family
    G_alpha = seed_graph(family, args.n, args.alpha)
    R1 = gen.sample_gnp(args.n, min(1.0, lam / args.n), RngStream(args.seed, 0))
    d = gen.ceil_alpha_n(args.alpha, args.n)
    rep = h1_claim_check(G_alpha, R1, d, rng, budget=args.budget)
    print(f"h1: {rep.verdict}; connected={rep.connected}")
    return _emit_reports([rep.small, rep.large], args) if rep.connected else EXIT_NEGATIVE


def _config_from(args, **extra) -> TrialConfig:
    return TrialConfig(
        n=args.n, alpha=args.alpha, epsilon=args.epsilon, seed_family=args.family, rounds=args.rounds,
        rotation_cap=args.cap, master_seed=args.seed, **extra,
    )


def cmd_sweep(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    if args.c_grid is not None:
        cs = args.c_grid
    else:
        if args.c_step <= 0 or args.c_max < args.c_min:
            raise UsageError("need --c-min <= --c-max and --c-step > 0")
        cs = c_grid(args.c_min, args.c_max, args.c_step)
    if cs != sorted(cs):
        raise UsageError("--c-grid must be ascending")
    base = _config_from(args)
    log_fh = open(args.log, "w", encoding="utf-8", newline="\n") if args.log else None
    try:
        def log(rec):
            log_fh.write(json.dumps(rec, sort_keys=True) + "\n")

        res = sweep(base, cs, args.trials, jobs=args.jobs, log=log if log_fh else None, timing=args.timing)
    finally:
        if log_fh:
            log_fh.close()
    text = sweep_csv(res)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    if args.plotdata:
        Path(args.plotdata).write_text(plotdata_tsv(res), encoding="utf-8", newline="\n")
    if res.diagnostic:
        print(f"# {res.diagnostic}", file=sys.stderr)
    return EXIT_OK


def cmd_obstruct(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    cs = args.c if args.c is not None else [1 - e for e in args.eta]
    if any(c < 0 for c in cs):
        raise UsageError("each eta must be at most 1")
    lines = ["c\tp\ttrials\tA\tB\tEY\tmean_Y\tvar_Y\tcert_rate\tslot_cert_rate"]
    for i, c in enumerate(cs):
        row = obstruct(args.n, args.alpha, c, args.trials, args.seed, point=i, jobs=args.jobs)
        lines.append(
            f"{c:.6g}\t{row.p:.6g}\t{row.trials}\t{row.A_size}\t{row.B_size}\t{row.EY:.6g}\t"
            f"{row.mean_Y:.6g}\t{row.var_Y:.6g}\t{row.cert_rate:.6g}\t{row.slot_cert_rate:.6g}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="file of 'key = value' defaults; flags override")

    p = sub.add_parser("sample", help="write a seeded random graph as an edge list")
    common(p)
    p.add_argument("--n", type=positive_int, help="number of vertices")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=probability, help="edge probability")
    g.add_argument("--lambda", dest="lam", type=float, help="expected degree, p = lambda / n")
    p.add_argument("--family", choices=["gnp", "bipartite", "clique-blobs"], default="gnp",
                   help="seed graph joined with G(n, p)")
    p.add_argument("--alpha", type=open_unit, default=0.02, help="seed density")
    p.add_argument("--seed", type=nonneg_int, default=0, help="master seed")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_sample, graph=None)

    p = sub.add_parser("solve", help="look for a Hamilton cycle with the rotation engine")
    common(p)
    add_graph_args(p)
    p.add_argument("--exact", action="store_true", help="fall back to the exact oracle (n <= 20)")
    p.add_argument("--cap", type=positive_int, help="rotation budget per search (default 4n)")
    p.add_argument("--certificate", help="write cycle certificate here when one is found")
    p.add_argument("--quiet", action="store_true", help="omit the statistics comment line")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="check expansion properties")
    common(p)
    add_graph_args(p)
    p.add_argument("--mode", choices=["expander", "e123", "h1"], default="expander",
                   help="2-expander check on the graph, E1-E3 on G(n, lambda/n), or the seed-plus-round claim")
    p.add_argument("--k-bound", type=nonneg_int, help="largest set size (default n/4)")
    p.add_argument("--factor", type=positive_float, default=2.0, help="required expansion multiple")
    p.add_argument("--randomized", action="store_true", help="sample sets instead of enumerating")
    p.add_argument("--budget", type=positive_int, default=20_000, help="sets measured in randomized mode")
    p.add_argument("--eta", type=float, default=0.25, help="lambda = (1 + eta) log(1/alpha)")
    p.add_argument("--K", type=positive_float, default=16.0, help="expansion constant for e123")
    p.add_argument("--e3-partner", choices=E3_PARTNERS, default="sampled",
                   help="e123: sampled disjoint pairs, or each quarter against all its non-neighbours")
    p.add_argument("--json", help="write the reports as JSON here")
    p.add_argument("--show-witness", action="store_true", help="print witness vertices")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="success and obstruction frequencies along p = c L / n")
    common(p)
    p.add_argument("--n", type=positive_int, help="number of vertices (required)")
    p.add_argument("--alpha", type=open_unit, default=0.02, help="seed density, |A| = ceil(alpha n)")
    p.add_argument("--epsilon", type=positive_float, default=0.2, help="two-round split parameter")
    p.add_argument("--c-grid", type=float_list, help="explicit ascending grid of c values")
    p.add_argument("--c-min", type=float, default=0.7, help="first grid value of c")
    p.add_argument("--c-max", type=float, default=1.6, help="last grid value of c")
    p.add_argument("--c-step", type=float, default=0.1, help="grid spacing")
    p.add_argument("--trials", type=positive_int, default=100, help="trials per grid point and probe")
    p.add_argument("--family", choices=["bipartite", "clique-blobs", "empty"], default="bipartite",
                   help="seed graph (empty: plain G(n, p) control)")
    p.add_argument("--rounds", choices=["one-shot", "two-round"], default="one-shot",
                   help="merge all random edges, or merge a first round and sprinkle the second")
    p.add_argument("--cap", type=positive_int, help="rotation budget per search (default 4n)")
    p.add_argument("--seed", type=nonneg_int, default=0, help="master seed")
    p.add_argument("--jobs", type=positive_int, default=default_jobs(), help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plotdata", help="also write a c / ham_freq TSV here")
    p.add_argument("--log", help="JSON-lines trial log")
    p.add_argument("--timing", action="store_true", help="record runtimes in the log (breaks byte-identity)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("obstruct", help="isolated-in-B statistics against the closed form")
    common(p)
    p.add_argument("--n", type=positive_int, help="number of vertices (required)")
    p.add_argument("--alpha", type=open_unit, default=0.02, help="seed density, |A| = ceil(alpha n)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eta", type=float_list, default=[0.3], help="p = (1 - eta) L / n, comma list")
    g.add_argument("--c", type=float_list, help="p = c L / n instead, comma list")
    p.add_argument("--trials", type=positive_int, default=200, help="draws of the random round per row")
    p.add_argument("--seed", type=nonneg_int, default=0, help="master seed")
    p.add_argument("--jobs", type=positive_int, default=default_jobs(), help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="TSV path (default: stdout)")
    p.set_defaults(func=cmd_obstruct)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    try:
        cfg = read_config(args.config)
    except OSError as exc:
        parser.error(f"--config: {exc}")
    except UsageError as exc:
        parser.error(str(exc))
    defaults = {}
    for key, value in cfg.items():
        dest = "lam" if key == "lambda" else key
        act = actions.get(dest)
        if act is None or dest in ("config", "help", "func"):
            sub.error(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                sub.error(f"config key {key!r} expects true or false")
            defaults[dest] = low in ("true", "1", "yes")
        else:
            try:
                v = act.type(value) if act.type else value
            except (argparse.ArgumentTypeError, ValueError) as exc:
                sub.error(f"config key {key!r}: {exc}")
            if act.choices is not None and v not in act.choices:
                sub.error(f"config key {key!r}: invalid choice {v!r}")
            defaults[dest] = v
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hamlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExpansionBudgetError, EdgeListError, OSError, ValueError, RuntimeError) as exc:
        print(f"hamlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
