"""Monte Carlo trials, threshold sweeps and the obstruction laboratory.

Every random draw of a trial comes from ``RngStream(master_seed, (point,
trial, round))`` where ``point`` indexes the sweep coordinate, so a trial is a
pure function of its config and results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, gen
from ._bits import row_popcounts
from .edgelist import read_edgelist
from .gen import RngStream
from .graph import Graph, VertexSet
from .oracle import DEFAULT_LIMIT, hamiltonian_exact
from .posa import solve, sprinkle, verify_hamilton_cycle

SEED_FAMILIES = ("bipartite", "clique-blobs", "empty", "file")
ROUNDS = ("one-shot", "two-round")

FOUND = "found"
CERTIFIED = "certified"
NON_HAMILTONIAN = "non-hamiltonian"
UNDECIDED = "undecided"

# round ids inside a trial's stream key
ROUND_ONE_SHOT = 0
ROUND_R1 = 1
ROUND_R2 = 2
ROUND_ORDER = 3


@dataclass(frozen=True)
class TrialConfig:
    n: int
    alpha: float = 0.02
    epsilon: float = 0.2
    p: float | None = None
    seed_family: str = "bipartite"
    rounds: str = "one-shot"
    rotation_cap: int | None = None
    master_seed: int = 0
    trial_index: int = 0
    point_index: int = 0
    graph_path: str | None = None
    use_certificate: bool = True
    use_oracle: bool = True

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")
        if self.seed_family not in SEED_FAMILIES:
            raise ValueError(f"seed_family must be one of {SEED_FAMILIES}, got {self.seed_family!r}")
        if self.rounds not in ROUNDS:
            raise ValueError(f"rounds must be one of {ROUNDS}, got {self.rounds!r}")
        if self.seed_family != "empty" and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")
        if self.seed_family == "file" and not self.graph_path:
            raise ValueError("seed_family 'file' needs graph_path")
        if self.rotation_cap is not None and self.rotation_cap < 1:
            raise ValueError("rotation_cap must be positive")

    @property
    def L(self) -> float:
        return math.log(1.0 / self.alpha)

    @property
    def edge_p(self) -> float:
        if self.p is not None:
            return self.p
        return min(1.0, (1 + self.epsilon) * self.L / self.n)

    def stream(self, rnd: int) -> RngStream:
        return RngStream(self.master_seed, (self.point_index, self.trial_index, rnd))

    def key(self) -> dict:
        d = asdict(self)
        d["p"] = self.edge_p
        return d

    def digest(self) -> str:
        blob = json.dumps(self.key(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class TrialOutcome:
    hamiltonian_found: bool
    obstruction_certified: bool
    verdict: str
    provenance: str
    Y: int | None = None
    Y1: int | None = None
    A_size: int | None = None
    certificate: str | None = None
    edges_exposed: int = 0
    path_length: int = 0
    rotations: int = 0
    reason: str = ""
    runtime: float = 0.0
    trial_index: int = 0

    def __post_init__(self):
        assert not (self.hamiltonian_found and self.obstruction_certified)


def repo_version() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True, text=True, timeout=5
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# obstruction certificate

def _b_degrees(R: Graph, B: VertexSet, block: int = 4096) -> np.ndarray:
    b = B.to_array()
    out = np.empty(len(b), dtype=np.int64)
    for i in range(0, len(b), block):
        out[i: i + block] = row_popcounts(R.rows[b[i: i + block]] & B.words)
    return out


def count_isolated_in_B(R: Graph, B) -> int:
    """Vertices of ``B`` with no neighbour inside ``B`` in ``R``."""
    if not isinstance(B, VertexSet):
        B = VertexSet.from_iter(R.n, B)
    if B.n != R.n:
        raise ValueError("B lives on a different vertex set")
    return int(np.count_nonzero(_b_degrees(R, B) == 0))


def low_degree_counts_in_B(R: Graph, B: VertexSet) -> tuple[int, int]:
    """(vertices of ``B`` with 0, with exactly 1 neighbour inside ``B``)."""
    deg = _b_degrees(R, B)
    return int(np.count_nonzero(deg == 0)), int(np.count_nonzero(deg == 1))


def low_degree_counts_from_edges(n: int, edges: np.ndarray, B: VertexSet) -> tuple[int, int]:
    """Same counts from a simple edge list, without building the adjacency matrix."""
    inside = B.mask()
    e = edges[inside[edges[:, 0]] & inside[edges[:, 1]]]
    deg = np.bincount(e.ravel(), minlength=n)[inside]
    return int(np.count_nonzero(deg == 0)), int(np.count_nonzero(deg == 1))


def expected_isolated_in_B(n: int, alpha: float, p: float) -> float:
    b = n - gen.ceil_alpha_n(alpha, n)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if b <= 1:
        return float(b)
    if p == 1.0:
        return 0.0
    return b * math.exp((b - 1) * math.log1p(-p))


def certify_non_hamiltonian(A, Y_count: int) -> bool:
    """``Y > |A|``: each such vertex needs two cycle neighbours in ``A``, which offers ``2|A|`` slots."""
    a = A if isinstance(A, int) else len(A)
    return Y_count > a


def certify_endpoint_slots(A, y0: int, y1: int) -> bool:
    """Stronger slot count: a vertex with no ``B``-neighbour takes two ``A``-slots, one with a single ``B``-neighbour at least one."""
    a = A if isinstance(A, int) else len(A)
    return 2 * y0 + y1 > 2 * a


# trials

def build_seed(cfg: TrialConfig) -> tuple[Graph, VertexSet | None, VertexSet | None]:
    if cfg.seed_family == "bipartite":
        return gen.unbalanced_bipartite(cfg.n, cfg.alpha)
    if cfg.seed_family == "clique-blobs":
        return gen.clique_blobs(cfg.n, cfg.alpha), None, None
    if cfg.seed_family == "file":
        g = read_edgelist(cfg.graph_path)
        if g.n != cfg.n:
            raise ValueError(f"{cfg.graph_path} has n={g.n}, config says n={cfg.n}")
        return g, None, None
    return Graph(cfg.n), None, None


def sample_rounds(cfg: TrialConfig) -> tuple[np.ndarray, np.ndarray]:
    """(edges merged up front, edges to sprinkle in order)."""
    n, p = cfg.n, cfg.edge_p
    if cfg.rounds == "one-shot":
        return gen.sample_gnp_edges(n, p, cfg.stream(ROUND_ONE_SHOT)), np.empty((0, 2), dtype=np.int64)
    plan = gen.make_plan(n, cfg.alpha if cfg.seed_family != "empty" else 0.5, cfg.epsilon, p)
    p1, p2 = gen.split_probability(p, plan.lambda1, plan.lambda2)
    r1 = gen.sample_gnp_edges(n, p1, cfg.stream(ROUND_R1))
    r2 = gen.sample_gnp_edges(n, p2, cfg.stream(ROUND_R2))
    r2 = r2[cfg.stream(ROUND_ORDER).generator().permutation(len(r2))]
    return r1, r2


def run_trial(cfg: TrialConfig) -> TrialOutcome:
    t0 = time.perf_counter()
    G, A, B = build_seed(cfg)
    up_front, stream = sample_rounds(cfg)
    out = dict(trial_index=cfg.trial_index, edges_exposed=len(up_front))
    if A is not None:
        y0, y1 = low_degree_counts_from_edges(cfg.n, np.concatenate([up_front, stream]), B)
        out.update(Y=y0, Y1=y1, A_size=len(A))
        if cfg.use_certificate:
            cert = None
            if certify_non_hamiltonian(A, y0):
                cert = "isolated-in-B"
            elif certify_endpoint_slots(A, y0, y1):
                cert = "endpoint-slots"
            if cert is not None:
                out["edges_exposed"] += len(stream)
                return TrialOutcome(
                    False, True, CERTIFIED, "certificate", certificate=cert,
                    runtime=time.perf_counter() - t0, **out,
                )
    H = G.add_edges(up_front)
    if not H.is_connected() and len(stream) == 0:
        return _finish_undecided(cfg, H, out, t0, "graph is disconnected")
    try:
        if len(stream):
            res = sprinkle(H, stream, rotation_cap=cfg.rotation_cap, copy=False, require_connected=False)
        else:
            res = solve(H, rotation_cap=cfg.rotation_cap, copy=False)
    except ValueError as exc:
        return _finish_undecided(cfg, H, out, t0, str(exc))
    out["edges_exposed"] += res.edges_consumed
    out.update(path_length=res.path_length, rotations=res.rotations)
    if res.found:
        # H now carries every consumed stream edge
        if not verify_hamilton_cycle(H, res.cycle):
            raise AssertionError("engine returned a cycle that does not verify")
        return TrialOutcome(True, False, FOUND, "engine", runtime=time.perf_counter() - t0, **out)
    return _finish_undecided(cfg, H, out, t0, "engine exhausted")


def _finish_undecided(cfg, H, out, t0, reason) -> TrialOutcome:
    if cfg.use_oracle and H.n <= DEFAULT_LIMIT.max_n_dp and not hamiltonian_exact(H):
        return TrialOutcome(
            False, False, NON_HAMILTONIAN, "oracle", reason=reason, runtime=time.perf_counter() - t0, **out
        )
    return TrialOutcome(False, False, UNDECIDED, "none", reason=reason, runtime=time.perf_counter() - t0, **out)


def run_trials(cfgs: list[TrialConfig], jobs: int = 1) -> list[TrialOutcome]:
    """Run configs on a thread pool; the result order follows ``cfgs``."""
    if jobs <= 1 or len(cfgs) <= 1:
        return [run_trial(c) for c in cfgs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_trial, cfgs))


def trial_record(cfg: TrialConfig, out: TrialOutcome, version: str, timing: bool = False) -> dict:
    rec = {"cfg": cfg.key(), "cfg_hash": cfg.digest(), "version": version}
    o = asdict(out)
    if not timing:
        o.pop("runtime")
    rec.update(o)
    return rec


# statistics

def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("wilson_interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    ph = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (ph + z2 / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class GridPoint:
    c: float
    p: float
    trials: int
    ham: int
    obs: int
    undecided: int

    @property
    def ham_freq(self) -> float:
        return self.ham / self.trials

    @property
    def obs_freq(self) -> float:
        return self.obs / self.trials

    def ham_ci(self) -> tuple[float, float]:
        return wilson_interval(self.ham, self.trials)

    def obs_ci(self) -> tuple[float, float]:
        return wilson_interval(self.obs, self.trials)


@dataclass
class SweepResult:
    grid: list[GridPoint]
    probes: list[GridPoint] = field(default_factory=list)
    p_half: float | None = None
    c_half: float | None = None
    bracket: tuple[float, float] | None = None
    reference: float = 0.0
    diagnostic: str = ""
    monotone_flags: list[float] = field(default_factory=list)


def summarize(c: float, p: float, outs: list[TrialOutcome]) -> GridPoint:
    ham = sum(o.hamiltonian_found for o in outs)
    obs = sum(o.obstruction_certified for o in outs)
    und = sum(o.verdict == UNDECIDED for o in outs)
    return GridPoint(c, p, len(outs), ham, obs, und)


def c_grid(lo: float = 0.7, hi: float = 1.6, step: float = 0.1) -> list[float]:
    k = int(round((hi - lo) / step))
    return [round(lo + i * step, 10) for i in range(k + 1)]


def sweep(
    base_cfg: TrialConfig,
    cs: list[float],
    trials_per_point: int,
    jobs: int = 1,
    log=None,
    timing: bool = False,
    rel_width: float = 0.02,
    max_probes: int = 12,
) -> SweepResult:
    """Frequencies along ``p = c L / n`` then bisection of the 1/2 crossing in ``c``.

    ``log``, if given, is called with one JSON-ready record per trial.
    """
    if list(cs) != sorted(cs):
        raise ValueError("grid must be sorted ascending")
    if not cs:
        raise ValueError("grid is empty")
    n = base_cfg.n
    L = base_cfg.L
    version = repo_version()

    def evaluate(c: float, point: int) -> GridPoint:
        p = min(1.0, c * L / n)
        cfgs = [replace(base_cfg, p=p, point_index=point, trial_index=t) for t in range(trials_per_point)]
        outs = run_trials(cfgs, jobs)
        if log is not None:
            for cfg, o in zip(cfgs, outs):
                log(trial_record(cfg, o, version, timing))
        return summarize(c, p, outs)

    grid = [evaluate(c, i) for i, c in enumerate(cs)]
    res = SweepResult(grid, reference=L / n)
    for a, b in zip(grid, grid[1:]):
        # flag drops larger than the two intervals allow
        if b.ham_ci()[1] < a.ham_ci()[0]:
            res.monotone_flags.append(b.c)
    first = next((i for i, g in enumerate(grid) if g.ham_freq >= 0.5), None)
    if first is None:
        res.diagnostic = "success frequency below 1/2 on the whole grid"
        return res
    if first == 0:
        res.diagnostic = "success frequency at least 1/2 on the whole grid"
        return res
    lo, hi = grid[first - 1].c, grid[first].c
    point = len(cs)
    while (hi - lo) / hi > rel_width and len(res.probes) < max_probes:
        mid = (lo + hi) / 2
        g = evaluate(mid, point)
        point += 1
        res.probes.append(g)
        if g.ham_freq >= 0.5:
            hi = mid
        else:
            lo = mid
    res.bracket = (lo, hi)
    res.c_half = (lo + hi) / 2
    res.p_half = res.c_half * L / n
    return res


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def sweep_csv(res: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c", "p", "trials", "ham_freq", "ham_lo", "ham_hi", "obs_freq", "obs_lo", "obs_hi"])
    for g in res.grid:
        hl, hh = g.ham_ci()
        ol, oh = g.obs_ci()
        w.writerow([_fmt(g.c), _fmt(g.p), g.trials, _fmt(g.ham_freq), _fmt(hl), _fmt(hh),
                    _fmt(g.obs_freq), _fmt(ol), _fmt(oh)])
    ph = "NA" if res.p_half is None else _fmt(res.p_half)
    ch = "NA" if res.c_half is None else _fmt(res.c_half)
    buf.write(f"# p_half={ph} c_half={ch}\n")
    return buf.getvalue()


def plotdata_tsv(res: SweepResult) -> str:
    return "".join(f"{_fmt(g.c)}\t{_fmt(g.ham_freq)}\n" for g in res.grid)


# obstruction laboratory

@dataclass
class ObstructionRow:
    n: int
    alpha: float
    c: float
    p: float
    trials: int
    A_size: int
    B_size: int
    EY: float
    mean_Y: float
    var_Y: float
    cert_rate: float
    slot_cert_rate: float
    Ys: list = field(default_factory=list, repr=False)


def obstruction_trial(n: int, alpha: float, p: float, master_seed: int, point: int, trial: int):
    """(Y, Y1) for one draw of the random round, on the same stream a one-shot trial uses."""
    B = VertexSet.from_array(n, np.arange(gen.ceil_alpha_n(alpha, n), n))
    stream = RngStream(master_seed, (point, trial, ROUND_ONE_SHOT))
    return low_degree_counts_from_edges(n, gen.sample_gnp_edges(n, p, stream), B)


def obstruct(n: int, alpha: float, c: float, trials: int, master_seed: int = 0, point: int = 0,
             jobs: int = 1) -> ObstructionRow:
    L = math.log(1 / alpha)
    p = min(1.0, c * L / n)
    a = gen.ceil_alpha_n(alpha, n)

    def one(t):
        return obstruction_trial(n, alpha, p, master_seed, point, t)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            ys = list(pool.map(one, range(trials)))
    else:
        ys = [one(t) for t in range(trials)]
    y0 = np.array([y[0] for y in ys], dtype=float)
    y1 = np.array([y[1] for y in ys], dtype=float)
    return ObstructionRow(
        n, alpha, c, p, trials, a, n - a, expected_isolated_in_B(n, alpha, p),
        float(y0.mean()), float(y0.var(ddof=1)) if trials > 1 else 0.0,
        float(np.mean(y0 > a)), float(np.mean((y0 > a) | (2 * y0 + y1 > 2 * a))),
        [int(v) for v in y0],
    )
