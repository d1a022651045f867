"""Grid-world benchmark: problem generation, exact oracle, planner sweeps and
report files (``runs.csv``, ``summary.json``, ``paths/``)."""

from __future__ import annotations

import csv
import heapq
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .core import PlannerConfig
from .grid2d import (
    MOVES,
    DelayModel,
    GridDomain,
    GridMap,
    calibrate_delay,
    feasible_anchors,
    load_movingai_file,
    scale_map,
)
from .planners import PLANNERS, SearchResult, Status

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "planner",
    "threads",
    "rc",
    "instance_id",
    "status",
    "time_s",
    "edge_evals",
    "expansions",
    "cost",
    "oracle_cost",
]


class ProblemGenerationError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    maps: List[str]
    scale: int = 1
    problems_per_map: int = 10
    planners: List[str] = field(default_factory=lambda: ["wastar", "pase", "epase", "gepase"])
    threads: List[int] = field(default_factory=lambda: [4, 8])
    w: float = 50
    epsilon: float = 50
    rc: List[float] = field(default_factory=lambda: [30])
    timeout: float = 30.0
    seed: int = 0
    output: str = "results"
    step: int = 25
    footprint: int = 32
    warmup: bool = True
    max_attempts: int = 200
    min_distance: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.rc, (int, float)):
            self.rc = [self.rc]
        if isinstance(self.threads, int):
            self.threads = [self.threads]
        if self.w > self.epsilon:
            raise ValueError(f"w ({self.w}) must not exceed epsilon ({self.epsilon})")
        if not self.maps:
            raise ValueError("at least one map is required")
        for name in ("scale", "problems_per_map", "step", "footprint", "max_attempts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.planners or not self.threads or not self.rc:
            raise ValueError("planners, threads and rc must be non-empty")
        if min(self.threads) < 1:
            raise ValueError("thread budgets must be >= 1")
        unknown = set(self.planners) - set(PLANNERS)
        if unknown:
            raise ValueError(f"unknown planners: {sorted(unknown)}")

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        base = os.path.dirname(os.path.abspath(path))
        data["maps"] = [m if os.path.isabs(m) else os.path.join(base, m) for m in data["maps"]]
        return cls(**data)


@dataclass
class ProblemInstance:
    id: int
    map_path: str
    start: Tuple[int, int]
    goal: Tuple[int, int]
    seed: int
    oracle_cost: int


@dataclass
class RunReport:
    planner: str
    threads: int
    rc: float
    instance_id: int
    status: str
    time_s: float
    edge_evals: int
    expansions: int
    cost: Optional[int]
    oracle_cost: int

    def row(self) -> Dict[str, object]:
        return asdict(self)


def dijkstra_oracle(
    grid: GridMap,
    start: Tuple[int, int],
    goal: Tuple[int, int],
    step: int = 25,
    footprint: int = 32,
) -> Optional[int]:
    """Exact optimal cost over the 8-move lattice, or ``None`` if unreachable.

    Uses plain Dijkstra on ``(x, y)`` tuples and the delay-free collision
    sweep; nothing is shared with the planners' search code.
    """
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    if start == goal:
        return 0
    domain = GridDomain(grid, goal, step=step, footprint=footprint)
    dist = {start: 0}
    heap = [(0, start)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == goal:
            return d
        done.add(u)
        for a in range(len(MOVES)):
            out = domain.move(u[0], u[1], a)
            if out is None:
                continue
            v = (out[0], out[1])
            nd = d + out[2]
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return None


def _load(path: str, scale: int) -> GridMap:
    return scale_map(load_movingai_file(path), scale)


def sample_problems(
    grid: GridMap,
    count: int,
    rng: np.random.Generator,
    step: int,
    footprint: int,
    max_attempts: int,
    min_distance: float = 0.0,
) -> List[Tuple[Tuple[int, int], Tuple[int, int], int]]:
    """Random solvable ``(start, goal, oracle_cost)`` triples on one map.

    Goals are drawn from the start's move lattice so the exact goal cell is
    reachable in principle; the oracle confirms it. Pairs closer than
    ``min_distance`` cells are rejected.
    """
    free = feasible_anchors(grid, footprint)
    anchors = np.argwhere(free)
    out = []
    attempts = 0
    while len(out) < count:
        if attempts >= max_attempts * count or len(anchors) < 2:
            raise ProblemGenerationError(
                f"map {grid.name!r}: found {len(out)}/{count} solvable start-goal pairs "
                f"after {attempts} attempts"
            )
        attempts += 1
        sy, sx = anchors[rng.integers(len(anchors))]
        on_lattice = ((anchors[:, 0] - sy) % step == 0) & ((anchors[:, 1] - sx) % step == 0)
        far = (anchors[:, 0] - sy) ** 2 + (anchors[:, 1] - sx) ** 2 >= min_distance**2
        lattice = anchors[on_lattice & far]
        if len(lattice) < 2:
            continue
        gy, gx = lattice[rng.integers(len(lattice))]
        start, goal = (int(sx), int(sy)), (int(gx), int(gy))
        if start == goal:
            continue
        cost = dijkstra_oracle(grid, start, goal, step, footprint)
        if cost is None:
            continue
        out.append((start, goal, cost))
    return out


def generate_problems(config: ExperimentConfig) -> List[ProblemInstance]:
    problems: List[ProblemInstance] = []
    for mi, path in enumerate(config.maps):
        grid = _load(path, config.scale)
        seed = config.seed * 1000 + mi
        rng = np.random.default_rng(seed)
        triples = sample_problems(
            grid,
            config.problems_per_map,
            rng,
            config.step,
            config.footprint,
            config.max_attempts,
            config.min_distance,
        )
        for start, goal, cost in triples:
            problems.append(ProblemInstance(len(problems), path, start, goal, seed, cost))
    return problems


def save_problems(problems: Sequence[ProblemInstance], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([asdict(p) for p in problems], fh, indent=1)


def load_problems(path: str) -> List[ProblemInstance]:
    with open(path) as fh:
        raw = json.load(fh)
    return [
        ProblemInstance(
            id=r["id"],
            map_path=r["map_path"],
            start=tuple(r["start"]),
            goal=tuple(r["goal"]),
            seed=r["seed"],
            oracle_cost=r["oracle_cost"],
        )
        for r in raw
    ]


def run_one(
    planner: str,
    problem: ProblemInstance,
    grid: GridMap,
    delay: Optional[DelayModel],
    planner_config: PlannerConfig,
    step: int,
    footprint: int,
) -> Tuple[SearchResult, GridDomain]:
    domain = GridDomain(grid, problem.goal, step=step, footprint=footprint, delay=delay)
    start = domain.state_id(*problem.start)
    return PLANNERS[planner](domain, start, planner_config), domain


def _cells(config: ExperimentConfig) -> List[Tuple[str, int]]:
    cells = []
    for name in config.planners:
        budgets = [1] if name == "wastar" else config.threads
        cells.extend((name, t) for t in budgets)
    return cells


def write_path(directory: str, report: RunReport, result: SearchResult, domain: GridDomain) -> str:
    os.makedirs(directory, exist_ok=True)
    label = f"{report.planner}-t{report.threads}-rc{_fmt_rc(report.rc)}"
    path = os.path.join(directory, f"{report.instance_id}_{label}.txt")
    with open(path, "w") as fh:
        for s in result.path.states:
            x, y = domain.coords(s)
            fh.write(f"{x} {y}\n")
    return path


def _fmt_rc(rc: float) -> str:
    return str(int(rc)) if float(rc).is_integer() else str(rc)


def run_experiment(
    config: ExperimentConfig,
    problems: Optional[List[ProblemInstance]] = None,
    write: bool = True,
) -> Tuple[List[RunReport], Dict]:
    """Run every (rc, planner, thread budget) cell on every problem.

    Runs are sequential. Each cell gets one discarded warm-up run on the first
    problem when ``config.warmup`` is set. Timeouts are recorded, never fatal.
    """
    if problems is None:
        problems = generate_problems(config)
    grids: Dict[str, GridMap] = {}
    for p in problems:
        if p.map_path not in grids:
            grids[p.map_path] = _load(p.map_path, config.scale)

    reports: List[RunReport] = []
    paths_dir = os.path.join(config.output, "paths")
    for rc in config.rc:
        delays = {
            mp: calibrate_delay(g, rc, config.step, config.footprint, seed=config.seed)
            for mp, g in grids.items()
        }
        for mp, d in delays.items():
            log.info("rc=%s %s: cheap %.1f us, spin %d iterations", rc, os.path.basename(mp),
                     d.cheap_mean_s * 1e6, d.iterations)
        for name, threads in _cells(config):
            pcfg = PlannerConfig(
                w=config.w,
                epsilon=config.epsilon,
                num_threads=threads,
                timeout=config.timeout,
                tie_break_seed=config.seed,
            )
            if config.warmup and problems:
                p = problems[0]
                run_one(name, p, grids[p.map_path], delays[p.map_path], pcfg,
                        config.step, config.footprint)
            for p in problems:
                result, domain = run_one(name, p, grids[p.map_path], delays[p.map_path], pcfg,
                                         config.step, config.footprint)
                report = RunReport(
                    planner=name,
                    threads=threads,
                    rc=rc,
                    instance_id=p.id,
                    status=result.status.value,
                    time_s=result.stats.wall_time,
                    edge_evals=result.stats.edge_evaluations,
                    expansions=result.stats.state_expansions,
                    cost=result.cost,
                    oracle_cost=p.oracle_cost,
                )
                reports.append(report)
                log.info("%s t=%d rc=%s #%d %s %.3fs evals=%d cost=%s",
                         name, threads, rc, p.id, report.status, report.time_s,
                         report.edge_evals, report.cost)
                if write and result.status is Status.SOLVED:
                    write_path(paths_dir, report, result, domain)

    summary = aggregate(reports)
    if write:
        os.makedirs(config.output, exist_ok=True)
        write_runs_csv(reports, os.path.join(config.output, "runs.csv"))
        with open(os.path.join(config.output, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return reports, summary


def write_runs_csv(reports: Sequence[RunReport], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in reports:
            row = r.row()
            row["time_s"] = repr(r.time_s)
            row["cost"] = "" if r.cost is None else r.cost
            writer.writerow(row)


def read_runs_csv(path: str) -> List[RunReport]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                RunReport(
                    planner=row["planner"],
                    threads=int(row["threads"]),
                    rc=float(row["rc"]),
                    instance_id=int(row["instance_id"]),
                    status=row["status"],
                    time_s=float(row["time_s"]),
                    edge_evals=int(row["edge_evals"]),
                    expansions=int(row["expansions"]),
                    cost=int(row["cost"]) if row["cost"] else None,
                    oracle_cost=int(row["oracle_cost"]),
                )
            )
    return out


def aggregate(reports: Sequence[RunReport]) -> Dict:
    """Per-rc means over instances solved by every (planner, threads) cell.

    Layout: ``{"by_rc": {rc: {planner: {threads: means}}}}``. Means use
    ``math.fsum`` so they do not depend on row order.
    """
    by_rc: Dict[str, Dict] = {}
    common_out: Dict[str, List[int]] = {}
    for rc in sorted({r.rc for r in reports}):
        rows = [r for r in reports if r.rc == rc]
        cells: Dict[Tuple[str, int], List[RunReport]] = {}
        for r in rows:
            cells.setdefault((r.planner, r.threads), []).append(r)
        instances = {r.instance_id for r in rows}
        common = set(instances)
        for cell_rows in cells.values():
            common &= {r.instance_id for r in cell_rows if r.status == Status.SOLVED.value}
        table: Dict[str, Dict[str, Dict[str, float]]] = {}
        for (planner, threads), cell_rows in sorted(cells.items()):
            used = [r for r in cell_rows if r.instance_id in common]
            n = len(used)
            entry = {
                "n": n,
                "solved": sum(r.status == Status.SOLVED.value for r in cell_rows),
                "runs": len(cell_rows),
            }
            if n:
                entry["mean_time_s"] = math.fsum(r.time_s for r in used) / n
                entry["mean_edge_evals"] = math.fsum(r.edge_evals for r in used) / n
                entry["mean_expansions"] = math.fsum(r.expansions for r in used) / n
                entry["mean_cost"] = math.fsum(r.cost for r in used) / n
                entry["mean_oracle_cost"] = math.fsum(r.oracle_cost for r in used) / n
            table.setdefault(planner, {})[str(threads)] = entry
        key = _fmt_rc(rc)
        by_rc[key] = table
        common_out[key] = sorted(common)
    return {"by_rc": by_rc, "common_instances": common_out}
