"""2D grid-world domain: a square robot footprint moving along 8 directions.

Costs and heuristics are integers (millicells) so queue ordering is exact.
Diagonal moves are labelled expensive and burn extra CPU, calibrated so that
they take ``rc`` times as long as a cardinal move on average.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import BinaryIO, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numba
import numpy as np

from .core import Action, ActionClass, EdgeKey

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OTWS")

SCALE = 1000

#: (dx, dy) per action index; the diagonals (odd indices) are expensive.
MOVES: Tuple[Tuple[int, int], ...] = (
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
)
MOVE_NAMES = ("E", "SE", "S", "SW", "W", "NW", "N", "NE")


class MapParseError(ValueError):
    def __init__(self, line: int, msg: str) -> None:
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True, eq=False)
class GridMap:
    """Occupancy grid indexed ``blocked[y, x]``; row 0 is the first map line."""

    blocked: np.ndarray
    name: str = ""

    @property
    def width(self) -> int:
        return self.blocked.shape[1]

    @property
    def height(self) -> int:
        return self.blocked.shape[0]

    def is_blocked(self, x: int, y: int) -> bool:
        if 0 <= x < self.width and 0 <= y < self.height:
            return bool(self.blocked[y, x])
        return True

    def blocked_count(self) -> int:
        return int(self.blocked.sum())

    def to_movingai(self) -> str:
        rows = ["".join("@" if b else "." for b in row) for row in self.blocked]
        header = ["type octile", f"height {self.height}", f"width {self.width}", "map"]
        return "\n".join(header + rows) + "\n"


def load_movingai_map(source: Union[BinaryIO, TextIO, bytes, str], name: str = "") -> GridMap:
    """Parse a MovingAI ``.map`` stream.

    ``source`` may be a binary or text stream, raw bytes, or the text itself.
    """
    if isinstance(source, bytes):
        text = source.decode("ascii")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("ascii") if isinstance(data, bytes) else data
    lines = text.splitlines()

    header = {}
    lineno = 0
    while True:
        if lineno >= len(lines):
            raise MapParseError(lineno, "missing 'map' line")
        raw = lines[lineno].strip()
        lineno += 1
        if not raw:
            continue
        if raw == "map":
            break
        parts = raw.split()
        if len(parts) != 2 or parts[0] not in ("type", "height", "width"):
            raise MapParseError(lineno, f"bad header line {raw!r}")
        if parts[0] in header:
            raise MapParseError(lineno, f"duplicate header field {parts[0]!r}")
        header[parts[0]] = parts[1]
    for key in ("type", "height", "width"):
        if key not in header:
            raise MapParseError(lineno, f"missing header field {key!r}")
    try:
        height = int(header["height"])
        width = int(header["width"])
    except ValueError:
        raise MapParseError(lineno, "height and width must be integers") from None
    if height < 1 or width < 1:
        raise MapParseError(lineno, "map dimensions must be positive")

    blocked = np.zeros((height, width), dtype=np.bool_)
    for y in range(height):
        if lineno + y >= len(lines):
            raise MapParseError(lineno + y + 1, f"expected {height} map rows, got {y}")
        row = lines[lineno + y].rstrip("\r\n")
        if len(row) < width:
            raise MapParseError(lineno + y + 1, f"row has {len(row)} cells, expected {width}")
        for x, ch in enumerate(row[:width]):
            if ch in BLOCKED:
                blocked[y, x] = True
            elif ch not in PASSABLE:
                raise MapParseError(lineno + y + 1, f"unknown glyph {ch!r} at column {x}")
        if row[width:].strip():
            raise MapParseError(lineno + y + 1, f"row longer than width {width}")
    for extra in range(lineno + height, len(lines)):
        if lines[extra].strip():
            raise MapParseError(extra + 1, "trailing data after map rows")
    return GridMap(blocked, name)


def load_movingai_file(path: Union[str, os.PathLike]) -> GridMap:
    with open(path, "rb") as fh:
        return load_movingai_map(fh, name=os.path.splitext(os.path.basename(path))[0])


def scale_map(grid: GridMap, factor: int) -> GridMap:
    if factor < 1:
        raise ValueError(f"scale factor must be >= 1, got {factor}")
    if factor == 1:
        return grid
    blocked = np.repeat(np.repeat(grid.blocked, factor, axis=0), factor, axis=1)
    return GridMap(blocked, grid.name)


def footprint_feasible(grid: GridMap, x: int, y: int, side: int) -> bool:
    """True iff the ``side`` x ``side`` square anchored at its minimum corner
    ``(x, y)`` lies inside the map on free cells."""
    if side < 1:
        raise ValueError("side must be >= 1")
    if x < 0 or y < 0 or x + side > grid.width or y + side > grid.height:
        return False
    return not grid.blocked[y : y + side, x : x + side].any()


def feasible_anchors(grid: GridMap, side: int) -> np.ndarray:
    """Boolean ``[y, x]`` mask of footprint-feasible anchor cells."""
    h, w = grid.blocked.shape
    out = np.zeros((h, w), dtype=np.bool_)
    if side > h or side > w:
        return out
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = grid.blocked.astype(np.int64).cumsum(0).cumsum(1)
    window = sat[side:, side:] - sat[:-side, side:] - sat[side:, :-side] + sat[:-side, :-side]
    out[: h - side + 1, : w - side + 1] = window == 0
    return out


@numba.njit(nogil=True, cache=True)
def _sweep(blocked, x, y, dx, dy, step, side):  # pragma: no cover - compiled
    h, w = blocked.shape
    for k in range(1, step + 1):
        px = x + k * dx
        py = y + k * dy
        if px < 0 or py < 0 or px + side > w or py + side > h:
            return False
        for j in range(py, py + side):
            for i in range(px, px + side):
                if blocked[j, i]:
                    return False
    return True


@numba.njit(nogil=True, cache=True)
def _spin(n, seed):  # pragma: no cover - compiled
    v = seed
    for _ in range(n):
        v = math.sqrt(v + 1.0) * 1.0000001
    return v


def sweep_feasible(grid: GridMap, x: int, y: int, dx: int, dy: int, step: int, side: int) -> bool:
    """Footprint check at each unit-step position from ``(x, y)`` along
    ``(dx, dy)``, endpoint included. Diagonal steps move both axes."""
    return bool(_sweep(grid.blocked, x, y, dx, dy, step, side))


def burn(iterations: int) -> None:
    """Spin the CPU for ``iterations`` dependent float operations, GIL released."""
    if iterations > 0:
        _spin(iterations, 0.5)


def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def move_costs(step: int) -> Tuple[int, int]:
    """Integer (cardinal, diagonal) move costs: ``SCALE * length`` rounded."""
    card = SCALE * step
    n = 2 * (SCALE * step) ** 2
    r = math.isqrt(n)
    # round half up: pick r+1 iff (r + 1/2)^2 <= n
    diag = r + 1 if (2 * r + 1) ** 2 <= 4 * n else r
    return card, diag


class EuclideanMetric:
    """``ceil(k * SCALE * euclid)`` in exact integer arithmetic.

    ``k <= 1`` is the largest ratio (to 1e-9) for which a diagonal move's
    rounded cost is still at least the metric across it. Rounding up keeps the
    triangle inequality exact, and together with the ``k`` bound the metric
    never exceeds the cost of any path.
    """

    DENOM = 10**9

    def __init__(self, step: int) -> None:
        _, diag = move_costs(step)
        q = self.DENOM
        num = max(1, step)
        p = math.isqrt((diag * q) ** 2 // (2 * SCALE**2 * num**2))
        self.num = min(q, p)
        self._factor = self.num**2 * SCALE**2

    def __call__(self, dx: int, dy: int) -> int:
        d2 = dx * dx + dy * dy
        if d2 == 0:
            return 0
        r = _ceil_sqrt(self._factor * d2)
        return -(-r // self.DENOM)


@dataclass
class DelayModel:
    """Extra spin iterations for expensive moves, plus how they were derived."""

    rc: float
    iterations: int = 0
    cheap_mean_s: float = 0.0
    expensive_sweep_mean_s: float = 0.0
    spin_rate: float = 0.0


def measure_spin_rate(iterations: int = 2_000_000, repeats: int = 3) -> float:
    burn(1000)
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        burn(iterations)
        best = min(best, time.perf_counter() - t)
    return iterations / best


def calibrate_delay(
    grid: GridMap,
    rc: float,
    step: int = 25,
    footprint: int = 32,
    samples: int = 400,
    seed: int = 0,
) -> DelayModel:
    """Time cheap and expensive moves from random feasible anchors and size the
    spin so expensive moves average ``rc`` times the cheap mean."""
    model = DelayModel(rc=rc)
    if rc <= 1:
        return model
    anchors = np.argwhere(feasible_anchors(grid, footprint))
    if len(anchors) == 0:
        anchors = np.array([[0, 0]])
    rng = np.random.default_rng(seed)
    picks = anchors[rng.integers(0, len(anchors), size=samples)]
    blocked = grid.blocked
    _sweep(blocked, 0, 0, 1, 0, 1, 1)

    def mean_time(indices: Sequence[int]) -> float:
        total = 0.0
        for i, (y, x) in enumerate(picks):
            dx, dy = MOVES[indices[i % len(indices)]]
            t = time.perf_counter()
            _sweep(blocked, int(x), int(y), dx, dy, step, footprint)
            total += time.perf_counter() - t
        return total / len(picks)

    model.cheap_mean_s = mean_time([0, 2, 4, 6])
    model.expensive_sweep_mean_s = mean_time([1, 3, 5, 7])
    model.spin_rate = measure_spin_rate()
    extra = rc * model.cheap_mean_s - model.expensive_sweep_mean_s
    model.iterations = max(0, int(round(extra * model.spin_rate)))
    return model


class GridDomain:
    """Planning domain over footprint anchors of a :class:`GridMap`.

    State ids are ``y * width + x``. The goal region is the single goal cell.
    ``expensive`` lists the action indices that carry the simulated delay.
    """

    def __init__(
        self,
        grid: GridMap,
        goal: Tuple[int, int],
        step: int = 25,
        footprint: int = 32,
        delay: Optional[DelayModel] = None,
        expensive: Iterable[int] = (1, 3, 5, 7),
    ) -> None:
        if step < 1 or footprint < 1:
            raise ValueError("step and footprint must be >= 1")
        self.grid = grid
        self.width = grid.width
        self.step = step
        self.footprint = footprint
        self.goal = self.state_id(*goal)
        self.goal_xy = (int(goal[0]), int(goal[1]))
        self.delay_iterations = delay.iterations if delay is not None else 0
        self.card_cost, self.diag_cost = move_costs(step)
        self.metric = EuclideanMetric(step)
        exp = set(expensive)
        self._actions = [
            Action(i, ActionClass.EXPENSIVE if i in exp else ActionClass.CHEAP, MOVE_NAMES[i])
            for i in range(len(MOVES))
        ]
        self._blocked = grid.blocked
        self._slow = [i in exp for i in range(len(MOVES))]

    def state_id(self, x: int, y: int) -> int:
        return int(y) * self.width + int(x)

    def coords(self, s: int) -> Tuple[int, int]:
        y, x = divmod(s, self.width)
        return x, y

    def actions(self) -> List[Action]:
        return list(self._actions)

    def move(self, x: int, y: int, action: int) -> Optional[Tuple[int, int, int]]:
        """Outcome of ``action`` from ``(x, y)`` without any simulated delay."""
        dx, dy = MOVES[action]
        if not _sweep(self._blocked, x, y, dx, dy, self.step, self.footprint):
            return None
        cost = self.card_cost if dx == 0 or dy == 0 else self.diag_cost
        return x + dx * self.step, y + dy * self.step, cost

    def generate_successor(self, edge: EdgeKey) -> Optional[Tuple[int, int]]:
        y, x = divmod(edge.state, self.width)
        out = self.move(x, y, edge.action)
        if self._slow[edge.action]:
            burn(self.delay_iterations)
        if out is None:
            return None
        nx, ny, cost = out
        return ny * self.width + nx, cost

    def pairwise_heuristic(self, s: int, t: int) -> int:
        sy, sx = divmod(s, self.width)
        ty, tx = divmod(t, self.width)
        return self.metric(sx - tx, sy - ty)

    def heuristic(self, s: int) -> int:
        return self.pairwise_heuristic(s, self.goal)

    def is_goal(self, s: int) -> bool:
        return s == self.goal
