"""Write synthetic city-style maps in MovingAI ``.map`` format.

Usage: python scripts/make_maps.py [--out data/maps] [--size 128] [--count 5]
"""

import argparse
import os

import numpy as np

from gepase.grid2d import GridMap


def city_map(size: int, rng: np.random.Generator, density: float = 0.3) -> np.ndarray:
    """Axis-aligned 'buildings' dropped until the target density is reached,
    with a one-cell free border so the map is not sealed at the edges."""
    blocked = np.zeros((size, size), dtype=bool)
    while blocked.mean() < density:
        w, h = rng.integers(size // 32 + 2, size // 6 + 3, size=2)
        x = rng.integers(1, size - w - 1)
        y = rng.integers(1, size - h - 1)
        blocked[y : y + h, x : x + w] = True
    # cut streets so large blocks stay connected
    for _ in range(size // 16):
        if rng.random() < 0.5:
            r = rng.integers(1, size - 3)
            blocked[r : r + 3, :] = False
        else:
            c = rng.integers(1, size - 3)
            blocked[:, c : c + 3] = False
    return blocked


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/maps")
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--count", type=int, default=5)
    parser.add_argument("--density", type=float, default=0.3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for i in range(args.count):
        grid = GridMap(city_map(args.size, rng, args.density), f"city{i}")
        path = os.path.join(args.out, f"city{i}_{args.size}.map")
        with open(path, "w") as fh:
            fh.write(grid.to_movingai())
        print(path, grid.blocked_count(), "blocked")


if __name__ == "__main__":
    main()
