#!/usr/bin/env python3
"""Writes the viewpoint-optimization fixture maps used by the test suite.

Each fixture is a partially explored map ('.' free, '#' obstacle, '?' unknown)
with one object whose bounding-box corners form the boundary set.
"""
import json
import random
import sys
from pathlib import Path

SIZES = [16, 20, 24, 32, 32, 40, 48, 56, 64, 64, 64, 64]


def make(seed, size):
    rng = random.Random(seed)
    g = [["." for _ in range(size)] for _ in range(size)]
    for x in range(size):
        g[0][x] = g[size - 1][x] = "#"
    for y in range(size):
        g[y][0] = g[y][size - 1] = "#"
    # wall segments and boxes
    for _ in range(size // 3):
        x, y = rng.randrange(1, size - 1), rng.randrange(1, size - 1)
        length = rng.randrange(3, max(4, size // 3))
        horizontal = rng.random() < 0.5
        for i in range(length):
            cx, cy = (x + i, y) if horizontal else (x, y + i)
            if 0 < cx < size - 1 and 0 < cy < size - 1:
                g[cy][cx] = "#"
    # an unexplored patch
    ux, uy = rng.randrange(1, size - 1), rng.randrange(1, size - 1)
    uw, uh = rng.randrange(2, size // 3 + 2), rng.randrange(2, size // 3 + 2)
    for y in range(uy, min(size - 1, uy + uh)):
        for x in range(ux, min(size - 1, ux + uw)):
            g[y][x] = "?"
    # the object
    w, h = rng.randrange(1, 4), rng.randrange(1, 4)
    ox, oy = rng.randrange(2, size - 2 - w), rng.randrange(2, size - 2 - h)
    for y in range(oy, oy + h):
        for x in range(ox, ox + w):
            g[y][x] = "#"
    # keep a free ring so the object can be seen
    for y in range(oy - 1, oy + h + 1):
        for x in range(ox - 1, ox + w + 1):
            if not (ox <= x < ox + w and oy <= y < oy + h) and g[y][x] == "#":
                g[y][x] = "."
    boundary = [[ox, oy], [ox + w - 1, oy], [ox, oy + h - 1], [ox + w - 1, oy + h - 1]]
    return {
        "name": f"vp_{seed:02d}_{size}x{size}",
        "resolution": 0.25,
        "fov": 1.5707963267948966,
        "d_desired": 1.0,
        "rows": ["".join(r) for r in g],
        "boundary": boundary,
    }


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/viewplan")
    out.mkdir(parents=True, exist_ok=True)
    for i, size in enumerate(SIZES):
        fx = make(100 + i, size)
        (out / f"{fx['name']}.json").write_text(json.dumps(fx, indent=1) + "\n")


if __name__ == "__main__":
    main()
