#!/usr/bin/env python3
"""Generate scenarios/forest.json: a 150 m square of scattered trees with
five landmines and one keep-out zone along the start-goal diagonal.

Deterministic: rerunning always reproduces the committed file.
"""

import json
import math
from pathlib import Path

import numpy as np

SEED = 2024
N_TREES = 210
BOUND = 75.0
TREE_SPACING = 3.6        # center-to-center, keeps corridors passable
TREE_RADIUS = (0.35, 0.7)
TREE_HEIGHT = (3.0, 6.0)
START = (-45.0, -45.0)
GOAL = (45.0, 45.0)
CLEAR_ENDPOINTS = 2.5
CLEAR_MINES = 2.0
ZONE = [[5.0, 5.0], [9.0, 5.0], [9.0, 9.0], [5.0, 9.0]]
ZONE_CLEAR = 1.5

# Landmines sit on (or a hair off) the straight diagonal so ignoring them
# would mean driving across one.
MINE_FRACTIONS = (0.15, 0.30, 0.45, 0.70, 0.85)
MINE_OFFSETS = (0.35, -0.35, 0.35, -0.35, 0.35)
MINE_RADIUS = 0.3


def mine_positions():
    sx, sy = START
    gx, gy = GOAL
    # unit normal to the diagonal
    nx, ny = -(gy - sy), gx - sx
    norm = math.hypot(nx, ny)
    nx, ny = nx / norm, ny / norm
    out = []
    for frac, off in zip(MINE_FRACTIONS, MINE_OFFSETS):
        x = sx + frac * (gx - sx) + off * nx
        y = sy + frac * (gy - sy) + off * ny
        out.append((round(x, 3), round(y, 3)))
    return out


def main():
    rng = np.random.default_rng(SEED)
    mines = mine_positions()
    zone_lo = min(p[0] for p in ZONE) - ZONE_CLEAR, min(p[1] for p in ZONE) - ZONE_CLEAR
    zone_hi = max(p[0] for p in ZONE) + ZONE_CLEAR, max(p[1] for p in ZONE) + ZONE_CLEAR

    trees = []
    lim = BOUND - 2.0
    while len(trees) < N_TREES:
        x, y = rng.uniform(-lim, lim, size=2)
        if math.hypot(x - START[0], y - START[1]) < CLEAR_ENDPOINTS:
            continue
        if math.hypot(x - GOAL[0], y - GOAL[1]) < CLEAR_ENDPOINTS:
            continue
        if any(math.hypot(x - mx, y - my) < CLEAR_MINES for mx, my in mines):
            continue
        if zone_lo[0] <= x <= zone_hi[0] and zone_lo[1] <= y <= zone_hi[1]:
            continue
        if any(math.hypot(x - tx, y - ty) < TREE_SPACING for tx, ty, _, _ in trees):
            continue
        r = rng.uniform(*TREE_RADIUS)
        h = rng.uniform(*TREE_HEIGHT)
        trees.append((round(float(x), 3), round(float(y), 3), round(float(r), 3), round(float(h), 2)))

    entities = [
        {
            "kind": "polygon", "category": "zone", "height": 0.0,
            "label": "red_zone", "vertices": ZONE, "color": [220, 50, 47],
        }
    ]
    entities += [
        {
            "kind": "disc", "category": "item", "center": [mx, my],
            "radius": MINE_RADIUS, "height": 0.05, "label": "landmine",
            "color": [180, 40, 40],
        }
        for mx, my in mines
    ]
    entities += [
        {
            "kind": "disc", "category": "static", "center": [x, y],
            "radius": r, "height": h, "label": "tree", "color": [60, 110, 60],
        }
        for x, y, r, h in trees
    ]

    doc = {
        "schema_version": 1,
        "name": "forest",
        "seed": 5,
        "bounds": [-BOUND, -BOUND, BOUND, BOUND],
        "start": [START[0], START[1], round(math.atan2(GOAL[1] - START[1], GOAL[0] - START[0]), 6)],
        "goals": [[GOAL[0], GOAL[1]]],
        "beware_list": ["landmine", "red_zone"],
        "grid": {"resolution": 0.15, "width": 1024, "height": 1024},
        "inflation": {"vehicle_width": 0.7, "safety_margin": 0.35},
        "episode": {"max_sim_time": 600.0},
        "entities": entities,
        "agents": [],
    }
    out = Path(__file__).resolve().parent.parent / "scenarios" / "forest.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out} ({len(trees)} trees, {len(mines)} mines)")


if __name__ == "__main__":
    main()
