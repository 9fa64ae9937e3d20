#!/usr/bin/env python3
"""Regenerates the bundled synthetic scenes. Output is deterministic."""

import math
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def write_rows(path, rows, frame_fmt="{:d}"):
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    with open(path, "w") as f:
        for frame, agent, x, y in rows:
            f.write(f"{frame_fmt.format(frame)}\t{agent}\t{x:.4f}\t{y:.4f}\n")


def head_on():
    # Two agents walking towards each other along the x axis at equal speed.
    rows = []
    for frame in range(26):
        d = 9.0 - 0.3 * frame
        rows.append((frame, 1, -d, 0.0))
        rows.append((frame, 2, d, 0.0))
    write_rows(HERE / "head_on.tsv", rows)


def crossing():
    # Agent 1 walks east, agent 2 walks north through the same point, agent 3 idles nearby.
    rows = []
    for frame in range(30):
        rows.append((frame, 1, -6.0 + 0.4 * frame, 0.0))
        rows.append((frame, 2, 0.0, -7.0 + 0.45 * frame))
        rows.append((frame, 3, 2.0 + 0.02 * math.sin(0.5 * frame), 1.5))
    write_rows(HERE / "crossing.tsv", rows)
    with open(HERE / "crossing_static.txt", "w") as f:
        f.write("kiosk\t-1.0\t2.0\n")
        f.write("bar\t3.0\t-2.5\n")


def curved(n_agents=8, frames=160, dt=0.4, seed=7):
    # Agents walk curved paths (constant preferred turn rate) across a plaza and steer
    # away from each other with a short-range repulsion.
    rng = np.random.default_rng(seed)
    spawn = np.sort(rng.integers(0, frames - 60, size=n_agents))
    life = rng.integers(45, 70, size=n_agents)
    angle0 = rng.uniform(0, 2 * math.pi, size=n_agents)
    pos = np.stack([7.0 * np.cos(angle0), 7.0 * np.sin(angle0)], axis=1)
    heading = angle0 + math.pi + rng.uniform(-0.6, 0.6, size=n_agents)
    speed = rng.uniform(1.0, 1.4, size=n_agents)
    turn = rng.choice([-1.0, 1.0], size=n_agents) * rng.uniform(0.10, 0.22, size=n_agents)
    rows = []
    for frame in range(frames):
        active = [i for i in range(n_agents) if spawn[i] <= frame < spawn[i] + life[i]]
        for i in active:
            rows.append((frame, i + 1, pos[i, 0], pos[i, 1]))
        new_pos = pos.copy()
        for i in active:
            push = np.zeros(2)
            for j in active:
                if i == j:
                    continue
                d = pos[i] - pos[j]
                r = np.linalg.norm(d)
                if r < 2.5:
                    push += d / (r + 1e-6) * (2.5 - r) * 0.6
            heading[i] += turn[i] * dt / 0.4
            v = speed[i] * np.array([math.cos(heading[i]), math.sin(heading[i])]) + push
            new_pos[i] = pos[i] + v * dt
        pos = new_pos
    write_rows(HERE / "curved_interaction.tsv", rows)


def eth_sample(n_agents=5, frames=40, seed=3):
    # ETH-style rows: frame ids in steps of 10, float-formatted ids, world coordinates.
    rng = np.random.default_rng(seed)
    rows = []
    for a in range(n_agents):
        start = int(rng.integers(0, 10))
        length = int(rng.integers(24, frames - start))
        p = rng.uniform(-4, 4, size=2)
        v = rng.uniform(-1.2, 1.2, size=2) * 0.4
        for k in range(length):
            noise = rng.normal(0, 0.02, size=2)
            rows.append(((start + k) * 10, a + 1, p[0] + noise[0], p[1] + noise[1]))
            p = p + v
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    with open(HERE / "eth_mini.txt", "w") as f:
        for frame, agent, x, y in rows:
            f.write(f"{frame:.1f}\t{agent:.1f}\t{x:.2f}\t{y:.2f}\n")


if __name__ == "__main__":
    head_on()
    crossing()
    curved()
    eth_sample()
