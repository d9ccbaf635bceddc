"""Synthetic robot-navigation corpus for the preference-flip experiment.

A double integrator (state ``x, vx, y, vy``; 1 s steps) starts at (1, 1),
tracks a jittered waypoint inside region A or B, then one inside C. The
controller is a saturated PD law with randomized gains. Trajectories last
20 s and are stored at one sample every 5 s, so the task's 10-second
windows span two samples: ``F[0,2]`` (visit A or B), ``F[2,4] G`` (reach
and stay in C), ``G[0,4]`` (avoid U, stay in E).

Three preference files share five disjoint pairs: ``pd1`` as drawn, ``pd2``
with one pair flipped, ``pd3`` with every pair flipped. Generation keeps only
trajectories that satisfy the task and a seed for which random search
realizes all three files, so each is learnable without trajectory synthesis.

Run ``python3 -m wstl.fixtures.robot`` to rewrite the files in place.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..data import PreferencePair, feedback_document, write_signal_csv
from ..encode import SemanticObjective
from ..formula import parse, to_pnf
from ..rct import Signal, build_rct, robustness
from ..solve import SamplerConfig, random_search

HERE = Path(__file__).parent / "robot"
START = (1.0, 1.0)
REGION_A = (8.0, 2.0)
REGION_B = (2.0, 8.0)
REGION_C = (8.0, 8.0)
DURATION_S = 20
SAMPLE_EVERY_S = 5
PAIRS = 5
FLIPPED_IN_PD2 = 2


def task_formula():
    return to_pnf(parse((HERE / "task.stl").read_text()))


def simulate(rng: np.random.Generator) -> Signal:
    via = REGION_A if rng.random() < 0.5 else REGION_B
    wp1 = np.array(via) + rng.uniform(-0.7, 0.7, 2)
    wp2 = np.array(REGION_C) + rng.uniform(-0.7, 0.7, 2)
    kp, kd, umax = rng.uniform(0.35, 0.6), rng.uniform(0.8, 1.2), rng.uniform(1.5, 2.5)
    q = np.array([START[0], 0.0, START[1], 0.0])
    xs, ys = [q[0]], [q[2]]
    for t in range(DURATION_S):
        target = wp1 if t < 10 else wp2
        pos, vel = q[[0, 2]], q[[1, 3]]
        u = np.clip(kp * (target - pos) - kd * vel, -umax, umax)
        # x' = vx, vx' = ux (same for y), exact 1 s discretization
        q = np.array([
            q[0] + q[1] + 0.5 * u[0], q[1] + u[0],
            q[2] + q[3] + 0.5 * u[1], q[3] + u[1],
        ])
        xs.append(q[0])
        ys.append(q[2])
    keep = slice(0, DURATION_S + 1, SAMPLE_EVERY_S)
    return Signal({"x": np.round(xs[keep], 4), "y": np.round(ys[keep], 4)})


def generate(seed: int = 3, samples: int = 10000):
    """Return ``(store, pd1, pd2, pd3)``; raises if the seed yields no learnable corpus."""
    f = task_formula()
    rng = np.random.default_rng(seed)
    store = {}
    while len(store) < 2 * PAIRS:
        sig = simulate(rng)
        if robustness(build_rct(f, 0, sig.length), sig) > 0:
            sid = f"traj{len(store)}"
            store[sid] = Signal(sig.channels, sid)
    pd1 = []
    for i in range(PAIRS):
        a, b = f"traj{2 * i}", f"traj{2 * i + 1}"
        pd1.append(PreferencePair(a, b, 1 if rng.random() < 0.5 else -1))
    pd2 = [p.flipped() if i == FLIPPED_IN_PD2 else p for i, p in enumerate(pd1)]
    pd3 = [p.flipped() for p in pd1]
    for name, data in (("pd1", pd1), ("pd2", pd2), ("pd3", pd3)):
        _, best = random_search(SemanticObjective(f, store, data), SamplerConfig(samples, seed))
        if best < PAIRS:
            raise RuntimeError(f"seed {seed}: {name} not realized by random search ({best}/{PAIRS})")
    return store, pd1, pd2, pd3


def write(seed: int = 3, out: Path = HERE) -> None:
    store, pd1, pd2, pd3 = generate(seed)
    manifest = {}
    for sid, sig in store.items():
        write_signal_csv(sig, out / f"{sid}.csv")
        manifest[sid] = f"{sid}.csv"
    (out / "signals.json").write_text(json.dumps({"signals": manifest}, indent=2) + "\n")
    for name, data in (("pd1", pd1), ("pd2", pd2), ("pd3", pd3)):
        (out / f"{name}.json").write_text(json.dumps(feedback_document(data)) + "\n")


if __name__ == "__main__":
    write()
