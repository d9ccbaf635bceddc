"""Random-search baseline and MILP warm start."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..encode import DEFAULT_V_BOUND, Problem, SemanticObjective
from ..formula import Valuation

CHUNK = 1024


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 10000
    seed: int = 0
    bounds: tuple[float, float] = (-DEFAULT_V_BOUND, DEFAULT_V_BOUND)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        lo, hi = self.bounds
        if not lo <= hi:
            raise ValueError(f"bad log-weight bounds {self.bounds}")


def random_search(problem: Problem | SemanticObjective, config: SamplerConfig) -> tuple[Valuation, float]:
    """Best of ``config.samples`` log-uniform valuations under the direct objective.

    Every table parameter is drawn, active or not, so the draw sequence
    depends only on the formula, the table and the seed. Ties keep the
    earliest sample.
    """
    objective = problem.objective if isinstance(problem, Problem) else problem
    pids = objective.table.ids
    rng = np.random.default_rng(config.seed)
    lo, hi = config.bounds
    best_score, best_logw = -np.inf, None
    remaining = config.samples
    while remaining:
        size = min(CHUNK, remaining)
        remaining -= size
        logw = rng.uniform(lo, hi, size=(size, len(pids)))
        weights = {pid: np.exp(logw[:, i]) for i, pid in enumerate(pids)}
        scores = objective.score_batch(weights, size)
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            best_score, best_logw = float(scores[k]), logw[k]
    valuation = Valuation({pid: float(np.exp(v)) for pid, v in zip(pids, best_logw)})
    return valuation, best_score


def rs_trials(problem: Problem | SemanticObjective, config: SamplerConfig, trials: int) -> list[float]:
    """Best RS objective for each of ``trials`` independent seeds spawned from ``config.seed``."""
    seqs = np.random.SeedSequence(config.seed).spawn(trials)
    out = []
    for seq in seqs:
        seed = int(seq.generate_state(1, dtype=np.uint64)[0])
        cfg = SamplerConfig(config.samples, seed, config.bounds)
        out.append(random_search(problem, cfg)[1])
    return out
