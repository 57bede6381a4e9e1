"""Seeded Monte Carlo play of the two-stage game.

Every random draw comes from a counter-based stream keyed by the seed: the
uniform for episode ``e``, stage ``k``, draw ``j`` (0 = truthful?, 1 =
verified?) sits at counter ``4e + 2(k - 1) + j``. Episodes can therefore be
split across workers in any way without changing a single bit of output.

Means and variances are reduced with :func:`math.fsum` around the first
episode's value, which is exact-rounded and so independent of block order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .gametree import OUTCOMES, BehavioralStrategy, play_stage
from .model import ContractParams, GameConfig, benefit

TRAJECTORY_HEADER = ("episode", "stage", "truthful", "verified", "effort", "report",
                     "reputation", "payment", "u_sensor", "u_operator")


@dataclass(frozen=True)
class SimulationSpec:
    cfg: GameConfig
    contract: ContractParams
    strategy: BehavioralStrategy
    episodes: int
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SimulationResult:
    episodes: int
    sensor_mean: float
    operator_mean: float
    sensor_se: float
    operator_se: float
    # empirical frequencies, keys "T1", "V1", "T2", "V2"
    frequencies: dict = field(default_factory=dict)
    samples: tuple | None = field(default=None, repr=False, compare=False)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    shift = float(values[0])
    dev = values - shift
    mean = shift + math.fsum(dev.tolist()) / n
    if n == 1:
        return mean, 0.0
    resid = values - mean
    var = math.fsum((resid * resid).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def _blocks(n, workers):
    size = -(-n // workers)
    return [(s, min(size, n - s)) for s in range(0, n, size)]


def _run(spec: SimulationSpec, workers: int):
    cfg, c, st = spec.cfg, spec.contract, spec.strategy
    for x in (st.x1, *st.x2):
        if not 0 <= x <= cfg.x_bar:
            raise ValueError(f"effort {x} outside [0, {cfg.x_bar}]")
    params = (cfg.b, cfg.x_bar, cfg.delta, cfg.C, c.h, c.gamma, c.omega)
    s2 = [benefit(cfg, x) for x in st.x2]
    key = kernels.stream_key(spec.seed)

    def block(args):
        start, count = args
        return kernels.simulate_block(params, benefit(cfg, st.x1), st.x1, st.q1, st.p1,
                                      s2, st.x2, st.q2, st.p2, key, start, count)

    parts = _blocks(spec.episodes, max(1, workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(block, parts))
    else:
        results = [block(p) for p in parts]
    us = np.concatenate([r[0] for r in results])
    uo = np.concatenate([r[1] for r in results])
    ev = np.concatenate([r[2] for r in results])
    return us, uo, ev


def simulate(spec: SimulationSpec, workers: int = 1, keep_samples: bool = False) -> SimulationResult:
    us, uo, ev = _run(spec, workers)
    s_mean, s_se = _mean_se(us)
    o_mean, o_se = _mean_se(uo)
    freqs = {name: float(ev[:, k].sum()) / spec.episodes for k, name in enumerate(("T1", "V1", "T2", "V2"))}
    return SimulationResult(spec.episodes, s_mean, o_mean, s_se, o_se, freqs,
                            (us, uo, ev) if keep_samples else None)


@dataclass(frozen=True)
class TrajectoryRecord:
    episode: int
    stage: int
    truthful: bool
    verified: bool
    effort: float
    report: float
    reputation: float
    payment: float
    u_sensor: float
    u_operator: float


def trajectory_log(spec: SimulationSpec, max_episodes: int | None = None) -> list[TrajectoryRecord]:
    """Per-stage records for the first ``max_episodes`` episodes.

    Uses the same random stream as :func:`simulate`, so the rows replay
    exactly the episodes that simulation aggregates. ``reputation`` is the
    stage's assessed reputation and ``payment`` what was paid for the stage
    (at stage 2 this includes the carried part). Utilities are undiscounted.
    """
    n = spec.episodes if max_episodes is None else max_episodes
    if not 0 <= n <= spec.episodes:
        raise ValueError("max_episodes must lie in [0, episodes]")
    cfg, c, st = spec.cfg, spec.contract, spec.strategy
    key = kernels.stream_key(spec.seed)
    u = kernels.uniform01
    rows = []
    for e in range(n):
        base = 4 * e
        t1 = u(key, base) < st.q1
        v1 = u(key, base + 1) < st.p1
        i = OUTCOMES.index(("T" if t1 else "NT", "V" if v1 else "NV"))
        t2 = u(key, base + 2) < st.q2[i]
        v2 = u(key, base + 3) < st.p2[i]
        first = play_stage(cfg, c, 1, 0.0, st.x1, t1, v1)
        second = play_stage(cfg, c, 2, first.reputation, st.x2[i], t2, v2)
        for k, rec in ((1, first), (2, second)):
            rows.append(TrajectoryRecord(e, k, rec.truthful, rec.verified, rec.effort, rec.report,
                                         rec.reputation, rec.payment, rec.u_sensor, rec.u_operator))
    return rows


def write_trajectory_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for r in records:
            w.writerow([r.episode, r.stage, int(r.truthful), int(r.verified),
                        *(f"{v:.12g}" for v in (r.effort, r.report, r.reputation, r.payment,
                                                r.u_sensor, r.u_operator))])
