"""Exact evaluation of the two-stage game by enumerating every outcome path.

Each stage has four realizations, (truthful?, verified?), so a strategy
induces 16 paths. Nothing here uses the closed forms of
:mod:`sensorcontract.equilibrium`; that is what makes it an oracle for them.

Stage-2 play may depend on the stage-1 outcome. Outcomes are indexed
``0 = (T, V)``, ``1 = (T, NV)``, ``2 = (NT, V)``, ``3 = (NT, NV)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from . import kernels
from ._kernels_py import stage_outcome
from .equilibrium import EquilibriumProfile, PayoffPair
from .model import ContractParams, GameConfig, benefit, effort_star

OUTCOMES = (("T", "V"), ("T", "NV"), ("NT", "V"), ("NT", "NV"))


def _four(v):
    if np.ndim(v) == 0:
        return (float(v),) * 4
    v = tuple(float(x) for x in v)
    if len(v) != 4:
        raise ValueError("stage-2 entries need one value per stage-1 outcome")
    return v


@dataclass(frozen=True)
class BehavioralStrategy:
    """Sensor and operator play, possibly off equilibrium.

    Stage-2 fields accept a scalar (unconditional) or four values, one per
    stage-1 outcome in :data:`OUTCOMES` order.
    """

    x1: float
    q1: float
    p1: float
    x2: tuple = (0.0,) * 4
    q2: tuple = (1.0,) * 4
    p2: tuple = (0.0,) * 4

    def __post_init__(self):
        for name in ("x2", "q2", "p2"):
            object.__setattr__(self, name, _four(getattr(self, name)))
        for name in ("q1", "p1"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} is not a probability")
        for name in ("q2", "p2"):
            if not all(0 <= v <= 1 for v in getattr(self, name)):
                raise ValueError(f"{name} entries must be probabilities")

    @classmethod
    def from_profile(cls, profile: EquilibriumProfile) -> BehavioralStrategy:
        return cls(profile.x1, profile.q1, profile.p1, profile.x2, profile.q2, profile.p2)

    def replace(self, **kw) -> BehavioralStrategy:
        return BehavioralStrategy(**{**asdict(self), **kw})


def _params(cfg, contract):
    return (cfg.b, cfg.x_bar, cfg.delta, cfg.C, contract.h, contract.gamma, contract.omega)


def _check_efforts(cfg, strat):
    for x in (strat.x1, *strat.x2):
        if not 0 <= x <= cfg.x_bar:
            raise ValueError(f"effort {x} outside [0, {cfg.x_bar}]")


def exact_payoffs(cfg: GameConfig, contract: ContractParams, strat: BehavioralStrategy) -> PayoffPair:
    _check_efforts(cfg, strat)
    s2 = [benefit(cfg, x) for x in strat.x2]
    us, uo = kernels.tree_payoffs(
        _params(cfg, contract), benefit(cfg, strat.x1), strat.x1, strat.q1, strat.p1,
        s2, strat.x2, strat.q2, strat.p2,
    )
    return PayoffPair(us, uo, "game-tree")


def exact_payoffs_batch(cfg: GameConfig, contract: ContractParams, strategies) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`exact_payoffs` over a sequence of strategies."""
    n = len(strategies)
    x1 = np.empty(n)
    q1 = np.empty(n)
    p1 = np.empty(n)
    x2 = np.empty((n, 4))
    q2 = np.empty((n, 4))
    p2 = np.empty((n, 4))
    for r, st in enumerate(strategies):
        x1[r], q1[r], p1[r] = st.x1, st.q1, st.p1
        x2[r], q2[r], p2[r] = st.x2, st.q2, st.p2
    return _batch(cfg, contract, x1, q1, p1, x2, q2, p2)


def _batch(cfg, contract, x1, q1, p1, x2, q2, p2):
    if np.any((x1 < 0) | (x1 > cfg.x_bar)) or np.any((x2 < 0) | (x2 > cfg.x_bar)):
        raise ValueError(f"efforts must lie in [0, {cfg.x_bar}]")
    s1 = np.where(x1 > 0, cfg.benefit.value(x1), 0.0)
    s2 = np.where(x2 > 0, cfg.benefit.value(x2), 0.0)
    return kernels.tree_payoffs_batch(_params(cfg, contract), s1, x1, q1, p1, s2, x2, q2, p2)


@dataclass(frozen=True)
class StageRecord:
    truthful: bool
    verified: bool
    effort: float
    report: float
    reputation: float
    payment: float
    u_sensor: float
    u_operator: float


@dataclass(frozen=True)
class OutcomePath:
    stage1: StageRecord
    stage2: StageRecord
    probability: float

    @property
    def carried(self) -> float:
        return self.stage1.reputation


def play_stage(cfg, contract, stage, carried, x, truthful, verified) -> StageRecord:
    rep, pay, us, uo = stage_outcome(
        cfg.b, cfg.x_bar, cfg.C, contract.h, contract.gamma, contract.omega,
        stage, carried, x, benefit(cfg, x), truthful, verified,
    )
    return StageRecord(truthful, verified, x if truthful else 0.0, x if truthful else cfg.x_bar,
                       rep, pay, us, uo)


def enumerate_paths(cfg: GameConfig, contract: ContractParams, strat: BehavioralStrategy) -> list[OutcomePath]:
    """All 16 outcome paths with their probabilities."""
    _check_efforts(cfg, strat)
    paths = []
    for i, (a1, v1) in enumerate(OUTCOMES):
        t1, ver1 = a1 == "T", v1 == "V"
        pr1 = (strat.q1 if t1 else 1 - strat.q1) * (strat.p1 if ver1 else 1 - strat.p1)
        first = play_stage(cfg, contract, 1, 0.0, strat.x1, t1, ver1)
        for a2, v2 in OUTCOMES:
            t2, ver2 = a2 == "T", v2 == "V"
            pr2 = (strat.q2[i] if t2 else 1 - strat.q2[i]) * (strat.p2[i] if ver2 else 1 - strat.p2[i])
            second = play_stage(cfg, contract, 2, first.reputation, strat.x2[i], t2, ver2)
            paths.append(OutcomePath(first, second, pr1 * pr2))
    return paths


def _plans(cfg, effort_grid):
    """Pure stage plans in tie-break order: truthful efforts ascending, then falsify."""
    grid = sorted(set(float(x) for x in effort_grid))
    if not grid:
        raise ValueError("effort grid is empty")
    if grid[0] < 0 or grid[-1] > cfg.x_bar:
        raise ValueError(f"effort grid must lie in [0, {cfg.x_bar}]")
    return [(x, 1.0) for x in grid] + [(0.0, 0.0)]


def default_effort_grid(cfg: GameConfig, n: int = 51) -> list[float]:
    """``n`` evenly spaced efforts on ``[0, x_bar]`` plus ``x*``."""
    return sorted(set(np.linspace(0.0, cfg.x_bar, n).tolist()) | {effort_star(cfg)})


def _first_max(values, tol):
    best = max(values)
    return next(k for k, v in enumerate(values) if v >= best - tol)


def sensor_best_response(cfg: GameConfig, contract: ContractParams, operator_probs, effort_grid,
                         tol: float = 1e-12) -> tuple[BehavioralStrategy, float]:
    """Best pure sensor plan against fixed verification probabilities ``(p1, p2)``.

    ``p2`` may be a scalar or four outcome-conditioned values. Stage-2 plans
    are chosen separately for every stage-1 outcome (backward induction);
    ties go to the smallest truthful effort, truthful before falsifying.
    """
    p1, p2 = operator_probs
    p2 = _four(p2)
    plans = _plans(cfg, effort_grid)
    m = len(plans)
    # stage 2 is separable across stage-1 outcomes: for each outcome, fix stage 1
    # on that branch (q1, p1 in {0, 1}) and compare every stage-2 plan exactly
    best2 = []
    for i, (a1, v1) in enumerate(OUTCOMES):
        q1 = 1.0 if a1 == "T" else 0.0
        pv = 1.0 if v1 == "V" else 0.0
        x2 = np.zeros((m, 4))
        q2 = np.ones((m, 4))
        x2[:, i] = [x for x, _ in plans]
        q2[:, i] = [q for _, q in plans]
        xs = cfg.x_bar if a1 == "T" else 0.0
        sens, _ = _batch(cfg, contract, np.full(m, xs), np.full(m, q1), np.full(m, pv),
                         x2, q2, np.tile(p2, (m, 1)))
        best2.append(plans[_first_max(list(sens), tol)])
    x2 = tuple(x for x, _ in best2)
    q2 = tuple(q for _, q in best2)
    candidates = [BehavioralStrategy(x, q, p1, x2, q2, p2) for x, q in plans]
    sens, _ = exact_payoffs_batch(cfg, contract, candidates)
    k = _first_max(list(sens), tol)
    best = candidates[k]
    return best, exact_payoffs(cfg, contract, best).sensor


@dataclass
class Deviation:
    player: str
    stage: str
    plan: str
    gain: float


@dataclass
class DeviationReport:
    deviations: list[Deviation] = field(default_factory=list)
    max_gain: float = 0.0
    tol: float = 1e-9
    certified: bool = True

    @property
    def worst(self) -> Deviation | None:
        return max(self.deviations, key=lambda d: d.gain, default=None)

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "max_gain": self.max_gain,
            "tol": self.tol,
            "deviations": [asdict(d) for d in self.deviations],
        }


def _describe(x, q):
    return "NT" if q == 0.0 else f"T@{x:.6g}"


def check_equilibrium(cfg: GameConfig, contract: ContractParams, profile: EquilibriumProfile,
                      effort_grid=None, tol: float = 1e-9) -> DeviationReport:
    """Largest unilateral gain available to either player against ``profile``.

    The sensor's deviations are pure plans over ``effort_grid`` x {T, NT} at
    one stage (the other held at the profile) and jointly; the operator's are
    pure verify/skip plans, with stage-2 choices conditioned on the public
    stage-1 outcome. Gains are clipped at 0.
    """
    if effort_grid is None:
        effort_grid = default_effort_grid(cfg)
    effort_grid = sorted(set(effort_grid) | {profile.x1, profile.x2})
    base_strat = BehavioralStrategy.from_profile(profile)
    base = exact_payoffs(cfg, contract, base_strat)
    plans = _plans(cfg, effort_grid)
    report = DeviationReport(tol=tol)

    def add(player, stage, strat_list, labels, which):
        vals = exact_payoffs_batch(cfg, contract, strat_list)[which]
        ref = base.sensor if which == 0 else base.operator
        k = int(np.argmax(vals))
        report.deviations.append(Deviation(player, stage, labels[k], max(float(vals[k]) - ref, 0.0)))

    labels = [_describe(x, q) for x, q in plans]
    add("sensor", "1", [base_strat.replace(x1=x, q1=q) for x, q in plans], labels, 0)
    add("sensor", "2", [base_strat.replace(x2=x, q2=q) for x, q in plans], labels, 0)
    joint, value = sensor_best_response(cfg, contract, (profile.p1, profile.p2), effort_grid)
    report.deviations.append(Deviation(
        "sensor", "both",
        f"stage1={_describe(joint.x1, joint.q1)}; stage2=" + ",".join(_describe(x, q) for x, q in zip(joint.x2, joint.q2)),
        max(value - base.sensor, 0.0),
    ))

    op1 = [base_strat.replace(p1=p) for p in (1.0, 0.0)]
    add("operator", "1", op1, ["V", "NV"], 1)
    op2 = [base_strat.replace(p2=p) for p in (1.0, 0.0)]
    add("operator", "2", op2, ["V", "NV"], 1)
    combos = list(product((1.0, 0.0), repeat=5))
    opj = [base_strat.replace(p1=c[0], p2=c[1:]) for c in combos]
    names = ["stage1=" + ("V" if c[0] else "NV") + "; stage2=" + ",".join("V" if v else "NV" for v in c[1:])
             for c in combos]
    add("operator", "both", opj, names, 1)

    report.max_gain = max(d.gain for d in report.deviations)
    report.certified = report.max_gain <= tol
    return report


@dataclass
class IndifferenceGaps:
    sensor_stage1: float
    sensor_stage2: float
    operator_stage1: float
    operator_stage2: float
    degenerate_stage1: bool = False
    degenerate_stage2: bool = False

    def max_gap(self, include_degenerate: bool = False) -> float:
        gaps = []
        if include_degenerate or not self.degenerate_stage1:
            gaps += [self.sensor_stage1, self.operator_stage1]
        if include_degenerate or not self.degenerate_stage2:
            gaps += [self.sensor_stage2, self.operator_stage2]
        return max(gaps, default=0.0)


def indifference_gaps(cfg: GameConfig, contract: ContractParams, profile: EquilibriumProfile) -> IndifferenceGaps:
    """|T - NT| for the sensor and |V - NV| for the operator at each stage.

    Each side is the exact total payoff with that stage's action fixed and
    everything else as in ``profile``.
    """
    base = BehavioralStrategy.from_profile(profile)
    pairs = [
        base.replace(q1=1.0), base.replace(q1=0.0),
        base.replace(q2=1.0), base.replace(q2=0.0),
        base.replace(p1=1.0), base.replace(p1=0.0),
        base.replace(p2=1.0), base.replace(p2=0.0),
    ]
    sens, oper = exact_payoffs_batch(cfg, contract, pairs)
    return IndifferenceGaps(
        sensor_stage1=float(abs(sens[0] - sens[1])),
        sensor_stage2=float(abs(sens[2] - sens[3])),
        operator_stage1=float(abs(oper[4] - oper[5])),
        operator_stage2=float(abs(oper[6] - oper[7])),
        degenerate_stage1=profile.x1 == 0,
        degenerate_stage2=profile.x2 == 0,
    )
