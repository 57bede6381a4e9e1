"""Stage payoffs, equilibria and closed-form expected utilities.

Stage utilities are combined with weights ``(1, delta)``. A sensor who
falsifies exerts no effort and reports ``x_bar``. A stage whose incentivized
effort is 0 is *degenerate*: the operator does not verify and the sensor
reports its (zero) effort, so that stage carries no verification cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .model import ContractParams, GameConfig, benefit, reputation

SENSOR_ACTIONS = ("T", "NT")
OPERATOR_ACTIONS = ("V", "NV")


def effw(omega: float, delta: float) -> float:
    """Total weight of stage-1 reputation: paid now and carried with weight ``1 - omega``."""
    return 1.0 + (1.0 - omega) * delta


@dataclass(frozen=True)
class StagePayoffMatrix:
    """2x2 stage game; ``entries[(s, o)] = (sensor utility, operator utility)``.

    ``withdrawn`` holds the payoffs when the operator pays nothing at all
    (keyed the same way); it is what the operator can always fall back to.
    """

    stage: int
    effort: float
    carried: float | None
    entries: dict
    withdrawn: dict

    def sensor(self, s, o):
        return self.entries[(s, o)][0]

    def operator(self, s, o):
        return self.entries[(s, o)][1]


def stage_payoff_matrix(cfg: GameConfig, contract: ContractParams, k: int, x_k: float,
                        R1_carried: float | None = None) -> StagePayoffMatrix:
    if k not in (1, 2):
        raise ValueError(f"stage index must be 1 or 2, got {k!r}")
    if k == 2 and R1_carried is None:
        raise ValueError("stage 2 needs the carried stage-1 reputation")
    s = benefit(cfg, x_k)
    cost = cfg.b * x_k
    h, g, w = contract.h, contract.gamma, contract.omega
    reps = {
        ("T", "V"): reputation(cfg, contract, x_k) + g,
        ("T", "NV"): reputation(cfg, contract, x_k),
        ("NT", "V"): 0.0,
        ("NT", "NV"): h,
    }
    entries, withdrawn = {}, {}
    for (a, v), rep in reps.items():
        pay = rep if k == 1 else (1.0 - w) * R1_carried + w * rep
        effort_cost = cost if a == "T" else 0.0
        gain = s if a == "T" else 0.0
        audit = cfg.C if v == "V" else 0.0
        entries[(a, v)] = (pay - effort_cost, gain - pay - audit)
        withdrawn[(a, v)] = (-effort_cost, gain - audit)
    return StagePayoffMatrix(k, x_k, R1_carried if k == 2 else None, entries, withdrawn)


def pure_nash(matrix: StagePayoffMatrix, operator_can_withdraw: bool = True) -> frozenset:
    """Pure equilibria of a stage game as ``(sensor action, operator action)`` pairs.

    With ``operator_can_withdraw`` the operator's strategy also chooses whether
    the payment scheme is in force (withdrawing pays nothing); a profile is
    reported under its verification action. This is the game in which the
    contract itself is a choice of the operator, and its only pure equilibrium
    is falsification without verification under a withdrawn scheme. Pass
    ``False`` to analyse the bare 2x2 table for a fixed contract.
    """
    ops = [(v, False) for v in OPERATOR_ACTIONS]
    if operator_can_withdraw:
        ops += [(v, True) for v in OPERATOR_ACTIONS]

    def pay(s, op):
        v, off = op
        return (matrix.withdrawn if off else matrix.entries)[(s, v)]

    found = set()
    for s, op in product(SENSOR_ACTIONS, ops):
        us, uo = pay(s, op)
        if any(pay(alt, op)[0] > us for alt in SENSOR_ACTIONS):
            continue
        if any(pay(s, alt)[1] > uo for alt in ops):
            continue
        found.add((s, op[0]))
    return frozenset(found)


@dataclass
class StageMixedStrategy:
    p: float
    q: float
    stage: int
    degenerate: bool = False
    valid: bool = True
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class EquilibriumProfile:
    p1: float
    p2: float
    q1: float
    q2: float
    x1: float
    x2: float
    valid: bool = True
    diagnostics: list[str] = field(default_factory=list)

    @property
    def probabilities(self):
        return (self.p1, self.p2, self.q1, self.q2)


def _mixed(cfg, contract, x, weight, stage):
    h, g = contract.h, contract.gamma
    if contract.omega == 0:
        raise ValueError("omega = 0: mixed play needs omega * h > C, which fails for every h")
    if h + g == 0:
        raise ValueError("degenerate contract: h + gamma = 0")
    if x == 0:
        return StageMixedStrategy(0.0, 1.0, stage, degenerate=True,
                                  diagnostics=["zero effort: operator does not verify"])
    p = (h - reputation(cfg, contract, x) + cfg.b * x / weight) / (h + g)
    q = (h - cfg.C / weight) / (h + g)
    out = StageMixedStrategy(p, q, stage)
    if not contract.omega * h > cfg.C:
        out.valid = False
        out.diagnostics.append("ωh≤C: sensor always falsifies, operator takes the outside option")
    for name, v in (("p", p), ("q", q)):
        if not 0 <= v <= 1:
            out.valid = False
            out.diagnostics.append(f"{name}{stage}={v:.12g} outside [0, 1]")
    return out


def stage2_mixed(cfg: GameConfig, contract: ContractParams, x2: float) -> StageMixedStrategy:
    return _mixed(cfg, contract, x2, contract.omega, 2)


def stage1_mixed(cfg: GameConfig, contract: ContractParams, x1: float) -> StageMixedStrategy:
    return _mixed(cfg, contract, x1, effw(contract.omega, cfg.delta), 1)


def mixed_profile(cfg: GameConfig, contract: ContractParams, x1: float, x2: float) -> EquilibriumProfile:
    st1 = stage1_mixed(cfg, contract, x1)
    st2 = stage2_mixed(cfg, contract, x2)
    diagnostics = st1.diagnostics + [d for d in st2.diagnostics if d not in st1.diagnostics]
    valid = st1.valid and st2.valid
    if not contract.omega * contract.h > cfg.C:
        valid = False
        note = "ωh≤C: sensor always falsifies, operator takes the outside option"
        if note not in diagnostics:
            diagnostics.append(note)
    return EquilibriumProfile(st1.p, st2.p, st1.q, st2.q, x1, x2, valid, diagnostics)


@dataclass(frozen=True)
class PayoffPair:
    sensor: float
    operator: float
    method: str = "closed-form"


def _check_contract(contract):
    if contract.h + contract.gamma == 0:
        raise ValueError("degenerate contract: h + gamma = 0")
    if contract.omega == 0:
        raise ValueError("omega must be positive")


def sensor_eu(cfg: GameConfig, contract: ContractParams, x1: float, x2: float) -> float:
    """Sensor's expected discounted utility when both stages are played at equilibrium."""
    _check_contract(contract)
    h, g, w, d = contract.h, contract.gamma, contract.omega, cfg.delta
    share = h / (h + g)
    boost = g * h / (h + g)
    R = lambda x: reputation(cfg, contract, x)  # noqa: E731
    if x1 > 0 and x2 > 0:
        return (1 + d) * boost + share * (effw(w, d) * R(x1) + w * d * R(x2) - cfg.b * x1 - d * cfg.b * x2)
    # degenerate stages drop their share of the boost and of the effort terms
    stage2 = w * boost + share * (w * R(x2) - cfg.b * x2) if x2 > 0 else 0.0
    if x1 == 0:
        return d * stage2
    return effw(w, d) * boost + share * (effw(w, d) * R(x1) - cfg.b * x1) + d * stage2


def operator_eu(cfg: GameConfig, contract: ContractParams, x1: float, x2: float) -> float:
    """Operator's expected discounted utility when both stages are played at equilibrium."""
    _check_contract(contract)
    h, g, w, d, C = contract.h, contract.gamma, contract.omega, cfg.delta, cfg.C
    e = effw(w, d)
    R = lambda x: reputation(cfg, contract, x)  # noqa: E731
    S = lambda x: benefit(cfg, x)  # noqa: E731
    first = (h - C / e) / (h + g) * (S(x1) - e * R(x1))
    second = (h - C / w) / (h + g) * (S(x2) - w * R(x2))
    if x1 > 0 and x2 > 0:
        return -(1 + d) * (g + C) * h / (h + g) + first + d * second
    stage2 = -(w * g + C) * h / (h + g) + second if x2 > 0 else 0.0
    if x1 == 0:
        return d * stage2
    return -(e * g + C) * h / (h + g) + first + d * stage2


def stage2_continuation(cfg: GameConfig, contract: ContractParams, R1: float, x2: float) -> PayoffPair:
    """Stage-2 expected utilities given the carried reputation ``R1``."""
    if R1 < 0:
        raise ValueError("carried reputation must be nonnegative")
    _check_contract(contract)
    h, g, w, C = contract.h, contract.gamma, contract.omega, cfg.C
    carried = (1 - w) * R1
    if x2 == 0:
        return PayoffPair(carried, -carried)
    R2 = reputation(cfg, contract, x2)
    sensor = carried + w * g * h / (h + g) + h / (h + g) * (w * R2 - cfg.b * x2)
    operator = -carried - w * h * (g + C / w) / (h + g) + (h - C / w) / (h + g) * (benefit(cfg, x2) - w * R2)
    return PayoffPair(sensor, operator)
