"""Optimal contract selection.

For a fixed reputation weight the operator's best contract pays no boost and
sets ``h = b * x_bar / omega``; the weight itself is best set to 1. The
closed-form results here are cross-checked by :func:`grid_search_contract`,
which lets the sensor best-respond through the exact game tree.

When the sensor is indifferent between several efforts it is assumed to pick
the one the operator prefers. At ``omega = 1`` this makes the optimal contract
incentivize ``x*`` in both stages, whereas :func:`omega_objective` keeps
effort ``x_bar`` in stage 1 for every weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import gametree
from .equilibrium import (
    EquilibriumProfile,
    effw,
    mixed_profile,
    operator_eu,
    sensor_eu,
    stage1_mixed,
    stage2_mixed,
)
from .model import ContractParams, GameConfig, ValidityReport, benefit, effort_star, regime_condition, validate_config

BOUNDARY_RTOL = 1e-12
# participation binds exactly at the optimum, so allow rounding noise
IR_ATOL = 1e-12


def _ir(u: float) -> bool:
    return u >= -IR_ATOL


@dataclass(frozen=True)
class CaseLabel:
    label: str
    h_range: str
    x1: float
    x2: float
    value: float
    mixed_exists: bool = True


@dataclass
class OptimalContract:
    contract: ContractParams
    x1: float
    x2: float
    profile: EquilibriumProfile | None
    operator_value: float
    sensor_value: float
    regime_ok: bool
    ir_ok: bool
    case: CaseLabel | None = None
    method: str = "closed-form"

    @property
    def realized_value(self) -> float:
        """What the operator actually gets: the contract value, or 0 if the operator opts out."""
        if self.profile is None or not self.profile.valid or not self.ir_ok:
            return 0.0
        return self.operator_value

    def row(self) -> dict:
        prof = self.profile
        probs = prof.probabilities if prof is not None else (math.nan,) * 4
        return {
            "omega": self.contract.omega,
            "h": self.contract.h,
            "gamma": self.contract.gamma,
            "x1": self.x1,
            "x2": self.x2,
            "p1": probs[0],
            "p2": probs[1],
            "q1": probs[2],
            "q2": probs[3],
            "operator_value": self.operator_value,
            "sensor_value": self.sensor_value,
            "regime_ok": self.regime_ok,
            "ir_ok": self.ir_ok,
        }


def validate_contract(cfg: GameConfig, contract: ContractParams, x1: float, x2: float) -> ValidityReport:
    """Config checks plus existence, probability-range and participation checks for a contract."""
    report = validate_config(cfg)
    report.mixed_exists = contract.omega * contract.h > cfg.C
    if not report.mixed_exists:
        report.diagnostics.append(("ωh≤C", contract.omega * contract.h - cfg.C))
        report.probs_in_range = False
        report.operator_ir = True
        report.sensor_ir = True
        return report
    prof = mixed_profile(cfg, contract, x1, x2)
    report.probs_in_range = all(0 <= v <= 1 for v in prof.probabilities)
    for name, v in zip(("p1", "p2", "q1", "q2"), prof.probabilities):
        if not 0 <= v <= 1:
            report.diagnostics.append((f"{name} outside [0, 1]", v))
    u_op = operator_eu(cfg, contract, x1, x2)
    u_s = sensor_eu(cfg, contract, x1, x2)
    report.operator_ir = _ir(u_op)
    report.sensor_ir = _ir(u_s)
    if not report.operator_ir:
        report.diagnostics.append(("operator IR violated", u_op))
    if not report.sensor_ir:
        report.diagnostics.append(("sensor IR violated", u_s))
    return report


def case_boundaries(cfg: GameConfig, omega: float) -> tuple[float, float]:
    """``(b x_bar / effw, b x_bar / omega)``: where the sensor's stage-1 and stage-2 effort incentives switch."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    cost = cfg.b * cfg.x_bar
    return cost / effw(omega, cfg.delta), cost / omega


def _close(a, b):
    return abs(a - b) <= BOUNDARY_RTOL * max(1.0, abs(b))


def _star_stage(cfg: GameConfig) -> float:
    """Operator's utility from one stage that incentivizes ``x*`` at ``h = b x_bar / weight``.

    A zero ``x*`` makes the stage degenerate: nothing is verified, so no
    verification cost is paid either.
    """
    xs = effort_star(cfg)
    if xs == 0:
        return 0.0
    return -cfg.C + (1 - cfg.C / (cfg.b * cfg.x_bar)) * (benefit(cfg, xs) - cfg.b * xs)


def case_analysis(cfg: GameConfig, omega: float, h: float) -> CaseLabel:
    """Classify ``h`` into Cases I-V and evaluate the operator's utility there (``gamma = 0``).

    Each case's value comes from its own closed form; at ``omega = 1`` the
    two boundaries coincide and the point is reported as Case IV.
    """
    if h < 0:
        raise ValueError("h must be nonnegative")
    lo, hi = case_boundaries(cfg, omega)
    b, xb, C, d = cfg.b, cfg.x_bar, cfg.C, cfg.delta
    e = effw(omega, d)
    s_bar = benefit(cfg, xb)
    xs = effort_star(cfg)
    star_stage = _star_stage(cfg)
    if _close(h, hi):
        label, rng = "IV", f"h = b*x_bar/omega = {hi:.12g}"
        if omega < 1:
            x1, x2 = xb, xs
            value = -C + (1 - omega / e * C / (b * xb)) * (s_bar - b * xb * e / omega) + d * star_stage
        else:
            x1, x2 = xs, xs
            value = (1 + d) * star_stage
    elif _close(h, lo):
        label, rng = "II", f"h = b*x_bar/effw = {lo:.12g}"
        x1, x2 = xs, 0.0
        value = star_stage
    elif h < lo:
        label, rng = "I", f"h < {lo:.12g}"
        x1, x2, value = 0.0, 0.0, 0.0
    elif h < hi:
        label, rng = "III", f"{lo:.12g} < h < {hi:.12g}"
        x1, x2 = xb, 0.0
        value = -C + (1 - C / (e * h)) * (s_bar - e * h)
    else:
        label, rng = "V", f"h > {hi:.12g}"
        x1, x2 = xb, xb
        value = (-(1 + d) * C + (1 - C / (e * h)) * (s_bar - e * h)
                 + d * (1 - C / (omega * h)) * (s_bar - omega * h))
    exists = omega * h > C
    if not exists:
        value = 0.0
    return CaseLabel(label, rng, x1, x2, value, exists)


def case_iii_slope(cfg: GameConfig, omega: float, h: float) -> float:
    """d(operator utility)/dh inside Case III."""
    e = effw(omega, cfg.delta)
    return (cfg.C * benefit(cfg, cfg.x_bar) - (h * e) ** 2) / (h * h * e)


def case_v_slope(cfg: GameConfig, omega: float, h: float) -> float:
    """d(operator utility)/dh inside Case V, differentiated from the Case-V utility itself."""
    e = effw(omega, cfg.delta)
    d = cfg.delta
    return cfg.C * benefit(cfg, cfg.x_bar) / (h * h) * (1 / e + d / omega) - (1 + d)


def omega_objective(cfg: GameConfig, omega: float) -> float:
    """Operator utility at ``h = b x_bar / omega``, ``gamma = 0``, efforts ``(x_bar, x*)``."""
    if not 0 < omega <= 1:
        raise ValueError("omega must lie in (0, 1]")
    b, xb, C, d = cfg.b, cfg.x_bar, cfg.C, cfg.delta
    f = effw(omega, d) / omega
    return -C + (1 - C / (f * b * xb)) * (benefit(cfg, xb) - b * xb * f) + d * _star_stage(cfg)


def omega_objective_slope(cfg: GameConfig, omega: float) -> float:
    """Analytic d(omega_objective)/d(omega)."""
    cost = cfg.b * cfg.x_bar
    f = effw(omega, cfg.delta) / omega
    df = -(1 + cfg.delta) / omega**2
    return -cost * df * (1 - benefit(cfg, cfg.x_bar) * cfg.C / (f * f * cost * cost))


def optimal_contract_given_omega(cfg: GameConfig, omega: float) -> OptimalContract:
    if not 0 < omega <= 1:
        raise ValueError("omega must lie in (0, 1]; at omega = 0 the optimal h is unbounded")
    h = cfg.b * cfg.x_bar / omega
    contract = ContractParams(h=h, gamma=0.0, omega=omega)
    xs = effort_star(cfg)
    x1 = cfg.x_bar if omega < 1 else xs
    profile = mixed_profile(cfg, contract, x1, xs)
    u_op = operator_eu(cfg, contract, x1, xs)
    u_s = sensor_eu(cfg, contract, x1, xs)
    return OptimalContract(
        contract=contract,
        x1=x1,
        x2=xs,
        profile=profile,
        operator_value=u_op,
        sensor_value=u_s,
        regime_ok=regime_condition(cfg),
        ir_ok=_ir(u_op) and _ir(u_s),
        case=case_analysis(cfg, omega, h),
    )


@dataclass
class SweepRow:
    omega: float
    objective: float
    optimum: OptimalContract

    @property
    def p1(self):
        return self.optimum.profile.p1

    @property
    def q1(self):
        return self.optimum.profile.q1


@dataclass
class OmegaSweep:
    omega_star: float
    rows: list[SweepRow] = field(default_factory=list)
    regime_ok: bool = True

    @property
    def increasing(self) -> bool:
        vals = [r.objective for r in self.rows]
        return all(b > a for a, b in zip(vals, vals[1:]))


def omega_grid(grid_n: int) -> np.ndarray:
    """``grid_n`` evenly spaced weights ``1/grid_n, 2/grid_n, ..., 1``."""
    if grid_n < 1:
        raise ValueError("grid_n must be at least 1")
    return np.arange(1, grid_n + 1) / grid_n


def optimal_omega(cfg: GameConfig, grid_n: int = 101) -> OmegaSweep:
    rows = [SweepRow(float(w), omega_objective(cfg, float(w)), optimal_contract_given_omega(cfg, float(w)))
            for w in omega_grid(grid_n)]
    best = max(r.objective for r in rows)
    star = max(r.omega for r in rows if r.objective == best)
    return OmegaSweep(star, rows, regime_condition(cfg))


def _lattice_point(cfg, contract, grid, tol):
    """Sensor best response over ``grid`` x ``grid`` at one contract, or None if no pair is sustainable."""
    st1 = [stage1_mixed(cfg, contract, x) for x in grid]
    st2 = [stage2_mixed(cfg, contract, x) for x in grid]
    ok1 = [i for i, s in enumerate(st1) if 0 <= s.p <= 1 and 0 <= s.q <= 1]
    ok2 = [j for j, s in enumerate(st2) if 0 <= s.p <= 1 and 0 <= s.q <= 1]
    if not ok1 or not ok2:
        return None
    pairs = [(i, j) for i in ok1 for j in ok2]
    idx1 = np.array([i for i, _ in pairs])
    idx2 = np.array([j for _, j in pairs])
    g = np.asarray(grid, dtype=float)
    ones = np.ones(4)
    x1 = g[idx1]
    q1 = np.array([st1[i].q for i in idx1])
    p1 = np.array([st1[i].p for i in idx1])
    x2 = np.outer(g[idx2], ones)
    q2 = np.outer([st2[j].q for j in idx2], ones)
    p2 = np.outer([st2[j].p for j in idx2], ones)
    sens, oper = gametree._batch(cfg, contract, x1, q1, p1, x2, q2, p2)
    # sensor picks its best efforts; ties go to the operator's preference
    top = sens.max()
    tied = np.flatnonzero(sens >= top - tol)
    k = tied[np.argmax(oper[tied])]
    i, j = pairs[k]
    return grid[i], grid[j], float(sens[k]), float(oper[k])


def grid_search_contract(cfg: GameConfig, h_grid, gamma_grid, omega_grid, effort_grid=None,
                         tol: float = 1e-9) -> OptimalContract:
    """Brute-force the contract lattice, letting the sensor best-respond via the game tree.

    At each ``(h, gamma, omega)`` the sensor's payoff for every effort pair is
    evaluated exactly under the mixed play those efforts induce; the sensor picks the
    best pair (operator-preferred among ties) and the operator's exact payoff
    there is the lattice value. Contracts without a mixed equilibrium
    (``omega * h <= C``) are worth the outside option, 0. The maximizer is
    found in lexicographic ``(h, gamma, omega)`` order, keeping the first on ties.
    """
    h_grid, gamma_grid, omega_grid = (sorted(set(map(float, g))) for g in (h_grid, gamma_grid, omega_grid))
    if effort_grid is None:
        effort_grid = np.linspace(0.0, cfg.x_bar, 51)
    effort_grid = sorted(set(map(float, effort_grid)))
    if not (h_grid and gamma_grid and omega_grid and effort_grid):
        raise ValueError("all grids must be nonempty")
    regime = regime_condition(cfg)
    best = None
    for h, gamma, omega in product(h_grid, gamma_grid, omega_grid):
        contract = ContractParams(h=h, gamma=gamma, omega=omega)
        found = None
        if omega > 0 and omega * h > cfg.C:
            found = _lattice_point(cfg, contract, effort_grid, tol)
        if found is None:
            cand = OptimalContract(contract, 0.0, 0.0, None, 0.0, 0.0, regime, True, None, "grid")
        else:
            x1, x2, u_s, u_op = found
            cand = OptimalContract(
                contract, x1, x2, mixed_profile(cfg, contract, x1, x2), u_op, u_s, regime,
                _ir(u_op) and _ir(u_s), case_analysis(cfg, omega, h) if gamma == 0 else None, "grid",
            )
        if best is None or cand.operator_value > best.operator_value:
            best = cand
    return best
