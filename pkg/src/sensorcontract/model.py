"""Environment and contract parameters shared by every other module.

A :class:`GameConfig` holds what the operator cannot change (effort cost,
effort cap, verification cost, discount, benefit curve). A
:class:`ContractParams` holds what the operator designs (reputation scale ``h``,
truthful-verification boost ``gamma``, reputation weight ``omega``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("power", "log", "satexp")


class ConfigError(ValueError):
    """Raised when a configuration or contract field is out of its domain."""


class DomainError(ValueError):
    """Raised when a function is evaluated outside its domain."""


def _finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class BenefitSpec:
    """Parametric operator benefit ``S`` with ``S(0) = 0``.

    ``power``:  ``a * x**shape`` with ``0 < shape < 1``
    ``log``:    ``a * log(1 + x)`` (``shape`` unused)
    ``satexp``: ``a * (1 - exp(-shape * x))`` with ``shape > 0``
    """

    family: str = "power"
    a: float = 2.0
    shape: float | None = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"benefit.family must be one of {FAMILIES}, got {self.family!r}")
        a = _finite("benefit.a", self.a)
        if a <= 0:
            raise ConfigError("benefit.a must be positive")
        object.__setattr__(self, "a", a)
        if self.family == "log":
            object.__setattr__(self, "shape", None)
            return
        if self.shape is None:
            raise ConfigError(f"benefit.shape is required for the {self.family} family")
        shape = _finite("benefit.shape", self.shape)
        if self.family == "power" and not 0 < shape < 1:
            raise ConfigError("benefit.shape must lie in (0, 1) for the power family")
        if self.family == "satexp" and shape <= 0:
            raise ConfigError("benefit.shape must be positive for the satexp family")
        object.__setattr__(self, "shape", shape)

    def value(self, x):
        """Evaluate S at ``x`` (scalar or array), no domain checks."""
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            out = self.a * np.power(x, self.shape)
        elif self.family == "log":
            out = self.a * np.log1p(x)
        else:
            out = -self.a * np.expm1(-self.shape * x)
        return float(out) if out.ndim == 0 else out

    def slope(self, x):
        """Evaluate S' at ``x`` (scalar or array), no domain checks."""
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            with np.errstate(divide="ignore"):
                out = self.a * self.shape * np.power(x, self.shape - 1.0)
        elif self.family == "log":
            out = self.a / (1.0 + x)
        else:
            out = self.a * self.shape * np.exp(-self.shape * x)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GameConfig:
    b: float
    x_bar: float
    C: float
    delta: float
    benefit: BenefitSpec = field(default_factory=BenefitSpec)

    def __post_init__(self):
        b = _finite("b", self.b)
        x_bar = _finite("x_bar", self.x_bar)
        C = _finite("C", self.C)
        delta = _finite("delta", self.delta)
        if b <= 0:
            raise ConfigError("b must be positive")
        if x_bar <= 0:
            raise ConfigError("x_bar must be positive")
        if C < 0:
            raise ConfigError("C must be nonnegative")
        if not 0 < delta <= 1:
            raise ConfigError("delta must lie in (0, 1]")
        if not isinstance(self.benefit, BenefitSpec):
            raise ConfigError("benefit must be a BenefitSpec")
        for name, v in (("b", b), ("x_bar", x_bar), ("C", C), ("delta", delta)):
            object.__setattr__(self, name, v)
        _check_shape(self.benefit, x_bar)

    def replace(self, **changes) -> GameConfig:
        fields = dict(b=self.b, x_bar=self.x_bar, C=self.C, delta=self.delta, benefit=self.benefit)
        fields.update(changes)
        return GameConfig(**fields)


@dataclass(frozen=True)
class ContractParams:
    """Operator design variables.

    ``h`` is the reputation of a maximal (verified or reported) effort, so the
    reputation of effort ``z`` is ``h * z / x_bar``. ``floor`` is the
    reputation assigned after detected falsification and is pinned to 0.
    """

    h: float
    gamma: float = 0.0
    omega: float = 1.0
    floor: float = 0.0

    def __post_init__(self):
        h = _finite("h", self.h)
        gamma = _finite("gamma", self.gamma)
        omega = _finite("omega", self.omega)
        floor = _finite("floor", self.floor)
        if h < 0:
            raise ConfigError("h must be nonnegative")
        if gamma < 0:
            raise ConfigError("gamma must be nonnegative")
        if not 0 <= omega <= 1:
            raise ConfigError("omega must lie in [0, 1]")
        if floor != 0:
            raise ConfigError("floor (reputation after detected falsification) must be 0")
        for name, v in (("h", h), ("gamma", gamma), ("omega", omega), ("floor", floor)):
            object.__setattr__(self, name, v)


@dataclass
class ValidityReport:
    """Named checks on a configuration, optionally extended with contract checks.

    Contract-level fields stay ``None`` when only a config was validated.
    """

    regime_ok: bool
    cost_exceeds_verification: bool
    mixed_exists: bool | None = None
    probs_in_range: bool | None = None
    operator_ir: bool | None = None
    sensor_ir: bool | None = None
    diagnostics: list[tuple[str, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        checks = (self.mixed_exists, self.probs_in_range, self.operator_ir, self.sensor_ir)
        return all(c is not False for c in checks)


def _check_shape(spec: BenefitSpec, x_bar: float, n: int = 1000) -> None:
    xs = np.linspace(0.0, x_bar, n)
    s = spec.value(xs)
    if s[0] != 0.0:
        raise ConfigError("benefit must satisfy S(0) = 0")
    steps = np.diff(s)
    if not np.all(steps > 0):
        raise ConfigError("benefit must be strictly increasing on [0, x_bar]")
    secants = steps / np.diff(xs)
    # rounding slack only; the parametric families are concave by construction
    if np.any(np.diff(secants) > 1e-9 * np.max(np.abs(secants))):
        raise ConfigError("benefit must be concave on [0, x_bar]")


def regime_condition(cfg: GameConfig) -> bool:
    """``b * x_bar > sqrt(C * S(x_bar))``, the regime where the optimal-contract results hold."""
    return cfg.b * cfg.x_bar > math.sqrt(cfg.C * cfg.benefit.value(cfg.x_bar))


def validate_config(cfg: GameConfig) -> ValidityReport:
    """Check regime and feasibility conditions of an already-constructed config.

    Field-level violations (signs, finiteness, benefit shape) are rejected
    when the :class:`GameConfig` is built, so they surface as
    :class:`ConfigError` before this runs.
    """
    s_bar = cfg.benefit.value(cfg.x_bar)
    cost = cfg.b * cfg.x_bar
    threshold = math.sqrt(cfg.C * s_bar)
    report = ValidityReport(
        regime_ok=cost > threshold,
        cost_exceeds_verification=cost > cfg.C,
    )
    report.diagnostics.append(("b*x_bar", cost))
    report.diagnostics.append(("sqrt(C*S(x_bar))", threshold))
    if not report.regime_ok:
        report.diagnostics.append(("regime violated: b*x_bar <= sqrt(C*S(x_bar))", cost - threshold))
    if not report.cost_exceeds_verification:
        report.diagnostics.append(("b*x_bar <= C", cost - cfg.C))
    return report


def benefit(cfg: GameConfig, x: float) -> float:
    if not 0 <= x <= cfg.x_bar:
        raise DomainError(f"effort {x!r} outside [0, {cfg.x_bar}]")
    if x == 0:
        return 0.0
    return cfg.benefit.value(x)


def benefit_derivative(cfg: GameConfig, x: float) -> float:
    """S'(x). At ``x = 0`` the right limit is used where it is finite."""
    if not 0 <= x <= cfg.x_bar:
        raise DomainError(f"effort {x!r} outside [0, {cfg.x_bar}]")
    if x == 0 and cfg.benefit.family == "power":
        raise DomainError("power-family derivative is unbounded at x = 0")
    return cfg.benefit.slope(x)


def _effort_star_unclamped(cfg: GameConfig) -> float:
    spec, b = cfg.benefit, cfg.b
    if spec.family == "power":
        return (spec.a * spec.shape / b) ** (1.0 / (1.0 - spec.shape))
    if spec.family == "log":
        return spec.a / b - 1.0
    rate = spec.a * spec.shape / b
    return math.log(rate) / spec.shape if rate > 0 else -math.inf


def effort_star(cfg: GameConfig) -> float:
    """Effort equating marginal benefit with marginal cost, clamped to ``[0, x_bar]``."""
    return min(max(_effort_star_unclamped(cfg), 0.0), cfg.x_bar)


def effort_star_bound(cfg: GameConfig) -> str:
    """Which constraint binds at :func:`effort_star`: ``interior``, ``lower`` or ``upper``."""
    raw = _effort_star_unclamped(cfg)
    if raw <= 0:
        return "lower"
    if raw >= cfg.x_bar:
        return "upper"
    return "interior"


def reputation(cfg: GameConfig, contract: ContractParams, z: float) -> float:
    """Linear reputation of an assessed effort ``z``."""
    return contract.h * z / cfg.x_bar


REFERENCE = GameConfig(b=2.0, x_bar=1.0, C=0.2, delta=0.9, benefit=BenefitSpec("power", 2.0, 0.5))
