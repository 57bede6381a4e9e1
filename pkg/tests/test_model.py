import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensorcontract.model import (
    BenefitSpec,
    ConfigError,
    ContractParams,
    DomainError,
    GameConfig,
    benefit,
    benefit_derivative,
    effort_star,
    effort_star_bound,
    regime_condition,
    reputation,
    validate_config,
)

from helpers import random_config, rng


def test_reference_config_is_in_regime(ref):
    report = validate_config(ref)
    assert report.regime_ok
    assert report.cost_exceeds_verification
    assert dict(report.diagnostics)["sqrt(C*S(x_bar))"] == pytest.approx(math.sqrt(0.4))


def test_low_cost_config_out_of_regime(ref):
    cfg = ref.replace(b=0.5)
    assert not validate_config(cfg).regime_ok
    assert not regime_condition(cfg)


@pytest.mark.parametrize("field,value,msg", [
    ("b", 0.0, "b must be positive"),
    ("b", -1.0, "b must be positive"),
    ("x_bar", 0.0, "x_bar must be positive"),
    ("C", -0.1, "C must be nonnegative"),
    ("delta", 0.0, "delta must lie"),
    ("delta", 1.5, "delta must lie"),
    ("b", math.nan, "b must be finite"),
    ("C", math.inf, "C must be finite"),
])
def test_config_rejects_bad_fields(ref, field, value, msg):
    with pytest.raises(ConfigError, match=msg):
        ref.replace(**{field: value})


@pytest.mark.parametrize("kwargs", [
    dict(family="cubic", a=1.0, shape=0.5),
    dict(family="power", a=0.0, shape=0.5),
    dict(family="power", a=1.0, shape=1.0),
    dict(family="satexp", a=1.0, shape=0.0),
    dict(family="satexp", a=1.0, shape=None),
])
def test_benefit_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        BenefitSpec(**kwargs)


def test_contract_validation():
    with pytest.raises(ValueError):
        ContractParams(h=-1.0)
    with pytest.raises(ValueError):
        ContractParams(h=1.0, gamma=-0.1)
    with pytest.raises(ValueError):
        ContractParams(h=1.0, omega=1.5)
    with pytest.raises(ValueError):
        ContractParams(h=1.0, floor=0.5)


def test_benefit_values(ref):
    assert benefit(ref, 0.0) == 0.0
    assert benefit(ref, 0.25) == 1.0
    log_cfg = ref.replace(benefit=BenefitSpec("log", 1.0), x_bar=2.0)
    assert benefit(log_cfg, math.e - 1) == pytest.approx(1.0, abs=1e-15)


def test_benefit_domain(ref):
    with pytest.raises(DomainError):
        benefit(ref, -0.01)
    with pytest.raises(DomainError):
        benefit(ref, 1.01)


def test_benefit_derivative_examples(ref):
    assert benefit_derivative(ref, 0.25) == pytest.approx(2.0)
    log_cfg = ref.replace(benefit=BenefitSpec("log", 1.0))
    assert benefit_derivative(log_cfg, 1.0) == pytest.approx(0.5)
    sat = ref.replace(benefit=BenefitSpec("satexp", 1.0, 1.0))
    assert benefit_derivative(sat, 0.0) == 1.0
    with pytest.raises(DomainError):
        benefit_derivative(ref, 0.0)


def test_effort_star_examples(ref):
    assert effort_star(ref) == pytest.approx(0.25, abs=1e-15)
    assert effort_star_bound(ref) == "interior"
    assert effort_star(ref.replace(b=1.0)) == 1.0
    log_cfg = ref.replace(benefit=BenefitSpec("log", 1.0))
    assert effort_star(log_cfg) == 0.0
    assert effort_star_bound(log_cfg) == "lower"
    assert effort_star_bound(ref.replace(b=0.5)) == "upper"


def test_reputation_linear(ref):
    c = ContractParams(h=4.0)
    assert reputation(ref, c, 0.0) == 0.0
    assert reputation(ref, c, 1.0) == 4.0
    assert reputation(ref, c, 0.25) == 1.0


def test_shape_on_fine_grid():
    r = rng(1)
    for _ in range(50):
        cfg = random_config(r)
        x = np.linspace(0.0, cfg.x_bar, 1000)
        s = np.array([benefit(cfg, v) for v in x])
        assert s[0] == 0.0
        assert np.all(np.diff(s) > 0)
        slopes = np.diff(s) / np.diff(x)
        assert np.all(np.diff(slopes) <= 1e-12 * np.abs(slopes[:-1]).max())


def test_derivative_matches_central_differences():
    r = rng(2)
    for _ in range(100):
        cfg = random_config(r)
        x = float(r.uniform(0.05, 0.95)) * cfg.x_bar
        eps = 1e-6 * cfg.x_bar
        fd = (benefit(cfg, x + eps) - benefit(cfg, x - eps)) / (2 * eps)
        assert benefit_derivative(cfg, x) == pytest.approx(fd, rel=1e-6)


def test_effort_star_first_order_condition():
    r = rng(3)
    hits = 0
    for _ in range(200):
        cfg = random_config(r)
        xs = effort_star(cfg)
        if effort_star_bound(cfg) == "interior":
            hits += 1
            assert abs(benefit_derivative(cfg, xs) - cfg.b) <= 1e-8
    assert hits > 20


@settings(max_examples=100, deadline=None)
@given(
    a=st.floats(0.1, 10.0),
    theta=st.floats(0.05, 0.95),
    b=st.floats(0.1, 10.0),
    x_bar=st.floats(0.1, 5.0),
)
def test_effort_star_within_bounds(a, theta, b, x_bar):
    cfg = GameConfig(b=b, x_bar=x_bar, C=0.1, delta=0.9, benefit=BenefitSpec("power", a, theta))
    xs = effort_star(cfg)
    assert 0.0 <= xs <= x_bar
    # the clamped point is the best the sensor-cost-adjusted surplus can do
    grid = np.linspace(0.0, x_bar, 201)
    surplus = cfg.benefit.value(grid) - b * grid
    assert benefit(cfg, xs) - b * xs >= surplus.max() - 1e-9 * max(1.0, abs(surplus.max()))
