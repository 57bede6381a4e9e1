"""Random instance generators shared by the test modules."""

import numpy as np

from sensorcontract.equilibrium import mixed_profile
from sensorcontract.model import BenefitSpec, ContractParams, GameConfig, regime_condition


def random_benefit(rng):
    family = rng.choice(["power", "log", "satexp"])
    a = float(rng.uniform(0.5, 4.0))
    if family == "power":
        return BenefitSpec("power", a, float(rng.uniform(0.2, 0.8)))
    if family == "log":
        return BenefitSpec("log", a, 1.0)
    return BenefitSpec("satexp", a, float(rng.uniform(0.3, 3.0)))


def random_config(rng, in_regime=None):
    while True:
        cfg = GameConfig(
            b=float(rng.uniform(0.3, 3.0)),
            x_bar=float(rng.uniform(0.5, 2.0)),
            C=float(rng.uniform(0.01, 0.6)),
            delta=float(rng.uniform(0.3, 1.0)),
            benefit=random_benefit(rng),
        )
        if in_regime is None or regime_condition(cfg) == in_regime:
            return cfg


def random_valid_instance(rng):
    """(cfg, contract, x1, x2, profile) with a valid mixed profile and both efforts positive."""
    while True:
        cfg = random_config(rng)
        omega = float(rng.uniform(0.05, 1.0))
        h = float(rng.uniform(cfg.C / omega, cfg.C / omega + 4.0 * cfg.b * cfg.x_bar))
        gamma = float(rng.choice([0.0, rng.uniform(0.0, 2.0)]))
        contract = ContractParams(h=h, gamma=gamma, omega=omega)
        x1, x2 = (float(v) for v in rng.uniform(0.0, cfg.x_bar, 2))
        if x1 == 0 or x2 == 0:
            continue
        prof = mixed_profile(cfg, contract, x1, x2)
        if prof.valid:
            return cfg, contract, x1, x2, prof


def rng(seed):
    return np.random.default_rng(seed)
