"""The compiled and pure-Python kernels must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sensorcontract import kernels

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
PARAMS = (2.0, 1.0, 0.9, 0.2, 4.0, 0.3, 0.5)


def test_python_fallback_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_mix64_known_values():
    py = BACKENDS["python"]
    # SplitMix64 finalizer reference outputs
    assert py.mix64(0) == 0
    assert py.mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    u = [py.uniform01(py.stream_key(1), i) for i in range(1000)]
    assert all(0.0 <= v < 1.0 for v in u)
    assert abs(np.mean(u) - 0.5) < 0.05


@needs_both
def test_rng_identical():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for seed in (0, 1, 42, 2**64 - 1):
        k = py.stream_key(seed)
        assert cy.stream_key(seed) == k
        for c in (0, 1, 17, 10**9):
            assert cy.uniform01(k, c) == py.uniform01(k, c)


@needs_both
def test_tree_payoffs_identical():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    r = np.random.default_rng(0)
    for _ in range(50):
        x1, q1, p1 = r.uniform(size=3)
        s1 = 2 * np.sqrt(x1)
        x2, q2, p2 = (r.uniform(size=4) for _ in range(3))
        s2 = 2 * np.sqrt(x2)
        assert cy.tree_payoffs(PARAMS, s1, x1, q1, p1, s2, x2, q2, p2) == \
            py.tree_payoffs(PARAMS, s1, x1, q1, p1, s2, x2, q2, p2)
    n = 64
    x1, q1, p1 = (r.uniform(size=n) for _ in range(3))
    x2, q2, p2 = (r.uniform(size=(n, 4)) for _ in range(3))
    a = cy.tree_payoffs_batch(PARAMS, 2 * np.sqrt(x1), x1, q1, p1, 2 * np.sqrt(x2), x2, q2, p2)
    b = py.tree_payoffs_batch(PARAMS, 2 * np.sqrt(x1), x1, q1, p1, 2 * np.sqrt(x2), x2, q2, p2)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_both
def test_simulate_block_identical():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    key = py.stream_key(42)
    args = (PARAMS, 2.0, 1.0, 0.34, 0.97, [1.0] * 4, [0.25] * 4, [0.9] * 4, [1.0] * 4, key, 123, 2000)
    a, b = cy.simulate_block(*args), py.simulate_block(*args)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_env_var_forces_fallback():
    code = "from sensorcontract import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, SENSORCONTRACT_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
