"""Pure-Python kernels. Reference semantics for the compiled ``_kernels`` module.

Both implementations must perform the same floating-point operations in the
same order so that results agree bit for bit.

``params`` is the tuple ``(b, x_bar, delta, C, h, gamma, omega)``. Stage-1
outcomes are indexed ``0 = (T, V)``, ``1 = (T, NV)``, ``2 = (NT, V)``,
``3 = (NT, NV)``; stage-2 plans are length-4 sequences indexed by that
outcome.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_TWO53 = 1.0 / 9007199254740992.0


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed):
    return mix64((seed & MASK64) ^ 0x5DEECE66D2545F49)


def uniform01(key, counter):
    """Counter-based uniform on [0, 1): SplitMix64 output at position ``counter``."""
    z = mix64((key + (counter + 1) * GOLDEN) & MASK64)
    return (z >> 11) * _TWO53


def stage_outcome(b, x_bar, C, h, gamma, omega, stage, carried, x, s, truthful, verified):
    """Return ``(reputation, payment, u_sensor, u_operator)`` for one stage.

    ``stage`` is 1 or 2; ``carried`` is the stage-1 reputation (ignored at stage 1).
    """
    if truthful:
        rep = h * x / x_bar
        if verified:
            rep = rep + gamma
        effort = x
        ben = s
    else:
        rep = 0.0 if verified else h
        effort = 0.0
        ben = 0.0
    if stage == 1:
        pay = rep
    else:
        pay = (1.0 - omega) * carried + omega * rep
    us = pay - b * effort
    uo = ben - pay
    if verified:
        uo = uo - C
    return rep, pay, us, uo


def tree_payoffs(params, s1, x1, q1, p1, s2, x2, q2, p2):
    b, x_bar, delta, C, h, gamma, omega = params
    acc_s = 0.0
    acc_o = 0.0
    for i in range(4):
        t1 = i < 2
        v1 = i % 2 == 0
        pr1 = (q1 if t1 else 1.0 - q1) * (p1 if v1 else 1.0 - p1)
        rep1, _, us1, uo1 = stage_outcome(b, x_bar, C, h, gamma, omega, 1, 0.0, x1, s1, t1, v1)
        qq = q2[i]
        pp = p2[i]
        for j in range(4):
            t2 = j < 2
            v2 = j % 2 == 0
            pr2 = (qq if t2 else 1.0 - qq) * (pp if v2 else 1.0 - pp)
            _, _, us2, uo2 = stage_outcome(b, x_bar, C, h, gamma, omega, 2, rep1, x2[i], s2[i], t2, v2)
            pr = pr1 * pr2
            acc_s += pr * (us1 + delta * us2)
            acc_o += pr * (uo1 + delta * uo2)
    return acc_s, acc_o


def tree_payoffs_batch(params, s1, x1, q1, p1, s2, x2, q2, p2):
    """Row-wise :func:`tree_payoffs`; stage-1 inputs shape ``(n,)``, stage-2 ``(n, 4)``."""
    n = len(x1)
    out_s = np.empty(n)
    out_o = np.empty(n)
    for r in range(n):
        out_s[r], out_o[r] = tree_payoffs(
            params, float(s1[r]), float(x1[r]), float(q1[r]), float(p1[r]),
            [float(v) for v in s2[r]], [float(v) for v in x2[r]],
            [float(v) for v in q2[r]], [float(v) for v in p2[r]],
        )
    return out_s, out_o


def simulate_block(params, s1, x1, q1, p1, s2, x2, q2, p2, key, start, count):
    """Play episodes ``start .. start+count-1``.

    Returns per-episode discounted utilities and a ``(count, 4)`` uint8 event
    array with columns truthful-1, verified-1, truthful-2, verified-2.
    Episode ``e`` uses counters ``4e .. 4e+3`` of the stream.
    """
    b, x_bar, delta, C, h, gamma, omega = params
    us = np.empty(count)
    uo = np.empty(count)
    events = np.zeros((count, 4), dtype=np.uint8)
    for e in range(count):
        base = 4 * (start + e)
        t1 = uniform01(key, base) < q1
        v1 = uniform01(key, base + 1) < p1
        i = (0 if t1 else 2) + (0 if v1 else 1)
        t2 = uniform01(key, base + 2) < q2[i]
        v2 = uniform01(key, base + 3) < p2[i]
        rep1, _, us1, uo1 = stage_outcome(b, x_bar, C, h, gamma, omega, 1, 0.0, x1, s1, t1, v1)
        _, _, us2, uo2 = stage_outcome(b, x_bar, C, h, gamma, omega, 2, rep1, x2[i], s2[i], t2, v2)
        us[e] = us1 + delta * us2
        uo[e] = uo1 + delta * uo2
        events[e, 0] = t1
        events[e, 1] = v1
        events[e, 2] = t2
        events[e, 3] = v2
    return us, uo, events
