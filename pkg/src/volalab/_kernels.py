"""Compiled inner loops for the variance recursions and the simulator.

Family codes: 0 = GARCH, 1 = EGARCH, 2 = GJR.
"""

import math

import numpy as np
from numba import njit

GARCH, EGARCH, GJR = 0, 1, 2


@njit(cache=True, error_model="numpy")
def garch_path(vc, va, vb, e, exog_term, q0):
    n = e.shape[0]
    q = np.empty(n)
    if n == 0:
        return q
    q[0] = q0
    for t in range(1, n):
        e2 = e[t - 1] * e[t - 1]
        q[t] = vc + exog_term[t] + va * q[t - 1] + vb * e2
    return q


@njit(cache=True, error_model="numpy")
def gjr_path(vc, va, vb, gamma, e, exog_term, q0):
    n = e.shape[0]
    q = np.empty(n)
    if n == 0:
        return q
    q[0] = q0
    for t in range(1, n):
        e2 = e[t - 1] * e[t - 1]
        q[t] = vc + exog_term[t] + va * q[t - 1] + vb * e2
        if e[t - 1] < 0.0:
            q[t] += gamma * e2
    return q


@njit(cache=True, error_model="numpy")
def egarch_path(vc, va, vb, xi, e, exog_term, q0):
    n = e.shape[0]
    q = np.empty(n)
    if n == 0:
        return q
    q[0] = q0
    logq = math.log(q0)
    for t in range(1, n):
        z = e[t - 1] / math.sqrt(q[t - 1])
        logq = vc + exog_term[t] + va * logq + vb * abs(z) + xi * z
        q[t] = math.exp(logq)
    return q


@njit(cache=True, error_model="numpy")
def _step(family, vc, va, vb, gamma, x, e_prev, q_prev):
    if family == EGARCH:
        z = e_prev / math.sqrt(q_prev)
        return math.exp(vc + x + va * math.log(q_prev) + vb * abs(z) + gamma * z)
    e2 = e_prev * e_prev
    q = vc + x + va * q_prev + vb * e2
    if family == GJR and e_prev < 0.0:
        q += gamma * e2
    return q


@njit(cache=True, error_model="numpy")
def joint_path(family, vc, va, vb, gamma, r, gm, exog_term, q0):
    """Residuals and variances when the mean carries ``gm * Q2[t-1]``.

    ``r`` is the response net of every other mean term. The first row uses
    ``q0`` for both its own variance and the lagged variance in the mean.
    """
    n = r.shape[0]
    e = np.empty(n)
    q = np.empty(n)
    for t in range(n):
        if t == 0:
            q[t] = q0
            q_prev = q0
        else:
            q_prev = q[t - 1]
            q[t] = _step(family, vc, va, vb, gamma, exog_term[t], e[t - 1], q_prev)
        e[t] = r[t] - gm * q_prev
    return e, q


@njit(cache=True, error_model="numpy")
def simulate_path(family, vc, va, vb, gamma, base_mean, lag_coefs, gm, exog_term, z, q_init):
    """Generate returns where the mean is ``base_mean + lags + gm * Q2[t-1]``.

    Returns ``(y, e, q)``. Pre-sample lagged returns are zero.
    """
    n = z.shape[0]
    p = lag_coefs.shape[0]
    y = np.empty(n)
    e = np.empty(n)
    q = np.empty(n)
    for t in range(n):
        if t == 0:
            q[t] = q_init
            q_prev = q_init
        else:
            q_prev = q[t - 1]
            q[t] = _step(family, vc, va, vb, gamma, exog_term[t], e[t - 1], q_prev)
        m = base_mean[t] + gm * q_prev
        for i in range(p):
            if t - 1 - i >= 0:
                m += lag_coefs[i] * y[t - 1 - i]
        e[t] = math.sqrt(q[t]) * z[t]
        y[t] = m + e[t]
    return y, e, q


@njit(cache=True, error_model="numpy")
def gaussian_loglik(e, q):
    """Neumaier-compensated sum of Gaussian log densities; NaN if any q <= 0."""
    log_2pi = math.log(2.0 * math.pi)
    s = 0.0
    c = 0.0
    for t in range(e.shape[0]):
        if not q[t] > 0.0:
            return math.nan
        term = -0.5 * (log_2pi + math.log(q[t]) + e[t] * e[t] / q[t])
        tot = s + term
        if abs(s) >= abs(term):
            c += (s - tot) + term
        else:
            c += (term - tot) + s
        s = tot
    return s + c
