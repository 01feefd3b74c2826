"""Compiled inner loops for the forward and adjoint sweeps.

Everything here works on plain floats and 1-d float64 arrays so numba can
compile it in nopython mode. The public, validated API lives in
:mod:`hhinverse.model` and :mod:`hhinverse.adjoint`.
"""
import math

import numpy as np
from numba import njit

# |x| below which x / (e^x - 1) and its derivative switch to a Taylor series
SERIES_CUTOFF = 1e-4
# gate values are clamped to this before real powers and logarithms
GATE_FLOOR = 1e-12


@njit(cache=True)
def relexp(x):
    """x / (e^x - 1), continuous through x = 0."""
    if abs(x) < SERIES_CUTOFF:
        return 1.0 - 0.5 * x + x * x / 12.0
    return x / math.expm1(x)


@njit(cache=True)
def relexp_prime(x):
    """Derivative of :func:`relexp`."""
    if abs(x) < SERIES_CUTOFF:
        return -0.5 + x / 6.0
    if x > 0.0:
        ratio = 1.0 / -math.expm1(-x)
    else:
        ratio = math.exp(x) / math.expm1(x)
    return relexp(x) * (1.0 / x - ratio)


@njit(cache=True)
def rates(v):
    """(alpha_m, beta_m, alpha_n, beta_n, alpha_h, beta_h) at potential v."""
    am = relexp((25.0 - v) / 10.0)
    bm = 4.0 * math.exp(-v / 18.0)
    an = 0.1 * relexp((10.0 - v) / 10.0)
    bn = 0.125 * math.exp(-v / 80.0)
    ah = 0.07 * math.exp(-v / 20.0)
    bh = 1.0 / (math.exp((30.0 - v) / 10.0) + 1.0)
    return am, bm, an, bn, ah, bh


@njit(cache=True)
def rate_slopes(v):
    """Voltage derivatives of :func:`rates`, same ordering."""
    dam = -0.1 * relexp_prime((25.0 - v) / 10.0)
    dbm = -(4.0 / 18.0) * math.exp(-v / 18.0)
    dan = -0.01 * relexp_prime((10.0 - v) / 10.0)
    dbn = -(0.125 / 80.0) * math.exp(-v / 80.0)
    dah = -0.0035 * math.exp(-v / 20.0)
    bh = 1.0 / (math.exp((30.0 - v) / 10.0) + 1.0)
    dbh = 0.1 * bh * (1.0 - bh)
    return dam, dbm, dan, dbn, dah, dbh


@njit(cache=True)
def fpow(x, p):
    return max(x, GATE_FLOOR) ** p


@njit(cache=True)
def forward_sweep(state0, consts, g, e, dt, v, m, n, h):
    """Explicit Euler for the space-clamped HH system.

    ``state0`` = (v0, m0, n0, h0), ``consts`` = (c_m, e_na, e_k, e_l, i_ext),
    ``g`` = (g_na, g_k, g_l), ``e`` = (a, b, c). Output arrays have length
    n_steps + 1 and are filled in place.

    Returns the index of the first non-finite node, or -1.
    """
    c_m, e_na, e_k, e_l, i_ext = consts[0], consts[1], consts[2], consts[3], consts[4]
    g_na, g_k, g_l = g[0], g[1], g[2]
    a, b, c = e[0], e[1], e[2]
    v[0], m[0], n[0], h[0] = state0[0], state0[1], state0[2], state0[3]
    for j in range(v.shape[0] - 1):
        vj, mj, nj, hj = v[j], m[j], n[j], h[j]
        am, bm, an, bn, ah, bh = rates(vj)
        i_ion = (g_na * fpow(mj, a) * fpow(hj, b) * (vj - e_na)
                 + g_k * fpow(nj, c) * (vj - e_k)
                 + g_l * (vj - e_l))
        v[j + 1] = vj + dt * (i_ext - i_ion) / c_m
        m[j + 1] = mj + dt * (am * (1.0 - mj) - bm * mj)
        n[j + 1] = nj + dt * (an * (1.0 - nj) - bn * nj)
        h[j + 1] = hj + dt * (ah * (1.0 - hj) - bh * hj)
        if not (math.isfinite(v[j + 1]) and math.isfinite(m[j + 1])
                and math.isfinite(n[j + 1]) and math.isfinite(h[j + 1])):
            return j + 1
    return -1


@njit(cache=True)
def adjoint_sweep(v, m, n, h, resid, weights, consts, g, e, dt, u, p, q, r):
    """Backward sweep for the adjoint states (U, P, Q, R).

    Terminal values are zero. The step from node j to node j-1 uses the
    forward state at node j and injects the residual at node j with its
    quadrature weight, which makes the result the exact transpose of the
    linearized explicit-Euler forward map.

    Returns the index of the first non-finite node, or -1.
    """
    c_m, e_na, e_k = consts[0], consts[1], consts[2]
    g_na, g_k, g_l = g[0], g[1], g[2]
    a, b, c = e[0], e[1], e[2]
    last = v.shape[0] - 1
    u[last] = 0.0
    p[last] = 0.0
    q[last] = 0.0
    r[last] = 0.0
    for j in range(last, 0, -1):
        vj, mj, nj, hj = v[j], m[j], n[j], h[j]
        mf = max(mj, GATE_FLOOR)
        nf = max(nj, GATE_FLOOR)
        hf = max(hj, GATE_FLOOR)
        ma = mf ** a
        hb = hf ** b
        nc = nf ** c
        am, bm, an, bn, ah, bh = rates(vj)
        dam, dbm, dan, dbn, dah, dbh = rate_slopes(vj)

        leak = g_na * ma * hb + g_k * nc + g_l
        k_m = g_na * a * mf ** (a - 1.0) * hb * (vj - e_na)
        k_h = g_na * b * ma * hf ** (b - 1.0) * (vj - e_na)
        k_n = g_k * c * nf ** (c - 1.0) * (vj - e_k)
        s_m = (1.0 - mj) * dam - mj * dbm
        s_n = (1.0 - nj) * dan - nj * dbn
        s_h = (1.0 - hj) * dah - hj * dbh

        uj, pj, qj, rj = u[j], p[j], q[j], r[j]
        u[j - 1] = (uj - dt * (leak * uj + s_m * pj + s_n * qj + s_h * rj) / c_m
                    - weights[j] * resid[j] / c_m)
        p[j - 1] = pj - dt * ((am + bm) * pj - k_m * uj)
        q[j - 1] = qj - dt * ((an + bn) * qj - k_n * uj)
        r[j - 1] = rj - dt * ((ah + bh) * rj - k_h * uj)
        if not (math.isfinite(u[j - 1]) and math.isfinite(p[j - 1])
                and math.isfinite(q[j - 1]) and math.isfinite(r[j - 1])):
            return j - 1
    return -1


@njit(cache=True)
def trapezoid_weights(n_nodes, dt):
    w = np.full(n_nodes, dt)
    w[0] = 0.5 * dt
    w[n_nodes - 1] = 0.5 * dt
    return w
