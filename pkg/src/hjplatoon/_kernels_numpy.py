"""Pure-numpy solver sweeps (fallback path).

Vectorized mirror of ``_kernels_numba``; the per-node arithmetic is kept
expression-for-expression identical so both backends agree to rounding.
"""

import math

import numpy as np


def _idm_u3(xg2, vg2, t_react, a, b, delta, v0, s0, dlo, dhi, w, vnom):
    v3 = np.maximum(0.0, vnom - vg2)
    raw = np.maximum(0.0, v3 * t_react + v3 * (-vg2) / w)
    s_star = s0 + raw
    x_safe = np.where(xg2 > 0.0, xg2, 1.0)
    g = a * (1.0 - (v3 / v0) ** delta - (s_star / x_safe) ** 2)
    g = np.where(xg2 > 0.0, g, dlo)
    return np.minimum(dhi, np.maximum(dlo, g))


def _one_sided(v, axis, inv):
    """One-sided gradient pairs along ``axis`` with linear-extrapolation ghosts.

    With ghosts g = 2*v[0] - v[1] (and mirrored at the top), the boundary
    one-sided differences collapse to the interior difference, so the pair
    (pm, pp) is the interior diff padded with its own edge values.
    """
    d = (np.take(v, range(1, v.shape[axis]), axis=axis)
         - np.take(v, range(0, v.shape[axis] - 1), axis=axis)) * inv
    first = np.take(d, [0], axis=axis)
    last = np.take(d, [-1], axis=axis)
    pm = np.concatenate([first, d], axis=axis)
    pp = np.concatenate([d, last], axis=axis)
    return pm, pp


def sweep_2d(v, out, c2, inv1, inv2, alpha_in, dt, floor, clo, chi, dlo, dhi):
    vg1 = c2[None, :]
    pm1, pp1 = _one_sided(v, 0, inv1)
    pm2, pp2 = _one_sided(v, 1, inv2)
    p1 = 0.5 * (pm1 + pp1)
    p2 = 0.5 * (pm2 + pp2)

    u2 = np.where(p2 < 0.0, chi, clo)
    d1 = np.where(p2 < 0.0, dhi, dlo)
    h = p1 * vg1 + p2 * (d1 - u2)

    p2_sgn = ((pm2 > 0.0) & (pp2 > 0.0)) | ((pm2 < 0.0) & (pp2 < 0.0))
    a2 = np.where(p2_sgn, np.abs(d1 - u2), alpha_in)
    hhat = h + 0.5 * (np.abs(vg1) * (pp1 - pm1) + a2 * (pp2 - pm2))

    vn = v + dt * np.minimum(0.0, hhat)
    np.copyto(out, np.where(vn < floor, np.minimum(v, floor), vn))


def sweep_4d(v, out, c2, c3, c4, inv1, inv2, inv3, inv4, alpha_in, dt, floor,
             clo, chi, dlo, dhi, reaction, a, b, delta, v0, s0, tmin, tmax, vnom):
    vg1 = c2[None, :, None, None]
    xg2 = c3[None, None, :, None]
    vg2 = c4[None, None, None, :]
    pm1, pp1 = _one_sided(v, 0, inv1)
    pm2, pp2 = _one_sided(v, 1, inv2)
    pm3, pp3 = _one_sided(v, 2, inv3)
    pm4, pp4 = _one_sided(v, 3, inv4)
    p1 = 0.5 * (pm1 + pp1)
    p2 = 0.5 * (pm2 + pp2)
    p3 = 0.5 * (pm3 + pp3)
    p4 = 0.5 * (pm4 + pp4)

    u2 = np.where((p4 - p2) > 0.0, chi, clo)
    d1 = np.where(p2 < 0.0, dhi, dlo)
    if reaction:
        w = 2.0 * math.sqrt(a * b)
        t_first = np.minimum(tmax, np.maximum(tmin, -vg2 / w))
        t_else = np.where(np.abs(w * tmax + vg2) >= np.abs(w * tmin + vg2), tmax, tmin)
        u3_first = _idm_u3(xg2, vg2, t_first, a, b, delta, v0, s0, dlo, dhi, w, vnom)
        u3_else = _idm_u3(xg2, vg2, t_else, a, b, delta, v0, s0, dlo, dhi, w, vnom)
        u3 = np.where(p4 > 0.0, u3_first, u3_else)
    else:
        u3 = np.where(p4 > 0.0, dhi, dlo)

    h = p1 * vg1 + p2 * (d1 - u2) + p3 * vg2 + p4 * (u2 - u3)

    p2_sgn = ((pm2 > 0.0) & (pp2 > 0.0)) | ((pm2 < 0.0) & (pp2 < 0.0))
    p4_sgn = ((pm4 > 0.0) & (pp4 > 0.0)) | ((pm4 < 0.0) & (pp4 < 0.0))
    s24m = pm4 - pm2
    s24p = pp4 - pp2
    sw_sgn = ((s24m > 0.0) & (s24p > 0.0)) | ((s24m < 0.0) & (s24p < 0.0))
    a2 = np.where(p2_sgn & sw_sgn, np.abs(d1 - u2), alpha_in)
    if reaction:
        a4_tight = np.maximum(np.abs(u2 - u3_first), np.abs(u2 - u3_else))
    else:
        a4_tight = np.abs(u2 - u3)
    a4 = np.where(p4_sgn & sw_sgn, a4_tight, alpha_in)

    hhat = h + 0.5 * (np.abs(vg1) * (pp1 - pm1) + a2 * (pp2 - pm2)
                      + np.abs(vg2) * (pp3 - pm3) + a4 * (pp4 - pm4))
    vn = v + dt * np.minimum(0.0, hhat)
    np.copyto(out, np.where(vn < floor, np.minimum(v, floor), vn))
