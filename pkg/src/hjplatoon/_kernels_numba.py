"""Numba-compiled solver sweeps (hot path).

Each sweep applies one explicit Euler step of the frozen variational
inequality to the whole grid, writing into a separate output buffer.  The
numerical Hamiltonian is Lax-Friedrichs with per-node dissipation: gap
dimensions use the exact local advection speed, speed dimensions use the
realized input difference when the policy-determining costate signs are
stable across the cell's one-sided gradients, and the domain-wide input span
otherwise.

The arithmetic here must stay expression-for-expression identical to
``_kernels_numpy`` so the two backends agree to rounding.
"""

import math

import numpy as np
from numba import njit, prange


@njit(inline="always")
def _idm_u3(xg2, vg2, t_react, a, b, delta, v0, s0, dlo, dhi, w, vnom):
    v3 = vnom - vg2
    if v3 < 0.0:
        v3 = 0.0
    raw = v3 * t_react + v3 * (-vg2) / w
    if raw < 0.0:
        raw = 0.0
    s_star = s0 + raw
    if xg2 > 0.0:
        g = a * (1.0 - (v3 / v0) ** delta - (s_star / xg2) ** 2)
    else:
        g = dlo
    return min(dhi, max(dlo, g))


@njit(cache=True, parallel=True)
def sweep_2d(v, out, c2, inv1, inv2, alpha_in, dt, floor, clo, chi, dlo, dhi):
    n1, n2 = v.shape
    for i1 in prange(n1):
        for i2 in range(n2):
            vg1 = c2[i2]
            vc = v[i1, i2]
            if i1 > 0:
                pm1 = (vc - v[i1 - 1, i2]) * inv1
            else:
                pm1 = (v[i1 + 1, i2] - vc) * inv1
            if i1 < n1 - 1:
                pp1 = (v[i1 + 1, i2] - vc) * inv1
            else:
                pp1 = (vc - v[i1 - 1, i2]) * inv1
            if i2 > 0:
                pm2 = (vc - v[i1, i2 - 1]) * inv2
            else:
                pm2 = (v[i1, i2 + 1] - vc) * inv2
            if i2 < n2 - 1:
                pp2 = (v[i1, i2 + 1] - vc) * inv2
            else:
                pp2 = (vc - v[i1, i2 - 1]) * inv2

            p1 = 0.5 * (pm1 + pp1)
            p2 = 0.5 * (pm2 + pp2)

            u2 = chi if p2 < 0.0 else clo
            d1 = dhi if p2 < 0.0 else dlo
            h = p1 * vg1 + p2 * (d1 - u2)

            if (pm2 > 0.0 and pp2 > 0.0) or (pm2 < 0.0 and pp2 < 0.0):
                a2 = abs(d1 - u2)
            else:
                a2 = alpha_in
            hhat = h + 0.5 * (abs(vg1) * (pp1 - pm1) + a2 * (pp2 - pm2))

            vn = vc + dt * min(0.0, hhat)
            if vn < floor:
                vn = min(vc, floor)
            out[i1, i2] = vn


@njit(cache=True, parallel=True)
def sweep_4d(v, out, c2, c3, c4, inv1, inv2, inv3, inv4, alpha_in, dt, floor,
             clo, chi, dlo, dhi, reaction, a, b, delta, v0, s0, tmin, tmax, vnom):
    n1, n2, n3, n4 = v.shape
    w = 2.0 * math.sqrt(a * b)
    for i1 in prange(n1):
        for i2 in range(n2):
            vg1 = c2[i2]
            for i3 in range(n3):
                xg2 = c3[i3]
                for i4 in range(n4):
                    vg2 = c4[i4]
                    vc = v[i1, i2, i3, i4]
                    if i1 > 0:
                        pm1 = (vc - v[i1 - 1, i2, i3, i4]) * inv1
                    else:
                        pm1 = (v[i1 + 1, i2, i3, i4] - vc) * inv1
                    if i1 < n1 - 1:
                        pp1 = (v[i1 + 1, i2, i3, i4] - vc) * inv1
                    else:
                        pp1 = (vc - v[i1 - 1, i2, i3, i4]) * inv1
                    if i2 > 0:
                        pm2 = (vc - v[i1, i2 - 1, i3, i4]) * inv2
                    else:
                        pm2 = (v[i1, i2 + 1, i3, i4] - vc) * inv2
                    if i2 < n2 - 1:
                        pp2 = (v[i1, i2 + 1, i3, i4] - vc) * inv2
                    else:
                        pp2 = (vc - v[i1, i2 - 1, i3, i4]) * inv2
                    if i3 > 0:
                        pm3 = (vc - v[i1, i2, i3 - 1, i4]) * inv3
                    else:
                        pm3 = (v[i1, i2, i3 + 1, i4] - vc) * inv3
                    if i3 < n3 - 1:
                        pp3 = (v[i1, i2, i3 + 1, i4] - vc) * inv3
                    else:
                        pp3 = (vc - v[i1, i2, i3 - 1, i4]) * inv3
                    if i4 > 0:
                        pm4 = (vc - v[i1, i2, i3, i4 - 1]) * inv4
                    else:
                        pm4 = (v[i1, i2, i3, i4 + 1] - vc) * inv4
                    if i4 < n4 - 1:
                        pp4 = (v[i1, i2, i3, i4 + 1] - vc) * inv4
                    else:
                        pp4 = (vc - v[i1, i2, i3, i4 - 1]) * inv4

                    p1 = 0.5 * (pm1 + pp1)
                    p2 = 0.5 * (pm2 + pp2)
                    p3 = 0.5 * (pm3 + pp3)
                    p4 = 0.5 * (pm4 + pp4)

                    u2 = chi if (p4 - p2) > 0.0 else clo
                    d1 = dhi if p2 < 0.0 else dlo
                    if reaction:
                        if p4 > 0.0:
                            t_star = min(tmax, max(tmin, -vg2 / w))
                        else:
                            if abs(w * tmax + vg2) >= abs(w * tmin + vg2):
                                t_star = tmax
                            else:
                                t_star = tmin
                        u3 = _idm_u3(xg2, vg2, t_star, a, b, delta, v0, s0,
                                     dlo, dhi, w, vnom)
                    else:
                        u3 = dhi if p4 > 0.0 else dlo

                    h = p1 * vg1 + p2 * (d1 - u2) + p3 * vg2 + p4 * (u2 - u3)

                    # policy-switch stability along the speed dimensions: the
                    # leader flips at p2 = 0, the follower at p4 = 0, the ego
                    # where p4 - p2 = 0; signs must agree at the matched
                    # one-sided gradient corners, else fall back to the
                    # domain-wide input span
                    p2_sgn = (pm2 > 0.0 and pp2 > 0.0) or (pm2 < 0.0 and pp2 < 0.0)
                    p4_sgn = (pm4 > 0.0 and pp4 > 0.0) or (pm4 < 0.0 and pp4 < 0.0)
                    s24m = pm4 - pm2
                    s24p = pp4 - pp2
                    sw_sgn = (s24m > 0.0 and s24p > 0.0) or (s24m < 0.0 and s24p < 0.0)
                    if p2_sgn and sw_sgn:
                        a2 = abs(d1 - u2)
                    else:
                        a2 = alpha_in
                    if p4_sgn and sw_sgn:
                        if reaction:
                            t1 = min(tmax, max(tmin, -vg2 / w))
                            if abs(w * tmax + vg2) >= abs(w * tmin + vg2):
                                t2 = tmax
                            else:
                                t2 = tmin
                            u3a = _idm_u3(xg2, vg2, t1, a, b, delta, v0, s0,
                                          dlo, dhi, w, vnom)
                            u3b = _idm_u3(xg2, vg2, t2, a, b, delta, v0, s0,
                                          dlo, dhi, w, vnom)
                            a4 = max(abs(u2 - u3a), abs(u2 - u3b))
                        else:
                            a4 = abs(u2 - u3)
                    else:
                        a4 = alpha_in

                    hhat = h + 0.5 * (abs(vg1) * (pp1 - pm1) + a2 * (pp2 - pm2)
                                      + abs(vg2) * (pp3 - pm3) + a4 * (pp4 - pm4))
                    vn = vc + dt * min(0.0, hhat)
                    if vn < floor:
                        vn = min(vc, floor)
                    out[i1, i2, i3, i4] = vn
