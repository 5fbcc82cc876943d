"""Pure-Python/numpy fallback simulation kernels.

Draw-for-draw contract shared with the compiled kernels: the engine pre-draws
per-path blocks (diffusion normals, one count uniform per step) from per-path
generators; everything conditional -- candidate jump times, acceptance and
size uniforms, re-simulation randomness -- continues the same stream on
demand, in simulation order.  Scalar arithmetic uses libm (math module) with
the same expression shapes as the C kernels, and the Poisson count decision
runs through the same scalar CDF walk in both backends, so a fixed seed
reproduces the compiled backend bit-for-bit.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_TWO_PI = 6.283185307179586
_MAX_DEPTH = 10


def _poisson_icdf(u: float, mean: float) -> int:
    """Smallest n with u < CDF_Poisson(mean)(n); one uniform per count draw."""
    p = math.exp(-mean)
    cdf = p
    n = 0
    while u >= cdf:
        n += 1
        p *= mean / n
        cdf += p
        if n >= 1000:
            break
    return n


def _advance_xy(par, x, y, t, w, depth, n_cand, draw_u, zx, zy, jumps_out):
    """One (sub)step of width w: thin candidate jumps against the inflated bound,
    then apply the full-truncation Euler diffusion.

    If an accepted jump pushes the intensity above the bound, the whole step is
    discarded and re-simulated as two half-steps with fresh randomness (depth
    capped at 10; beyond that acceptance saturates at probability one).
    """
    sig_x, sig_y, m, mu_x, mu_y, kind, jp1, jp2 = par
    bound = 1.5 * (m + mu_x * x + mu_y * y)
    jx = 0.0
    jy = 0.0
    acc_times = []
    violated = False
    if n_cand > 256:
        raise RuntimeError("jump candidate count exploded")
    if n_cand > 0:
        fracs = sorted(draw_u() for _ in range(n_cand))
        for f in fracs:
            lam_cur = m + mu_x * (x + jx) + mu_y * (y + jy)
            if lam_cur > bound and depth < _MAX_DEPTH:
                violated = True
                break
            ua = draw_u()
            if ua * bound < lam_cur:
                if kind == 0:
                    jx += -math.log1p(-draw_u()) / jp1
                else:
                    jx += jp1
                    jy += jp2
                acc_times.append(t + f * w)
    if violated:
        half = 0.5 * w
        for hi in range(2):
            b2 = 1.5 * (m + mu_x * x + mu_y * y)
            nc = _poisson_icdf(draw_u(), b2 * half)
            u1 = draw_u()
            u2 = draw_u()
            r = math.sqrt(-2.0 * math.log1p(-u1))
            zxh = r * math.cos(_TWO_PI * u2)
            zyh = r * math.sin(_TWO_PI * u2)
            x, y = _advance_xy(
                par, x, y, t + hi * half, half, depth + 1, nc, draw_u, zxh, zyh, jumps_out
            )
        return x, y
    sw = math.sqrt(w)
    xn = x + sig_x * math.sqrt(x) * sw * zx + jx
    yn = y + sig_y * math.sqrt(y) * sw * zy + jy
    if jumps_out is not None:
        jumps_out.extend(acc_times)
    return (xn if xn > 0.0 else 0.0), (yn if yn > 0.0 else 0.0)


def run_xy_chunk(par, x0, y0, dt, n_steps, rec_steps, gens, z_block, c_block, anti, collect_jumps):
    """Simulate one chunk of (X, Y) paths; states recorded after the steps in rec_steps.

    Paths without jump candidates advance vectorized; candidate paths resolve
    through the scalar routine, which produces bit-identical arithmetic.
    """
    sig_x, sig_y, m, mu_x, mu_y, kind, jp1, jp2 = par
    n = len(gens)
    sqdt = math.sqrt(dt)
    x = np.full(n, x0, dtype=np.float64)
    y = np.full(n, y0, dtype=np.float64)
    n_rec = len(rec_steps)
    x_rec = np.empty((n, n_rec))
    y_rec = np.empty((n, n_rec))
    jumps = [[] for _ in range(n)] if collect_jumps else None

    draws = []
    for i in range(n):
        gen = gens[i]
        if anti[i]:
            draws.append(lambda g=gen: 1.0 - g.random())
        else:
            draws.append(gen.random)

    pos = 0
    while pos < n_rec and rec_steps[pos] == 0:
        x_rec[:, pos] = x
        y_rec[:, pos] = y
        pos += 1

    for k in range(n_steps):
        zx = z_block[:, 2 * k]
        zy = z_block[:, 2 * k + 1]
        bound = 1.5 * (m + mu_x * x + mu_y * y)
        mean = bound * dt
        uc = c_block[:, k]
        # u < 1 - mean <= exp(-mean) certifies a zero count without the exp;
        # the remaining few paths resolve through the scalar CDF walk
        candidates = np.nonzero(uc >= 1.0 - mean)[0]
        x_next = x + sig_x * np.sqrt(x) * sqdt * zx
        y_next = y + sig_y * np.sqrt(y) * sqdt * zy
        x_next = np.where(x_next > 0.0, x_next, 0.0)
        y_next = np.where(y_next > 0.0, y_next, 0.0)
        t_k = k * dt
        for i in candidates:
            n_cand = _poisson_icdf(float(uc[i]), float(mean[i]))
            out = jumps[i] if collect_jumps else None
            xi, yi = _advance_xy(
                par, float(x[i]), float(y[i]), t_k, dt, 0, n_cand,
                draws[i], float(zx[i]), float(zy[i]), out,
            )
            x_next[i] = xi
            y_next[i] = yi
        x, y = x_next, y_next
        while pos < n_rec and rec_steps[pos] == k + 1:
            x_rec[:, pos] = x
            y_rec[:, pos] = y
            pos += 1

    jump_arrays = None
    if collect_jumps:
        jump_arrays = [np.array(j, dtype=np.float64) for j in jumps]
    return x_rec, y_rec, jump_arrays


def run_cir_chunk(b, beta, sig, x0, shift_vals, dt, n_steps, rec_steps, z_block):
    """Integrate short-rate paths; returns trapezoidal integral_0^t r du at rec_steps."""
    n = z_block.shape[0]
    sqdt = math.sqrt(dt)
    x = np.full(n, x0, dtype=np.float64)
    integ = np.zeros(n, dtype=np.float64)
    n_rec = len(rec_steps)
    out = np.empty((n, n_rec))
    pos = 0
    while pos < n_rec and rec_steps[pos] == 0:
        out[:, pos] = integ
        pos += 1
    for k in range(n_steps):
        r_cur = x + shift_vals[k]
        xn = x + (b - beta * x) * dt + sig * np.sqrt(x) * sqdt * z_block[:, k]
        x = np.where(xn > 0.0, xn, 0.0)
        r_next = x + shift_vals[k + 1]
        integ = integ + 0.5 * (r_cur + r_next) * dt
        while pos < n_rec and rec_steps[pos] == k + 1:
            out[:, pos] = integ
            pos += 1
    return out
