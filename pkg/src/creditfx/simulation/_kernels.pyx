# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Semantics mirror _pykernels draw-for-draw: identical stream consumption order
and identical floating-point expression shapes (libm sqrt/exp/log1p/cos/sin,
no FMA), so a fixed seed reproduces the fallback backend's paths bit-for-bit.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, exp, log1p, sin, sqrt
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "cython"

cdef double TWO_PI = 6.283185307179586
cdef int MAX_DEPTH = 10
DEF CAND_CAP = 256
DEF TIMES_CAP = 4096


cdef struct XyPar:
    double sig_x
    double sig_y
    double m
    double mu_x
    double mu_y
    int kind            # 0 = exponential x-jumps, 1 = dirac (j_x, j_y)
    double jp1
    double jp2


cdef inline double _next_u(bitgen_t *bg, bint anti) noexcept:
    cdef double u = bg.next_double(bg.state)
    if anti:
        return 1.0 - u
    return u


cdef inline int _poisson_icdf(double u, double mean) noexcept:
    cdef double p = exp(-mean)
    cdef double cdf = p
    cdef int n = 0
    while u >= cdf:
        n += 1
        p *= mean / n
        cdf += p
        if n >= 1000:
            break
    return n


cdef (double, double) _advance_xy(XyPar *par, double x, double y, double t, double w,
                                  int depth, int n_cand, bitgen_t *bg, bint anti,
                                  double zx, double zy,
                                  double *times, int *n_times) except *:
    cdef double bound = 1.5 * (par.m + par.mu_x * x + par.mu_y * y)
    cdef double jx = 0.0
    cdef double jy = 0.0
    cdef double fracs[CAND_CAP]
    cdef double f, lam_cur, ua, sw, xn, yn, half, b2, u1, u2, r, zxh, zyh
    cdef int i, j, hi, nc, entry
    cdef bint violated = False

    if n_cand > CAND_CAP:
        raise RuntimeError("jump candidate count exploded")
    entry = n_times[0]
    if n_cand > 0:
        for i in range(n_cand):
            fracs[i] = _next_u(bg, anti)
        for i in range(1, n_cand):
            f = fracs[i]
            j = i - 1
            while j >= 0 and fracs[j] > f:
                fracs[j + 1] = fracs[j]
                j -= 1
            fracs[j + 1] = f
        for i in range(n_cand):
            f = fracs[i]
            lam_cur = par.m + par.mu_x * (x + jx) + par.mu_y * (y + jy)
            if lam_cur > bound and depth < MAX_DEPTH:
                violated = True
                break
            ua = _next_u(bg, anti)
            if ua * bound < lam_cur:
                if par.kind == 0:
                    jx += -log1p(-_next_u(bg, anti)) / par.jp1
                else:
                    jx += par.jp1
                    jy += par.jp2
                if n_times[0] < TIMES_CAP:
                    times[n_times[0]] = t + f * w
                    n_times[0] += 1
    if violated:
        n_times[0] = entry
        half = 0.5 * w
        for hi in range(2):
            b2 = 1.5 * (par.m + par.mu_x * x + par.mu_y * y)
            nc = _poisson_icdf(_next_u(bg, anti), b2 * half)
            u1 = _next_u(bg, anti)
            u2 = _next_u(bg, anti)
            r = sqrt(-2.0 * log1p(-u1))
            zxh = r * cos(TWO_PI * u2)
            zyh = r * sin(TWO_PI * u2)
            x, y = _advance_xy(par, x, y, t + hi * half, half, depth + 1, nc,
                               bg, anti, zxh, zyh, times, n_times)
        return x, y
    sw = sqrt(w)
    xn = x + par.sig_x * sqrt(x) * sw * zx + jx
    yn = y + par.sig_y * sqrt(y) * sw * zy + jy
    if xn <= 0.0:
        xn = 0.0
    if yn <= 0.0:
        yn = 0.0
    return xn, yn


def run_xy_chunk(par_tuple, double x0, double y0, double dt, int n_steps,
                 cnp.int64_t[::1] rec_steps, list gens,
                 double[:, ::1] z_block, double[:, ::1] c_block,
                 cnp.uint8_t[::1] anti, bint collect_jumps):
    """Simulate one chunk of (X, Y) paths; see _pykernels.run_xy_chunk."""
    cdef XyPar par
    par.sig_x = par_tuple[0]
    par.sig_y = par_tuple[1]
    par.m = par_tuple[2]
    par.mu_x = par_tuple[3]
    par.mu_y = par_tuple[4]
    par.kind = <int> par_tuple[5]
    par.jp1 = par_tuple[6]
    par.jp2 = par_tuple[7]

    cdef int n = len(gens)
    cdef int n_rec = rec_steps.shape[0]
    x_rec_arr = np.empty((n, n_rec))
    y_rec_arr = np.empty((n, n_rec))
    cdef double[:, ::1] x_rec = x_rec_arr
    cdef double[:, ::1] y_rec = y_rec_arr
    cdef double times[TIMES_CAP]
    cdef int n_times
    cdef bitgen_t *bg
    cdef double x, y, bound, mean
    cdef int i, k, pos, n_cand
    cdef bint a
    jumps = [] if collect_jumps else None

    cdef double sqdt = sqrt(dt)
    cdef double u, xn, yn

    for i in range(n):
        capsule = gens[i].bit_generator.capsule
        bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        a = anti[i]
        x = x0
        y = y0
        path_jumps = [] if collect_jumps else None
        pos = 0
        while pos < n_rec and rec_steps[pos] == 0:
            x_rec[i, pos] = x
            y_rec[i, pos] = y
            pos += 1
        for k in range(n_steps):
            bound = 1.5 * (par.m + par.mu_x * x + par.mu_y * y)
            mean = bound * dt
            u = c_block[i, k]
            if u < 1.0 - mean:
                # no candidates (u < 1 - mean <= exp(-mean)); plain Euler step,
                # identical arithmetic to _advance_xy with n_cand = 0
                xn = x + par.sig_x * sqrt(x) * sqdt * z_block[i, 2 * k] + 0.0
                yn = y + par.sig_y * sqrt(y) * sqdt * z_block[i, 2 * k + 1] + 0.0
                x = xn if xn > 0.0 else 0.0
                y = yn if yn > 0.0 else 0.0
            else:
                n_cand = _poisson_icdf(u, mean)
                n_times = 0
                x, y = _advance_xy(&par, x, y, k * dt, dt, 0, n_cand, bg, a,
                                   z_block[i, 2 * k], z_block[i, 2 * k + 1],
                                   times, &n_times)
                if collect_jumps and n_times > 0:
                    for j_idx in range(n_times):
                        path_jumps.append(times[j_idx])
            while pos < n_rec and rec_steps[pos] == k + 1:
                x_rec[i, pos] = x
                y_rec[i, pos] = y
                pos += 1
        if collect_jumps:
            jumps.append(np.array(path_jumps, dtype=np.float64))

    return x_rec_arr, y_rec_arr, jumps


def run_cir_chunk(double b, double beta, double sig, double x0,
                  double[::1] shift_vals, double dt, int n_steps,
                  cnp.int64_t[::1] rec_steps, double[:, ::1] z_block):
    """Integrate short-rate paths; returns trapezoidal integral_0^t r du at rec_steps."""
    cdef int n = z_block.shape[0]
    cdef int n_rec = rec_steps.shape[0]
    out_arr = np.empty((n, n_rec))
    cdef double[:, ::1] out = out_arr
    cdef double sqdt = sqrt(dt)
    cdef double x, integ, r_cur, r_next, xn
    cdef int i, k, pos

    for i in range(n):
        x = x0
        integ = 0.0
        pos = 0
        while pos < n_rec and rec_steps[pos] == 0:
            out[i, pos] = integ
            pos += 1
        for k in range(n_steps):
            r_cur = x + shift_vals[k]
            xn = x + (b - beta * x) * dt + sig * sqrt(x) * sqdt * z_block[i, k]
            if xn <= 0.0:
                xn = 0.0
            x = xn
            r_next = x + shift_vals[k + 1]
            integ = integ + 0.5 * (r_cur + r_next) * dt
            while pos < n_rec and rec_steps[pos] == k + 1:
                out[i, pos] = integ
                pos += 1
    return out_arr
