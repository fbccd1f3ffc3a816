"""Compiled adaptive integration kernels for the classical module.

An 8th-order Dormand-Prince scheme (embedded 5th/3rd-order error estimate,
standard step controller) drives three system layouts:

    mode 0: (x, y, px, py, acc)        acc accumulates the integral of L^2
    mode 1: (x, y, px, py, w1[4], w2[4]) tangent dynamics for the alignment index

Section crossings are refined with Newton iterations that re-step from the
last accepted state, so the refined point carries the full order of the
integrator.  Status codes: 0 ok, 1 step-size underflow, 2 non-finite state.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from ._dop853_coeffs import A as _A, B as _B, E3 as _E3, E5 as _E5

N_STAGES = 12
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXP = -1.0 / 8.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NONFINITE = 2


@njit(cache=True)
def _rhs(mode, y, dy, pa, pb, pc, pk):
    x = y[0]
    yy = y[1]
    px = y[2]
    py = y[3]
    r2 = x * x + yy * yy
    gx = 2.0 * pa * x + 3.0 * pb * (x * x - yy * yy) + 4.0 * pc * x * r2
    gy = 2.0 * pa * yy - 6.0 * pb * x * yy + 4.0 * pc * yy * r2
    dy[0] = px / pk
    dy[1] = py / pk
    dy[2] = -gx
    dy[3] = -gy
    if mode == 0:
        ell = x * py - yy * px
        dy[4] = ell * ell
    elif mode == 1:
        vxx = 2.0 * pa + 6.0 * pb * x + 4.0 * pc * (3.0 * x * x + yy * yy)
        vyy = 2.0 * pa - 6.0 * pb * x + 4.0 * pc * (x * x + 3.0 * yy * yy)
        vxy = -6.0 * pb * yy + 8.0 * pc * x * yy
        for s in range(2):
            o = 4 + 4 * s
            dy[o + 0] = y[o + 2] / pk
            dy[o + 1] = y[o + 3] / pk
            dy[o + 2] = -(vxx * y[o + 0] + vxy * y[o + 1])
            dy[o + 3] = -(vxy * y[o + 0] + vyy * y[o + 1])


@njit(cache=True)
def _try_step(mode, y, f0, h, pa, pb, pc, pk, kbuf, ytmp, ynew, fnew,
              rtol, atol):
    """One trial step; fills ynew/fnew and returns the scaled error norm."""
    n = y.size
    for i in range(n):
        kbuf[0, i] = f0[i]
    for s in range(1, N_STAGES):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += _A[s, j] * kbuf[j, i]
            ytmp[i] = y[i] + h * acc
        _rhs(mode, ytmp, kbuf[s], pa, pb, pc, pk)
    for i in range(n):
        acc = 0.0
        for j in range(N_STAGES):
            acc += _B[j] * kbuf[j, i]
        ynew[i] = y[i] + h * acc
    _rhs(mode, ynew, fnew, pa, pb, pc, pk)
    for i in range(n):
        kbuf[N_STAGES, i] = fnew[i]

    err5sq = 0.0
    err3sq = 0.0
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        e5 = 0.0
        e3 = 0.0
        for j in range(N_STAGES + 1):
            e5 += _E5[j] * kbuf[j, i]
            e3 += _E3[j] * kbuf[j, i]
        err5sq += (e5 / sc) ** 2
        err3sq += (e3 / sc) ** 2
    if err5sq == 0.0 and err3sq == 0.0:
        return 0.0
    denom = err5sq + 0.01 * err3sq
    return abs(h) * err5sq / np.sqrt(denom * n)


@njit(cache=True)
def _initial_step(mode, y, f0, direction, pa, pb, pc, pk, rtol, atol, hmax):
    n = y.size
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    ytmp = np.empty(n)
    ftmp = np.empty(n)
    for i in range(n):
        ytmp[i] = y[i] + h0 * direction * f0[i]
    _rhs(mode, ytmp, ftmp, pa, pb, pc, pk)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d2 += ((ftmp[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, (0.01 / dm) ** (1.0 / 8.0)) if dm > 1e-15 else max(1e-6, h0 * 1e3)
    return min(100.0 * h0, h1, hmax)


@njit(cache=True)
def _propagate(mode, y, t0, t1, rtol, atol, hmax, pa, pb, pc, pk):
    """Advance y in place from t0 to t1; returns (t_reached, status, nsteps)."""
    n = y.size
    f0 = np.empty(n)
    kbuf = np.empty((N_STAGES + 1, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    fnew = np.empty(n)
    direction = 1.0 if t1 >= t0 else -1.0
    _rhs(mode, y, f0, pa, pb, pc, pk)
    h = _initial_step(mode, y, f0, direction, pa, pb, pc, pk, rtol, atol, hmax)
    t = t0
    nsteps = 0
    while direction * (t1 - t) > 0.0:
        min_step = 10.0 * abs(np.nextafter(t, direction * np.inf) - t)
        if h > hmax:
            h = hmax
        if h < min_step:
            h = min_step
        hs = h * direction
        if direction * (t + hs - t1) > 0.0:
            hs = t1 - t
        err = _try_step(mode, y, f0, hs, pa, pb, pc, pk, kbuf, ytmp, ynew, fnew,
                        rtol, atol)
        if not np.isfinite(err):
            return t, STATUS_NONFINITE, nsteps
        if err < 1.0:
            t += hs
            for i in range(n):
                y[i] = ynew[i]
                f0[i] = fnew[i]
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR,
                                                       SAFETY * err**ERROR_EXP)
            h = abs(hs) * factor
            nsteps += 1
        else:
            h = abs(hs) * max(MIN_FACTOR, SAFETY * err**ERROR_EXP)
            if h < min_step:
                return t, STATUS_STEP_UNDERFLOW, nsteps
    return t, STATUS_OK, nsteps


@njit(cache=True)
def _propagate_dense(mode, y, times, out, rtol, atol, hmax, pa, pb, pc, pk):
    """States at the requested times (piecewise propagation); returns status."""
    t = times[0]
    for i in range(y.size):
        out[0, i] = y[i]
    for k in range(1, times.size):
        t, status, _ = _propagate(mode, y, t, times[k], rtol, atol, hmax,
                                  pa, pb, pc, pk)
        if status != STATUS_OK:
            return status
        for i in range(y.size):
            out[k, i] = y[i]
    return STATUS_OK


@njit(cache=True)
def _poincare_run(y0, n_crossings, t_max, rtol, atol, pa, pb, pc, pk,
                  crossings):
    """Upward y = 0 crossings of a single trajectory.

    Fills `crossings` (n_crossings, 2) with (x, px); returns
    (n_found, t_final, status, y_final).  The section is one-sided (py > 0),
    which for K > 0 is exactly the upward crossings.
    """
    n = y0.size
    y = y0.copy()
    yprev = y0.copy()
    f0 = np.empty(n)
    kbuf = np.empty((N_STAGES + 1, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    fnew = np.empty(n)
    ycr = np.empty(n)
    fcr = np.empty(n)
    hmax = 0.25  # keeps at most one upward crossing per accepted step
    _rhs(0, y, f0, pa, pb, pc, pk)
    h = _initial_step(0, y, f0, 1.0, pa, pb, pc, pk, rtol, atol, hmax)
    t = 0.0
    found = 0
    while found < n_crossings and t < t_max:
        min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
        if h > hmax:
            h = hmax
        if h < min_step:
            h = min_step
        hs = h
        err = _try_step(0, y, f0, hs, pa, pb, pc, pk, kbuf, ytmp, ynew, fnew,
                        rtol, atol)
        if not np.isfinite(err):
            return found, t, STATUS_NONFINITE, y
        if err >= 1.0:
            h = hs * max(MIN_FACTOR, SAFETY * err**ERROR_EXP)
            if h < min_step:
                return found, t, STATUS_STEP_UNDERFLOW, y
            continue
        # accepted
        for i in range(n):
            yprev[i] = y[i]
        crossed = y[1] < 0.0 and ynew[1] >= 0.0
        if crossed:
            # Newton refinement of the crossing time within [0, hs].
            dt = hs * y[1] / (y[1] - ynew[1]) if ynew[1] != y[1] else 0.5 * hs
            for i in range(n):
                ycr[i] = ynew[i]
            for _ in range(12):
                if dt <= 0.0:
                    dt = 1e-3 * hs
                if dt > hs:
                    dt = hs
                _try_step(0, yprev, f0, dt, pa, pb, pc, pk, kbuf, ytmp, ycr,
                          fcr, rtol, atol)
                if abs(ycr[1]) < 1e-12:
                    break
                dydt = ycr[3] / pk
                if dydt == 0.0:
                    break
                dt -= ycr[1] / dydt
            if abs(ycr[1]) < 1e-10 and ycr[3] > 0.0:
                crossings[found, 0] = ycr[0]
                crossings[found, 1] = ycr[2]
                found += 1
        t += hs
        for i in range(n):
            y[i] = ynew[i]
            f0[i] = fnew[i]
        factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR,
                                                   SAFETY * err**ERROR_EXP)
        h = hs * factor
    return found, t, STATUS_OK, y


@njit(cache=True)
def _sali_run(y0_state, w1, w2, t_end, rtol, atol, pa, pb, pc, pk,
              exit_threshold):
    """Final alignment index; exits early once it falls below exit_threshold."""
    y = np.empty(12)
    for i in range(4):
        y[i] = y0_state[i]
        y[4 + i] = w1[i]
        y[8 + i] = w2[i]
    f0 = np.empty(12)
    kbuf = np.empty((N_STAGES + 1, 12))
    ytmp = np.empty(12)
    ynew = np.empty(12)
    fnew = np.empty(12)
    hmax = 1.0
    _rhs(1, y, f0, pa, pb, pc, pk)
    h = _initial_step(1, y, f0, 1.0, pa, pb, pc, pk, rtol, atol, hmax)
    t = 0.0
    sali = 2.0
    while t < t_end:
        min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
        if h > hmax:
            h = hmax
        if h < min_step:
            h = min_step
        hs = h if t + h <= t_end else t_end - t
        err = _try_step(1, y, f0, hs, pa, pb, pc, pk, kbuf, ytmp, ynew, fnew,
                        rtol, atol)
        if not np.isfinite(err):
            return 0.0, t, STATUS_NONFINITE
        if err >= 1.0:
            h = hs * max(MIN_FACTOR, SAFETY * err**ERROR_EXP)
            if h < min_step:
                return sali, t, STATUS_STEP_UNDERFLOW
            continue
        t += hs
        for i in range(12):
            y[i] = ynew[i]
        # renormalize both deviation vectors, then measure alignment
        n1 = 0.0
        n2 = 0.0
        for i in range(4):
            n1 += y[4 + i] ** 2
            n2 += y[8 + i] ** 2
        n1 = np.sqrt(n1)
        n2 = np.sqrt(n2)
        if n1 == 0.0 or n2 == 0.0:
            return 0.0, t, STATUS_NONFINITE
        plus = 0.0
        minus = 0.0
        for i in range(4):
            y[4 + i] /= n1
            y[8 + i] /= n2
            plus += (y[4 + i] + y[8 + i]) ** 2
            minus += (y[4 + i] - y[8 + i]) ** 2
        sali = min(np.sqrt(plus), np.sqrt(minus))
        _rhs(1, y, f0, pa, pb, pc, pk)
        if sali < exit_threshold:
            return sali, t, STATUS_OK
        factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR,
                                                   SAFETY * err**ERROR_EXP)
        h = hs * factor
    return sali, t, STATUS_OK


@njit(cache=True)
def _l2_average_run(y0_state, t_max, tol, rtol, atol, pa, pb, pc, pk):
    """Running time average of L^2 until it settles.

    Convergence: the average changed by less than tol (relative) between
    0.8 t and t, checked on a fixed grid of 256 checkpoints.
    Returns (average, converged, t_used, status).
    """
    n_checks = 256
    dt = t_max / n_checks
    y = np.empty(5)
    for i in range(4):
        y[i] = y0_state[i]
    y[4] = 0.0
    hist = np.empty(n_checks + 1)
    hist[0] = 0.0
    t = 0.0
    for k in range(1, n_checks + 1):
        t, status, _ = _propagate(0, y, t, k * dt, rtol, atol, 1.0,
                                  pa, pb, pc, pk)
        if status != STATUS_OK:
            return y[4] / max(t, 1e-300), False, t, status
        avg = y[4] / t
        hist[k] = avg
        if k >= 16:
            k_ref = int(0.8 * k)
            ref = hist[k_ref]
            if abs(avg - ref) <= tol * max(abs(avg), 1e-12):
                return avg, True, t, STATUS_OK
    return hist[n_checks], False, t_max, STATUS_OK


@njit(cache=True, parallel=True)
def _sali_batch(ics, t_end, rtol, atol, pa, pb, pc, pk, exit_threshold):
    n = ics.shape[0]
    out = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    w1 = np.array([1.0, 0.0, 0.0, 0.0])
    w2 = np.array([0.0, 1.0, 0.0, 0.0])
    for k in prange(n):
        s, _, st = _sali_run(ics[k], w1, w2, t_end, rtol, atol,
                             pa, pb, pc, pk, exit_threshold)
        out[k] = s
        status[k] = st
    return out, status


@njit(cache=True, parallel=True)
def _l2_average_batch(ics, t_max, tol, rtol, atol, pa, pb, pc, pk):
    n = ics.shape[0]
    avgs = np.empty(n)
    conv = np.zeros(n, dtype=np.bool_)
    tused = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    for k in prange(n):
        a, c, t, st = _l2_average_run(ics[k], t_max, tol, rtol, atol,
                                      pa, pb, pc, pk)
        avgs[k] = a
        conv[k] = c
        tused[k] = t
        status[k] = st
    return avgs, conv, tused, status
