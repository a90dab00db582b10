"""Compiled inner loops for sifting: extrema scan, natural cubic spline, sift."""

import numpy as np
from numba import njit

SIFT_OK = 0
SIFT_NO_EXTREMA = 1


@njit(cache=True)
def extrema(x):
    n = x.shape[0]
    maxima = np.empty(n, np.int64)
    minima = np.empty(n, np.int64)
    nmax = 0
    nmin = 0
    # walk runs of equal values; a run is interior if it touches neither end
    prev_val = x[0]
    i = 1
    while i < n and x[i] == prev_val:
        i += 1
    while i < n:
        start = i
        val = x[i]
        while i < n and x[i] == val:
            i += 1
        if i >= n:
            break
        nxt = x[i]
        mid = (start + i - 1) // 2
        if val > prev_val and val > nxt:
            maxima[nmax] = mid
            nmax += 1
        elif val < prev_val and val < nxt:
            minima[nmin] = mid
            nmin += 1
        prev_val = val
    return maxima[:nmax], minima[:nmin]


@njit(cache=True)
def natural_spline(kt, kv, n, dt):
    """Natural cubic spline through (kt, kv), evaluated at dt * arange(n)."""
    m = kt.shape[0] - 1
    h = np.empty(m)
    for i in range(m):
        h[i] = kt[i + 1] - kt[i]
    M = np.zeros(m + 1)
    if m >= 2:
        # Thomas algorithm on the interior second derivatives
        c = np.empty(m - 1)
        d = np.empty(m - 1)
        for k in range(m - 1):
            i = k + 1
            a = h[i - 1]
            b = 2.0 * (h[i - 1] + h[i])
            cc = h[i]
            rhs = 6.0 * ((kv[i + 1] - kv[i]) / h[i] - (kv[i] - kv[i - 1]) / h[i - 1])
            if k == 0:
                c[k] = cc / b
                d[k] = rhs / b
            else:
                denom = b - a * c[k - 1]
                c[k] = cc / denom
                d[k] = (rhs - a * d[k - 1]) / denom
        M[m - 1] = d[m - 2]
        for k in range(m - 3, -1, -1):
            M[k + 1] = d[k] - c[k] * M[k + 2]
    # per-segment cubic in local coordinate u = t - kt[i]
    c1 = np.empty(m)
    c2 = np.empty(m)
    c3 = np.empty(m)
    for i in range(m):
        c1[i] = (kv[i + 1] - kv[i]) / h[i] - h[i] * (2.0 * M[i] + M[i + 1]) / 6.0
        c2[i] = 0.5 * M[i]
        c3[i] = (M[i + 1] - M[i]) / (6.0 * h[i])
    out = np.empty(n)
    seg = 0
    for j in range(n):
        t = j * dt
        while seg < m - 1 and t > kt[seg + 1]:
            seg += 1
        u = t - kt[seg]
        out[j] = kv[seg] + u * (c1[seg] + u * (c2[seg] + u * c3[seg]))
    return out


@njit(cache=True)
def envelope(x, idx, dt):
    n = x.shape[0]
    k = idx.shape[0]
    if k == 1:
        return np.full(n, x[idx[0]])
    if k == 2:
        t0 = idx[0] * dt
        slope = (x[idx[1]] - x[idx[0]]) / ((idx[1] - idx[0]) * dt)
        out = np.empty(n)
        for j in range(n):
            out[j] = x[idx[0]] + slope * (j * dt - t0)
        return out
    t_end = (n - 1) * dt
    kt = np.empty(k + 4)
    kv = np.empty(k + 4)
    p = 0
    # two extrema nearest each end, mirrored about that end
    for r in range(1, -1, -1):
        if idx[r] > 0:
            kt[p] = -idx[r] * dt
            kv[p] = x[idx[r]]
            p += 1
    for r in range(k):
        kt[p] = idx[r] * dt
        kv[p] = x[idx[r]]
        p += 1
    for r in range(k - 1, k - 3, -1):
        if idx[r] < n - 1:
            kt[p] = 2.0 * t_end - idx[r] * dt
            kv[p] = x[idx[r]]
            p += 1
    return natural_spline(kt[:p], kv[:p], n, dt)


@njit(cache=True)
def zero_crossings(x):
    count = 0
    last = 0.0
    for v in x:
        if v > 0.0:
            s = 1.0
        elif v < 0.0:
            s = -1.0
        else:
            continue
        if last != 0.0 and s != last:
            count += 1
        last = s
    return count


@njit(cache=True)
def imf_test(h, mean, n_extrema, tol):
    scale = np.max(np.abs(h))
    if scale == 0.0:
        return False
    if abs(n_extrema - zero_crossings(h)) > 1:
        return False
    return np.max(np.abs(mean)) <= tol * scale


@njit(cache=True)
def sift(x, dt, max_iters, tol):
    h = x.copy()
    for it in range(max_iters):
        maxima, minima = extrema(h)
        if maxima.shape[0] == 0 or minima.shape[0] == 0:
            if it == 0:
                return h, SIFT_NO_EXTREMA
            break
        upper = envelope(h, maxima, dt)
        lower = envelope(h, minima, dt)
        mean = 0.5 * (upper + lower)
        if imf_test(h, mean, maxima.shape[0] + minima.shape[0], tol):
            break
        energy = np.dot(h, h)
        h = h - mean
        if energy > 0.0 and np.dot(mean, mean) / energy < tol:
            break
    return h, SIFT_OK


@njit(cache=True)
def is_monotone(x, tol):
    up = True
    down = True
    for i in range(x.shape[0] - 1):
        step = x[i + 1] - x[i]
        if step < -tol:
            up = False
        if step > tol:
            down = False
        if not (up or down):
            return False
    return True


@njit(cache=True)
def decompose(x, dt, max_imfs, max_iters, tol, mono_tol):
    n = x.shape[0]
    imfs = np.empty((max_imfs, n))
    residue = x.copy()
    count = 0
    while count < max_imfs and n >= 3:
        if is_monotone(residue, mono_tol):
            break
        maxima, minima = extrema(residue)
        if maxima.shape[0] + minima.shape[0] < 2:
            break
        imf, status = sift(residue, dt, max_iters, tol)
        if status != SIFT_OK:
            break
        imfs[count] = imf
        residue = residue - imf
        count += 1
    return imfs[:count].copy(), residue


@njit(cache=True)
def segment_stats(x, v_min, v_max, n_bins):
    """Per-segment sample counts and value sums (edge segments absorb outliers)."""
    counts = np.zeros(n_bins, np.int64)
    sums = np.zeros(n_bins)
    scale = n_bins / (v_max - v_min)
    for v in x:
        k = np.floor((v - v_min) * scale)
        if k < 0:
            k = 0
        elif k > n_bins - 1:
            k = n_bins - 1
        i = int(k)
        counts[i] += 1
        sums[i] += v
    return counts, sums


@njit(cache=True)
def band(osc, residual, dt):
    """Residual plus the envelopes of ``osc``, widened to contain ``osc``."""
    n = osc.shape[0]
    maxima, minima = extrema(osc)
    upper = residual.copy()
    lower = residual.copy()
    if maxima.shape[0] < 2:
        return upper, lower
    hi = envelope(osc, maxima, dt)
    lo = envelope(osc, minima, dt)
    for j in range(n):
        a = max(hi[j], lo[j], osc[j])
        b = min(hi[j], lo[j], osc[j])
        upper[j] += a
        lower[j] += b
    return upper, lower


@njit(cache=True)
def monotone_envelopes(imfs, residual, dt):
    """Band, clip at 1 pu and suffix hulls in one pass."""
    n = residual.shape[0]
    if imfs.shape[0] > 0 and n >= 3:
        osc = np.zeros(n)
        for k in range(imfs.shape[0]):
            osc += imfs[k]
        upper, lower = band(osc, residual, dt)
    else:
        upper = residual.copy()
        lower = residual.copy()
    run_hi = -np.inf
    run_lo = np.inf
    for j in range(n - 1, -1, -1):
        u = upper[j] if upper[j] > 1.0 else 1.0
        l = lower[j] if lower[j] < 1.0 else 1.0
        if u > run_hi:
            run_hi = u
        if l < run_lo:
            run_lo = l
        upper[j] = run_hi
        lower[j] = run_lo
    return upper, lower


@njit(cache=True)
def divergence(x, v_min, v_max, n_bins, s, dt, log_z):
    """ln(Z/T) + sum_i (dT_i/T)(ln dT_i + (x_i - 1)^2 / (2 s^2)) over occupied segments."""
    counts, sums = segment_stats(x, v_min, v_max, n_bins)
    total = dt * x.shape[0]
    acc = 0.0
    for i in range(n_bins):
        if counts[i] == 0:
            continue
        dwell = dt * counts[i]
        mean = sums[i] / counts[i]
        dev = mean - 1.0
        acc += dwell / total * (np.log(dwell) + dev * dev / (2.0 * s * s))
    return log_z - np.log(total) + acc
