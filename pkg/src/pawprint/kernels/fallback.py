"""Pure-NumPy implementations of the hot kernels.

Every function here has a compiled twin in ``_native`` with the same
signature and the same floating-point evaluation order wherever that order
is observable (interpolation uses the ``a + t*(b-a)`` form so constant
inputs reproduce exactly).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# Machine epsilon used by the tridiagonal QL convergence test.
_EPS = float(np.finfo(np.float64).eps)

# Offset of the diagonal LBP samples at radius 1: sqrt(1/2).
_DIAG = float(np.sqrt(0.5))


def resize_bilinear(src, out_h, out_w):
    """Resample ``src`` (H x W float64) to (out_h, out_w).

    Pixel-center alignment: output pixel i samples the source at
    (i + 0.5) * in/out - 0.5, clamped to the valid range.
    """
    in_h, in_w = src.shape
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    np.clip(ys, 0.0, in_h - 1.0, out=ys)
    np.clip(xs, 0.0, in_w - 1.0, out=xs)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    ty = (ys - y0)[:, None]
    tx = (xs - x0)[None, :]

    r0 = src[y0]
    r1 = src[y1]
    top = r0[:, x0] + tx * (r0[:, x1] - r0[:, x0])
    bot = r1[:, x0] + tx * (r1[:, x1] - r1[:, x0])
    return top + ty * (bot - top)


def rotate_bilinear(src, cx, cy, cos_t, sin_t):
    """Rotate ``src`` by -theta about (cx, cy), where (cos_t, sin_t) describe
    theta; output pixels are sampled at the +theta-rotated source position,
    out-of-frame samples are 0.
    """
    h, w = src.shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx = xx - cx
    dy = yy - cy
    sx = cx + cos_t * dx - sin_t * dy
    sy = cy + sin_t * dx + cos_t * dy

    inside = (sx >= 0.0) & (sx <= w - 1.0) & (sy >= 0.0) & (sy <= h - 1.0)
    sx = np.where(inside, sx, 0.0)
    sy = np.where(inside, sy, 0.0)

    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    tx = sx - x0
    ty = sy - y0

    flat = src.ravel()
    p00 = flat[y0 * w + x0]
    p01 = flat[y0 * w + x1]
    p10 = flat[y1 * w + x0]
    p11 = flat[y1 * w + x1]
    top = p00 + tx * (p01 - p00)
    bot = p10 + tx * (p11 - p10)
    out = top + ty * (bot - top)
    out[~inside] = 0.0
    return out


def lbp_code_map(img):
    """8-bit LBP codes for the interior of ``img`` (H x W float64, H,W >= 3).

    Bit b is set when neighbor b >= center; neighbors start east and proceed
    counterclockwise on screen (y up), diagonals bilinearly interpolated.
    Returns an (H-2) x (W-2) uint8 array.
    """
    c = img[1:-1, 1:-1]
    r = _DIAG
    u = 1.0 - _DIAG

    def lerp2(p00, p01, p10, p11, tx, ty):
        top = p00 + tx * (p01 - p00)
        bot = p10 + tx * (p11 - p10)
        return top + ty * (bot - top)

    n = [None] * 8
    n[0] = img[1:-1, 2:]
    n[1] = lerp2(img[:-2, 1:-1], img[:-2, 2:], img[1:-1, 1:-1], img[1:-1, 2:], r, u)
    n[2] = img[:-2, 1:-1]
    n[3] = lerp2(img[:-2, :-2], img[:-2, 1:-1], img[1:-1, :-2], img[1:-1, 1:-1], u, u)
    n[4] = img[1:-1, :-2]
    n[5] = lerp2(img[1:-1, :-2], img[1:-1, 1:-1], img[2:, :-2], img[2:, 1:-1], u, r)
    n[6] = img[2:, 1:-1]
    n[7] = lerp2(img[1:-1, 1:-1], img[1:-1, 2:], img[2:, 1:-1], img[2:, 2:], r, r)

    codes = np.zeros(c.shape, dtype=np.uint8)
    for b in range(8):
        codes |= (n[b] >= c).astype(np.uint8) << b
    return codes


def convolve_valid(inp, kernels):
    """Valid cross-correlation of inp (H x W x C) with kernels (F x k x k x C).

    Output is (H-k+1) x (W-k+1) x F.
    """
    k = kernels.shape[1]
    win = sliding_window_view(inp, (k, k), axis=(0, 1))  # H' x W' x C x k x k
    return np.tensordot(win, kernels, axes=([2, 3, 4], [3, 1, 2]))


def lp_pool(t, p, window, stride):
    """Lp pooling over window x window patches at the given stride, per channel.

    out(i,j,f) = (sum |x|^p)^(1/p); output dim = floor((dim-window)/stride)+1.
    """
    win = sliding_window_view(t, (window, window), axis=(0, 1))
    win = win[::stride, ::stride]
    a = np.abs(win)
    if p == 1.0:
        return a.sum(axis=(3, 4))
    if p == 2.0:
        return np.sqrt((a * a).sum(axis=(3, 4)))
    return (a ** p).sum(axis=(3, 4)) ** (1.0 / p)


def divisive_normalize(t):
    """Divide each value by the L2 magnitude of its 3x3 x all-channels
    neighborhood (zero padded), floored at 1 so quiet regions pass through.
    """
    h, w, _ = t.shape
    s2 = (t * t).sum(axis=2)
    padded = np.zeros((h + 2, w + 2))
    padded[1:-1, 1:-1] = s2
    acc = np.zeros((h, w))
    for dy in range(3):
        for dx in range(3):
            acc += padded[dy:dy + h, dx:dx + w]
    denom = np.maximum(1.0, np.sqrt(acc))
    return t / denom[:, :, None]


def dcd_epoch(x, y, qdiag, alpha, w, c_penalty, perm):
    """One dual-coordinate-descent epoch for the L1-hinge SVM dual.

    ``x`` is the bias-augmented sample matrix (n x d), ``y`` contains +-1
    labels. ``alpha`` and ``w`` are updated in place; returns the largest
    projected-gradient violation seen this epoch.
    """
    maxpg = 0.0
    for i in perm:
        g = y[i] * float(np.dot(w, x[i])) - 1.0
        a = alpha[i]
        if a == 0.0:
            pg = min(g, 0.0)
        elif a == c_penalty:
            pg = max(g, 0.0)
        else:
            pg = g
        v = abs(pg)
        if v > maxpg:
            maxpg = v
        if v > 1e-12:
            new = min(max(a - g / qdiag[i], 0.0), c_penalty)
            alpha[i] = new
            delta = (new - a) * y[i]
            if delta != 0.0:
                w += delta * x[i]
    return maxpg


def householder_tridiag(a):
    """Reduce symmetric ``a`` to tridiagonal form by Householder reflections.

    Returns (d, e, q): diagonal, subdiagonal (length n-1) and the accumulated
    orthogonal q with q.T @ a @ q tridiagonal.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        xnorm = float(np.sqrt(np.dot(x, x)))
        if xnorm == 0.0:
            continue
        alpha = -np.copysign(xnorm, x[0]) if x[0] != 0.0 else -xnorm
        v = x
        v[0] -= alpha
        vnorm = float(np.sqrt(np.dot(v, v)))
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        wv = sub @ v
        tau = float(np.dot(v, wv))
        wv -= tau * v
        sub -= 2.0 * (np.outer(v, wv) + np.outer(wv, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        qv = q[:, k + 1:] @ v
        q[:, k + 1:] -= 2.0 * np.outer(qv, v)
    d = np.ascontiguousarray(np.diagonal(a)).copy()
    e = np.ascontiguousarray(np.diagonal(a, 1)).copy() if n > 1 else np.zeros(0)
    return d, e, q


def tql_implicit(d, e, z, cap_total):
    """Implicit-shift QL iteration on a symmetric tridiagonal matrix.

    ``d`` (diagonal) and ``z`` (transformation accumulator, columns become
    eigenvectors) are updated in place; ``e`` is the subdiagonal (length
    n-1, copied into a workspace). Returns the total sweep count, negated
    when the run exceeded ``cap_total`` sweeps (callers budget 30 per
    matrix order).
    """
    n = d.shape[0]
    if n == 1:
        return 0
    ework = np.zeros(n)
    ework[: n - 1] = e
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ework[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > cap_total:
                return -total
            g = (d[l + 1] - d[l]) / (2.0 * ework[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + ework[l] / (g + np.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * ework[i]
                b = c * ework[i]
                r = np.hypot(f, g)
                ework[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ework[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * zi + c * zi1
                z[:, i] = c * zi - s * zi1
            if underflow:
                continue
            d[l] -= p
            ework[l] = g
            ework[m] = 0.0
    return total
