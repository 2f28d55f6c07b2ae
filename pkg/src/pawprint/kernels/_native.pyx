# Compiled twins of the fallback kernels. Signatures and observable
# floating-point conventions (the a + t*(b-a) interpolation form, the
# QL recurrences) match fallback.py; see that module for contracts.

import numpy as np

from libc.math cimport fabs, sqrt, hypot, copysign, pow

cdef extern from *:
    """
    #include <stddef.h>
    static inline void pw_axpy(ptrdiff_t n, double a,
                               const double* restrict x,
                               double* restrict y) {
        ptrdiff_t q;
        for (q = 0; q < n; q++) y[q] += a * x[q];
    }
    """
    void pw_axpy(Py_ssize_t n, double a, const double* x, double* y) nogil

cdef double EPS = 2.220446049250313e-16
cdef double DIAG = 0.7071067811865476  # sqrt(1/2)


cdef inline double _lerp(double a, double b, double t) nogil:
    return a + t * (b - a)


def resize_bilinear(double[:, ::1] src, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t in_h = src.shape[0]
    cdef Py_ssize_t in_w = src.shape[1]
    out_arr = np.empty((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double sy = in_h / <double> out_h
    cdef double sx = in_w / <double> out_w
    cdef Py_ssize_t i, j, y0, x0, y1, x1
    cdef double fy, fx, ty, tx, top, bot
    with nogil:
        for i in range(out_h):
            fy = (i + 0.5) * sy - 0.5
            if fy < 0.0:
                fy = 0.0
            if fy > in_h - 1.0:
                fy = in_h - 1.0
            y0 = <Py_ssize_t> fy
            y1 = y0 + 1
            if y1 > in_h - 1:
                y1 = in_h - 1
            ty = fy - y0
            for j in range(out_w):
                fx = (j + 0.5) * sx - 0.5
                if fx < 0.0:
                    fx = 0.0
                if fx > in_w - 1.0:
                    fx = in_w - 1.0
                x0 = <Py_ssize_t> fx
                x1 = x0 + 1
                if x1 > in_w - 1:
                    x1 = in_w - 1
                tx = fx - x0
                top = _lerp(src[y0, x0], src[y0, x1], tx)
                bot = _lerp(src[y1, x0], src[y1, x1], tx)
                out[i, j] = _lerp(top, bot, ty)
    return out_arr


def rotate_bilinear(double[:, ::1] src, double cx, double cy,
                    double cos_t, double sin_t):
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, x0, y0, x1, y1
    cdef double dx, dy, sx, sy, tx, ty, top, bot
    with nogil:
        for i in range(h):
            dy = i - cy
            for j in range(w):
                dx = j - cx
                sx = cx + cos_t * dx - sin_t * dy
                sy = cy + sin_t * dx + cos_t * dy
                if sx < 0.0 or sx > w - 1.0 or sy < 0.0 or sy > h - 1.0:
                    out[i, j] = 0.0
                    continue
                x0 = <Py_ssize_t> sx
                y0 = <Py_ssize_t> sy
                x1 = x0 + 1
                if x1 > w - 1:
                    x1 = w - 1
                y1 = y0 + 1
                if y1 > h - 1:
                    y1 = h - 1
                tx = sx - x0
                ty = sy - y0
                top = _lerp(src[y0, x0], src[y0, x1], tx)
                bot = _lerp(src[y1, x0], src[y1, x1], tx)
                out[i, j] = _lerp(top, bot, ty)
    return out_arr


cdef inline double _lerp2(double p00, double p01, double p10, double p11,
                          double tx, double ty) nogil:
    return _lerp(_lerp(p00, p01, tx), _lerp(p10, p11, tx), ty)


def lbp_code_map(double[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    out_arr = np.zeros((h - 2, w - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef double c
    cdef double r = DIAG
    cdef double u = 1.0 - DIAG
    cdef int code
    with nogil:
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                c = img[y, x]
                code = 0
                if img[y, x + 1] >= c:
                    code |= 1
                if _lerp2(img[y - 1, x], img[y - 1, x + 1],
                          img[y, x], img[y, x + 1], r, u) >= c:
                    code |= 2
                if img[y - 1, x] >= c:
                    code |= 4
                if _lerp2(img[y - 1, x - 1], img[y - 1, x],
                          img[y, x - 1], img[y, x], u, u) >= c:
                    code |= 8
                if img[y, x - 1] >= c:
                    code |= 16
                if _lerp2(img[y, x - 1], img[y, x],
                          img[y + 1, x - 1], img[y + 1, x], u, r) >= c:
                    code |= 32
                if img[y + 1, x] >= c:
                    code |= 64
                if _lerp2(img[y, x], img[y, x + 1],
                          img[y + 1, x], img[y + 1, x + 1], r, r) >= c:
                    code |= 128
                out[y - 1, x - 1] = <unsigned char> code
    return out_arr


def convolve_valid(inp, kernels):
    # BLAS-backed tensordot beats any portable compiled loop for dense
    # valid correlation, so the dispatcher uses it on both sides; the
    # compiled loop variant below stays available as a cross-check.
    from . import fallback

    return fallback.convolve_valid(inp, kernels)


def convolve_valid_loops(double[:, :, ::1] inp, double[:, :, :, ::1] kernels):
    cdef Py_ssize_t h = inp.shape[0]
    cdef Py_ssize_t w = inp.shape[1]
    cdef Py_ssize_t c = inp.shape[2]
    cdef Py_ssize_t f = kernels.shape[0]
    cdef Py_ssize_t k = kernels.shape[1]
    cdef Py_ssize_t oh = h - k + 1
    cdef Py_ssize_t ow = w - k + 1
    out_arr = np.zeros((oh, ow, f), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    # (k, k, c, f) layout puts the filter axis innermost and contiguous for
    # both reads and writes, which lets the accumulation loop vectorize.
    kt_arr = np.ascontiguousarray(np.transpose(kernels, (1, 2, 3, 0)))
    cdef double[:, :, :, ::1] kt = kt_arr
    cdef Py_ssize_t i, j, ki, kj, ci
    with nogil:
        for i in range(oh):
            for ki in range(k):
                for kj in range(k):
                    for j in range(ow):
                        for ci in range(c):
                            pw_axpy(f, inp[i + ki, j + kj, ci],
                                    &kt[ki, kj, ci, 0], &out[i, j, 0])
    return out_arr


def lp_pool(double[:, :, ::1] t, double p, Py_ssize_t window, Py_ssize_t stride):
    cdef Py_ssize_t h = t.shape[0]
    cdef Py_ssize_t w = t.shape[1]
    cdef Py_ssize_t f = t.shape[2]
    cdef Py_ssize_t oh = (h - window) // stride + 1
    cdef Py_ssize_t ow = (w - window) // stride + 1
    out_arr = np.empty((oh, ow, f), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, fi, wi, wj, y, x
    cdef double acc, v
    with nogil:
        for i in range(oh):
            y = i * stride
            for j in range(ow):
                x = j * stride
                for fi in range(f):
                    acc = 0.0
                    if p == 1.0:
                        for wi in range(window):
                            for wj in range(window):
                                acc += fabs(t[y + wi, x + wj, fi])
                        out[i, j, fi] = acc
                    elif p == 2.0:
                        for wi in range(window):
                            for wj in range(window):
                                v = t[y + wi, x + wj, fi]
                                acc += v * v
                        out[i, j, fi] = sqrt(acc)
                    else:
                        for wi in range(window):
                            for wj in range(window):
                                acc += pow(fabs(t[y + wi, x + wj, fi]), p)
                        out[i, j, fi] = pow(acc, 1.0 / p)
    return out_arr


def divisive_normalize(double[:, :, ::1] t):
    cdef Py_ssize_t h = t.shape[0]
    cdef Py_ssize_t w = t.shape[1]
    cdef Py_ssize_t f = t.shape[2]
    s2_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] s2 = s2_arr
    out_arr = np.empty((h, w, f), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, fi, dy, dx, yy, xx
    cdef double acc, denom
    with nogil:
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for fi in range(f):
                    acc += t[i, j, fi] * t[i, j, fi]
                s2[i, j] = acc
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for dy in range(-1, 2):
                    yy = i + dy
                    if yy < 0 or yy >= h:
                        continue
                    for dx in range(-1, 2):
                        xx = j + dx
                        if xx < 0 or xx >= w:
                            continue
                        acc += s2[yy, xx]
                denom = sqrt(acc)
                if denom < 1.0:
                    denom = 1.0
                for fi in range(f):
                    out[i, j, fi] = t[i, j, fi] / denom
    return out_arr


def dcd_epoch(double[:, ::1] x, double[::1] y, double[::1] qdiag,
              double[::1] alpha, double[::1] w, double c_penalty,
              Py_ssize_t[::1] perm):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t t, i, j
    cdef double g, a, pg, v, new, delta, maxpg
    maxpg = 0.0
    with nogil:
        for t in range(perm.shape[0]):
            i = perm[t]
            g = 0.0
            for j in range(d):
                g += w[j] * x[i, j]
            g = y[i] * g - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = g if g < 0.0 else 0.0
            elif a == c_penalty:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            v = fabs(pg)
            if v > maxpg:
                maxpg = v
            if v > 1e-12:
                new = a - g / qdiag[i]
                if new < 0.0:
                    new = 0.0
                elif new > c_penalty:
                    new = c_penalty
                alpha[i] = new
                delta = (new - a) * y[i]
                if delta != 0.0:
                    for j in range(d):
                        w[j] += delta * x[i, j]
    return maxpg


def householder_tridiag(double[:, ::1] a_in):
    cdef Py_ssize_t n = a_in.shape[0]
    a_arr = np.array(a_in, dtype=np.float64, copy=True)
    q_arr = np.eye(n, dtype=np.float64)
    d_arr = np.empty(n, dtype=np.float64)
    e_arr = np.zeros(n - 1 if n > 1 else 0, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] q = q_arr
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    v_arr = np.zeros(n, dtype=np.float64)
    w_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] wv = w_arr
    cdef Py_ssize_t k, i, j
    cdef double xnorm, alpha, vnorm, tau, qv
    with nogil:
        for k in range(n - 2):
            xnorm = 0.0
            for i in range(k + 1, n):
                xnorm += a[i, k] * a[i, k]
            xnorm = sqrt(xnorm)
            if xnorm == 0.0:
                continue
            if a[k + 1, k] != 0.0:
                alpha = -copysign(xnorm, a[k + 1, k])
            else:
                alpha = -xnorm
            vnorm = 0.0
            for i in range(k + 1, n):
                v[i] = a[i, k]
                if i == k + 1:
                    v[i] -= alpha
                vnorm += v[i] * v[i]
            vnorm = sqrt(vnorm)
            if vnorm == 0.0:
                continue
            for i in range(k + 1, n):
                v[i] /= vnorm
            # wv = A[k+1:, k+1:] @ v, then subtract tau*v
            tau = 0.0
            for i in range(k + 1, n):
                wv[i] = 0.0
                for j in range(k + 1, n):
                    wv[i] += a[i, j] * v[j]
                tau += v[i] * wv[i]
            for i in range(k + 1, n):
                wv[i] -= tau * v[i]
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i, j] -= 2.0 * (v[i] * wv[j] + wv[i] * v[j])
            for i in range(k + 1, n):
                a[i, k] = 0.0
                a[k, i] = 0.0
            a[k + 1, k] = alpha
            a[k, k + 1] = alpha
            # Q[:, k+1:] -= 2 (Q v) v^T
            for i in range(n):
                qv = 0.0
                for j in range(k + 1, n):
                    qv += q[i, j] * v[j]
                for j in range(k + 1, n):
                    q[i, j] -= 2.0 * qv * v[j]
        for i in range(n):
            d[i] = a[i, i]
        for i in range(n - 1):
            e[i] = a[i + 1, i]
    return d_arr, e_arr, q_arr


cdef Py_ssize_t _tql(double[::1] d, double[::1] ework, double[:, ::1] z,
                     Py_ssize_t n, Py_ssize_t cap_total) nogil:
    cdef Py_ssize_t l, m, i, k, total
    cdef double dd, g, r, s, c, p, f, b, zi, zi1
    cdef bint underflow
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(ework[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > cap_total:
                return -total
            g = (d[l + 1] - d[l]) / (2.0 * ework[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + ework[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * ework[i]
                b = c * ework[i]
                r = hypot(f, g)
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
                for k in range(n):
                    zi = z[k, i]
                    zi1 = z[k, i + 1]
                    z[k, i + 1] = s * zi + c * zi1
                    z[k, i] = c * zi - s * zi1
            if underflow:
                continue
            d[l] -= p
            ework[l] = g
            ework[m] = 0.0
    return total


def tql_implicit(double[::1] d, double[::1] e, double[:, ::1] z,
                 Py_ssize_t cap_total):
    cdef Py_ssize_t n = d.shape[0]
    if n == 1:
        return 0
    ework_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] ework = ework_arr
    cdef Py_ssize_t i
    for i in range(n - 1):
        ework[i] = e[i]
    return _tql(d, ework, z, n, cap_total)
