# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels: sRGB/CIELab conversion, Lab histogram,
mean Lab distance and luminance.  Semantics match ``_npimpl`` exactly
(float32 in/out, float64 math)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cbrt, floor, pow, sqrt

cnp.import_array()

cdef double XN = 0.95047
cdef double YN = 1.0
cdef double ZN = 1.08883

cdef double DELTA = 6.0 / 29.0
cdef double DELTA3 = DELTA * DELTA * DELTA
cdef double F_SLOPE = 1.0 / (3.0 * DELTA * DELTA)


cdef inline double _linearize(double s) nogil:
    if s <= 0.04045:
        return s / 12.92
    return pow((s + 0.055) / 1.055, 2.4)


cdef inline double _encode(double l) nogil:
    if l <= 0.0031308:
        return 12.92 * l
    if l < 0.0:
        return 0.0
    return 1.055 * pow(l, 1.0 / 2.4) - 0.055


cdef inline double _f(double t) nogil:
    if t > DELTA3:
        return cbrt(t)
    return t * F_SLOPE + 4.0 / 29.0


cdef inline double _finv(double u) nogil:
    if u > DELTA:
        return u * u * u
    return (u - 4.0 / 29.0) / F_SLOPE


cdef inline void _pixel_to_lab(double r, double g, double b,
                               double* L, double* A, double* B) nogil:
    cdef double lr = _linearize(r)
    cdef double lg = _linearize(g)
    cdef double lb = _linearize(b)
    cdef double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb
    cdef double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb
    cdef double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb
    cdef double fx = _f(x / XN)
    cdef double fy = _f(y / YN)
    cdef double fz = _f(z / ZN)
    L[0] = 116.0 * fy - 16.0
    A[0] = 500.0 * (fx - fy)
    B[0] = 200.0 * (fy - fz)


cdef inline double _clamp01(double v) nogil:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def srgb_to_lab(cnp.ndarray[cnp.float32_t, ndim=3] rgb not None):
    cdef Py_ssize_t h = rgb.shape[0]
    cdef Py_ssize_t w = rgb.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=3] out = np.empty((h, w, 3), dtype=np.float32)
    cdef Py_ssize_t i, j
    cdef double L, A, B
    cdef cnp.float32_t[:, :, ::1] src = np.ascontiguousarray(rgb)
    cdef cnp.float32_t[:, :, ::1] dst = out
    with nogil:
        for i in range(h):
            for j in range(w):
                _pixel_to_lab(src[i, j, 0], src[i, j, 1], src[i, j, 2], &L, &A, &B)
                dst[i, j, 0] = <cnp.float32_t> L
                dst[i, j, 1] = <cnp.float32_t> A
                dst[i, j, 2] = <cnp.float32_t> B
    return out


def lab_to_srgb(cnp.ndarray[cnp.float32_t, ndim=3] lab not None):
    cdef Py_ssize_t h = lab.shape[0]
    cdef Py_ssize_t w = lab.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=3] out = np.empty((h, w, 3), dtype=np.float32)
    cdef Py_ssize_t i, j
    cdef double fy, fx, fz, x, y, z, lr, lg, lb
    cdef cnp.float32_t[:, :, ::1] src = np.ascontiguousarray(lab)
    cdef cnp.float32_t[:, :, ::1] dst = out
    with nogil:
        for i in range(h):
            for j in range(w):
                fy = (src[i, j, 0] + 16.0) / 116.0
                fx = fy + src[i, j, 1] / 500.0
                fz = fy - src[i, j, 2] / 200.0
                x = XN * _finv(fx)
                y = YN * _finv(fy)
                z = ZN * _finv(fz)
                lr = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z
                lg = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z
                lb = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z
                dst[i, j, 0] = <cnp.float32_t> _clamp01(_encode(lr))
                dst[i, j, 1] = <cnp.float32_t> _clamp01(_encode(lg))
                dst[i, j, 2] = <cnp.float32_t> _clamp01(_encode(lb))
    return out


def mean_lab_distance(cnp.ndarray[cnp.float32_t, ndim=3] rgb_a not None,
                      cnp.ndarray[cnp.float32_t, ndim=3] rgb_b not None):
    cdef Py_ssize_t h = rgb_a.shape[0]
    cdef Py_ssize_t w = rgb_a.shape[1]
    cdef Py_ssize_t i, j
    cdef double la, aa, ba, lb_, ab, bb, dl, da, db, acc = 0.0
    cdef cnp.float32_t[:, :, ::1] a = np.ascontiguousarray(rgb_a)
    cdef cnp.float32_t[:, :, ::1] b = np.ascontiguousarray(rgb_b)
    with nogil:
        for i in range(h):
            for j in range(w):
                _pixel_to_lab(a[i, j, 0], a[i, j, 1], a[i, j, 2], &la, &aa, &ba)
                _pixel_to_lab(b[i, j, 0], b[i, j, 1], b[i, j, 2], &lb_, &ab, &bb)
                dl = la - lb_
                da = aa - ab
                db = ba - bb
                acc += sqrt(dl * dl + da * da + db * db)
    return acc / (h * w)


def mean_lab_distance_lab(cnp.ndarray[cnp.float32_t, ndim=3] lab_a not None,
                          cnp.ndarray[cnp.float32_t, ndim=3] lab_b not None):
    cdef Py_ssize_t h = lab_a.shape[0]
    cdef Py_ssize_t w = lab_a.shape[1]
    cdef Py_ssize_t i, j
    cdef double dl, da, db, acc = 0.0
    cdef cnp.float32_t[:, :, ::1] a = np.ascontiguousarray(lab_a)
    cdef cnp.float32_t[:, :, ::1] b = np.ascontiguousarray(lab_b)
    with nogil:
        for i in range(h):
            for j in range(w):
                dl = <double> a[i, j, 0] - <double> b[i, j, 0]
                da = <double> a[i, j, 1] - <double> b[i, j, 1]
                db = <double> a[i, j, 2] - <double> b[i, j, 2]
                acc += sqrt(dl * dl + da * da + db * db)
    return acc / (h * w)


def lab_histogram(cnp.ndarray[cnp.float32_t, ndim=3] lab not None):
    cdef Py_ssize_t h = lab.shape[0]
    cdef Py_ssize_t w = lab.shape[1]
    cdef Py_ssize_t i, j
    cdef long il, ia, ib
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(8000, dtype=np.int64)
    cdef cnp.int64_t[::1] c = counts
    cdef cnp.float32_t[:, :, ::1] src = np.ascontiguousarray(lab)
    with nogil:
        for i in range(h):
            for j in range(w):
                il = <long> floor(src[i, j, 0] * 0.2)
                ia = <long> floor((src[i, j, 1] + 128.0) * (20.0 / 255.0))
                ib = <long> floor((src[i, j, 2] + 128.0) * (20.0 / 255.0))
                if il < 0:
                    il = 0
                elif il > 19:
                    il = 19
                if ia < 0:
                    ia = 0
                elif ia > 19:
                    ia = 19
                if ib < 0:
                    ib = 0
                elif ib > 19:
                    ib = 19
                c[il * 400 + ia * 20 + ib] += 1
    return (counts.astype(np.float64) / (h * w)).astype(np.float32)


def luminance(cnp.ndarray[cnp.float32_t, ndim=3] rgb not None):
    cdef Py_ssize_t h = rgb.shape[0]
    cdef Py_ssize_t w = rgb.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=2] out = np.empty((h, w), dtype=np.float32)
    cdef Py_ssize_t i, j
    cdef cnp.float32_t[:, :, ::1] src = np.ascontiguousarray(rgb)
    cdef cnp.float32_t[:, ::1] dst = out
    with nogil:
        for i in range(h):
            for j in range(w):
                dst[i, j] = <cnp.float32_t> (
                    0.299 * <double> src[i, j, 0]
                    + 0.587 * <double> src[i, j, 1]
                    + 0.114 * <double> src[i, j, 2]
                )
    return out


ctypedef fused floating:
    cnp.float32_t
    cnp.float64_t


def adam_step(floating[::1] pv not None,
              floating[::1] mv not None,
              floating[::1] vv not None,
              floating[::1] gv not None,
              double lr, double corr1, double corr2,
              double beta1, double beta2, double eps):
    """One Adam update over flat parameter views, float64 math, in place."""
    cdef Py_ssize_t n = pv.shape[0]
    if mv.shape[0] != n or vv.shape[0] != n or gv.shape[0] != n:
        raise ValueError("adam_step buffers must share one length")
    cdef Py_ssize_t i
    cdef double gi, mi, vi
    with nogil:
        for i in range(n):
            gi = <double> gv[i]
            mi = beta1 * <double> mv[i] + (1.0 - beta1) * gi
            vi = beta2 * <double> vv[i] + (1.0 - beta2) * (gi * gi)
            mv[i] = <floating> mi
            vv[i] = <floating> vi
            pv[i] = <floating> (
                <double> pv[i] - lr * (mi / corr1) / (sqrt(vi / corr2) + eps)
            )
