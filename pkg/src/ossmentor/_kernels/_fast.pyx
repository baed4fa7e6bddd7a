# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled MLP kernels.

Same contract as ossmentor._kernels._pure; explicit loops beat numpy on
the tiny matrices used here (hidden layer of 64, inputs under 10 wide)
because per-call dispatch overhead dominates.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def two_head_forward(double[::1] x, double[:, ::1] w1, double[::1] b1,
                     double[:, ::1] wa, double[::1] ba,
                     double[:, ::1] wb, double[::1] bb):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_h = w1.shape[0]
    cdef Py_ssize_t n_a = wa.shape[0]
    cdef Py_ssize_t n_b = wb.shape[0]
    cdef cnp.ndarray[double, ndim=1] z = np.empty(n_h)
    cdef cnp.ndarray[double, ndim=1] h = np.empty(n_h)
    cdef cnp.ndarray[double, ndim=1] a = np.empty(n_a)
    cdef cnp.ndarray[double, ndim=1] b = np.empty(n_b)
    cdef double[::1] zv = z, hv = h, av = a, bv = b
    cdef Py_ssize_t i, j
    cdef double acc

    for i in range(n_h):
        acc = b1[i]
        for j in range(n_in):
            acc += w1[i, j] * x[j]
        zv[i] = acc
        hv[i] = acc if acc > 0.0 else 0.0
    for i in range(n_a):
        acc = ba[i]
        for j in range(n_h):
            acc += wa[i, j] * hv[j]
        av[i] = acc
    for i in range(n_b):
        acc = bb[i]
        for j in range(n_h):
            acc += wb[i, j] * hv[j]
        bv[i] = acc
    return z, h, a, b


def two_head_backward(double[::1] x, double[::1] z, double[::1] h,
                      double[::1] da, double[::1] db,
                      double[:, ::1] wa, double[:, ::1] wb):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_h = z.shape[0]
    cdef Py_ssize_t n_a = da.shape[0]
    cdef Py_ssize_t n_b = db.shape[0]
    cdef cnp.ndarray[double, ndim=2] g_w1 = np.empty((n_h, n_in))
    cdef cnp.ndarray[double, ndim=1] g_b1 = np.empty(n_h)
    cdef cnp.ndarray[double, ndim=2] g_wa = np.empty((n_a, n_h))
    cdef cnp.ndarray[double, ndim=2] g_wb = np.empty((n_b, n_h))
    cdef double[:, ::1] g_w1v = g_w1
    cdef double[::1] g_b1v = g_b1
    cdef double[:, ::1] g_wav = g_wa
    cdef double[:, ::1] g_wbv = g_wb
    cdef Py_ssize_t i, j
    cdef double dz

    for i in range(n_a):
        for j in range(n_h):
            g_wav[i, j] = da[i] * h[j]
    for i in range(n_b):
        for j in range(n_h):
            g_wbv[i, j] = db[i] * h[j]
    for j in range(n_h):
        if z[j] > 0.0:
            dz = 0.0
            for i in range(n_a):
                dz += wa[i, j] * da[i]
            for i in range(n_b):
                dz += wb[i, j] * db[i]
        else:
            dz = 0.0
        g_b1v[j] = dz
        for i in range(n_in):
            g_w1v[j, i] = dz * x[i]
    return g_w1, g_b1, g_wa, np.asarray(da).copy(), g_wb, np.asarray(db).copy()


def one_head_forward(double[::1] x, double[:, ::1] w1, double[::1] b1,
                     double[::1] w2, double b2):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_h = w1.shape[0]
    cdef cnp.ndarray[double, ndim=1] z = np.empty(n_h)
    cdef cnp.ndarray[double, ndim=1] h = np.empty(n_h)
    cdef double[::1] zv = z, hv = h
    cdef Py_ssize_t i, j
    cdef double acc, v

    v = b2
    for i in range(n_h):
        acc = b1[i]
        for j in range(n_in):
            acc += w1[i, j] * x[j]
        zv[i] = acc
        hv[i] = acc if acc > 0.0 else 0.0
        v += w2[i] * hv[i]
    return z, h, v


def one_head_backward(double[::1] x, double[::1] z, double[::1] h,
                      double dv, double[::1] w2):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_h = z.shape[0]
    cdef cnp.ndarray[double, ndim=2] g_w1 = np.empty((n_h, n_in))
    cdef cnp.ndarray[double, ndim=1] g_b1 = np.empty(n_h)
    cdef cnp.ndarray[double, ndim=1] g_w2 = np.empty(n_h)
    cdef double[:, ::1] g_w1v = g_w1
    cdef double[::1] g_b1v = g_b1
    cdef double[::1] g_w2v = g_w2
    cdef Py_ssize_t i, j
    cdef double dz

    for j in range(n_h):
        g_w2v[j] = dv * h[j]
        dz = dv * w2[j] if z[j] > 0.0 else 0.0
        g_b1v[j] = dz
        for i in range(n_in):
            g_w1v[j, i] = dz * x[i]
    return g_w1, g_b1, g_w2, dv
