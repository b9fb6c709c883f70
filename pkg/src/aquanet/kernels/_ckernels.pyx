# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_python``.

Each function mirrors its numpy counterpart's signature and semantics. The
loops are fused so one pass over memory replaces a dozen numpy temporaries.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sig(double z) nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def lstm_gates_forward(const double[:, ::1] z, const double[:, ::1] c_prev):
    cdef Py_ssize_t B = z.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, u
    gates_a = np.empty((B, 4 * H))
    c_a = np.empty((B, H))
    tc_a = np.empty((B, H))
    h_a = np.empty((B, H))
    cdef double[:, ::1] gates = gates_a
    cdef double[:, ::1] c = c_a
    cdef double[:, ::1] tc = tc_a
    cdef double[:, ::1] h = h_a
    cdef double f, i, g, o, cv, t
    with nogil:
        for b in range(B):
            for u in range(H):
                f = _sig(z[b, u])
                i = _sig(z[b, H + u])
                g = tanh(z[b, 2 * H + u])
                o = _sig(z[b, 3 * H + u])
                gates[b, u] = f
                gates[b, H + u] = i
                gates[b, 2 * H + u] = g
                gates[b, 3 * H + u] = o
                cv = f * c_prev[b, u] + i * g
                t = tanh(cv)
                c[b, u] = cv
                tc[b, u] = t
                h[b, u] = o * t
    return gates_a, c_a, tc_a, h_a


def lstm_gates_backward(const double[:, ::1] gates, const double[:, ::1] c_prev,
                        const double[:, ::1] tanh_c, const double[:, ::1] dh,
                        const double[:, ::1] dc_next):
    cdef Py_ssize_t B = gates.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, u
    dz_a = np.empty((B, 4 * H))
    dcp_a = np.empty((B, H))
    cdef double[:, ::1] dz = dz_a
    cdef double[:, ::1] dcp = dcp_a
    cdef double f, i, g, o, t, dc, dhv
    with nogil:
        for b in range(B):
            for u in range(H):
                f = gates[b, u]
                i = gates[b, H + u]
                g = gates[b, 2 * H + u]
                o = gates[b, 3 * H + u]
                t = tanh_c[b, u]
                dhv = dh[b, u]
                dc = dc_next[b, u] + dhv * o * (1.0 - t * t)
                dz[b, u] = dc * c_prev[b, u] * f * (1.0 - f)
                dz[b, H + u] = dc * g * i * (1.0 - i)
                dz[b, 2 * H + u] = dc * i * (1.0 - g * g)
                dz[b, 3 * H + u] = dhv * t * o * (1.0 - o)
                dcp[b, u] = dc * f
    return dz_a, dcp_a


def causal_conv_forward(const double[:, :, ::1] x, w, const double[::1] bias, Py_ssize_t dilation):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t T = x.shape[1]
    cdef Py_ssize_t C = x.shape[2]
    cdef Py_ssize_t F = w.shape[0]
    cdef Py_ssize_t k = w.shape[2]
    # (k, C, F) so the innermost loop walks contiguous filters.
    cdef const double[:, :, ::1] wt = np.ascontiguousarray(np.transpose(w, (2, 1, 0)))
    y_a = np.empty((B, T, F))
    cdef double[:, :, ::1] y = y_a
    cdef Py_ssize_t b, t, j, c, f, src
    cdef double xv
    with nogil:
        for b in range(B):
            for t in range(T):
                for f in range(F):
                    y[b, t, f] = bias[f]
                for j in range(k):
                    src = t - (k - 1 - j) * dilation
                    if src < 0:
                        continue
                    for c in range(C):
                        xv = x[b, src, c]
                        for f in range(F):
                            y[b, t, f] += wt[j, c, f] * xv
    return y_a


def causal_conv_backward(const double[:, :, ::1] x, w, Py_ssize_t dilation, const double[:, :, ::1] dy):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t T = x.shape[1]
    cdef Py_ssize_t C = x.shape[2]
    cdef Py_ssize_t F = w.shape[0]
    cdef Py_ssize_t k = w.shape[2]
    cdef const double[:, :, ::1] wt = np.ascontiguousarray(np.transpose(w, (2, 1, 0)))
    dx_a = np.zeros((B, T, C))
    dwt_a = np.zeros((k, C, F))
    db_a = np.zeros(F)
    cdef double[:, :, ::1] dx = dx_a
    cdef double[:, :, ::1] dwt = dwt_a
    cdef double[::1] db = db_a
    cdef Py_ssize_t b, t, j, c, f, src
    cdef double xv, acc, g
    with nogil:
        for b in range(B):
            for t in range(T):
                for f in range(F):
                    db[f] += dy[b, t, f]
                for j in range(k):
                    src = t - (k - 1 - j) * dilation
                    if src < 0:
                        continue
                    for c in range(C):
                        xv = x[b, src, c]
                        acc = 0.0
                        for f in range(F):
                            g = dy[b, t, f]
                            dwt[j, c, f] += g * xv
                            acc += wt[j, c, f] * g
                        dx[b, src, c] += acc
    return dx_a, np.ascontiguousarray(np.transpose(dwt_a, (2, 1, 0))), db_a


def rank_auc(const double[::1] scores, const signed char[::1] labels):
    cdef Py_ssize_t n = scores.shape[0]
    cdef cnp.intp_t[::1] order = np.argsort(scores, kind="mergesort")
    cdef Py_ssize_t start = 0, end, idx
    cdef double v, midrank, rank_sum = 0.0
    cdef Py_ssize_t n_pos = 0, pos_in_group
    with nogil:
        while start < n:
            v = scores[order[start]]
            end = start + 1
            while end < n and scores[order[end]] == v:
                end += 1
            pos_in_group = 0
            for idx in range(start, end):
                if labels[order[idx]]:
                    pos_in_group += 1
            midrank = (start + end + 1) / 2.0
            rank_sum += midrank * pos_in_group
            n_pos += pos_in_group
            start = end
    cdef Py_ssize_t n_neg = n - n_pos
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (<double>n_pos * n_neg)
