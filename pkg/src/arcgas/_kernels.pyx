# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Metropolis sweep for the interpolated gas in angle coordinates.

Log-density of a configuration theta in [0, pi]^n:

    beta * sum_{i<j} log|cos theta_i - cos theta_j|
    - beta * s * X^t A X
    - (1 - beta/2) * s * d.X
    + sum_i log sin theta_i

with X_k = sum_i cos(k theta_i), k = 1..K.
"""

import numpy as np
from libc.math cimport log, cos, sin, fabs, M_PI


cdef inline double _reflect(double x) nogil:
    if x < 0.0:
        return -x
    if x > M_PI:
        return 2.0 * M_PI - x
    return x


cdef double _delta(double[::1] theta, double[::1] ctheta, double[::1] Y,
                   double[:, ::1] A, double[::1] dvec, double beta, double s,
                   Py_ssize_t mu, double new, double[::1] dk) noexcept nogil:
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t K = Y.shape[0]
    cdef Py_ssize_t nu, k, l
    cdef double c_old = ctheta[mu]
    cdef double c_new = cos(new)
    cdef double prod = 1.0, acc = 0.0, quad = 0.0, lin = 0.0, tmp
    cdef double tkm1_o, tk_o, tkm1_n, tk_n
    for nu in range(n):
        if nu != mu:
            prod *= fabs((c_new - ctheta[nu]) / (c_old - ctheta[nu]))
            if prod > 1e150 or prod < 1e-150:
                acc += log(prod)
                prod = 1.0
    acc += log(prod)
    cdef double delta = beta * acc + log(sin(new) / sin(theta[mu]))
    if K > 0:
        # cos(k new) - cos(k old) by the Chebyshev recurrence
        tkm1_o = 1.0
        tk_o = c_old
        tkm1_n = 1.0
        tk_n = c_new
        for k in range(K):
            dk[k] = tk_n - tk_o
            tmp = 2.0 * c_old * tk_o - tkm1_o
            tkm1_o = tk_o
            tk_o = tmp
            tmp = 2.0 * c_new * tk_n - tkm1_n
            tkm1_n = tk_n
            tk_n = tmp
        for k in range(K):
            tmp = 0.0
            for l in range(K):
                tmp += A[k, l] * dk[l]
            quad += dk[k] * (2.0 * Y[k] + tmp)
            lin += dvec[k] * dk[k]
        delta -= beta * s * quad + (1.0 - 0.5 * beta) * s * lin
    return delta


def delta_energy(double[::1] theta, double[::1] ctheta, double[::1] Y,
                 double[:, ::1] A, double[::1] dvec, double beta, double s,
                 Py_ssize_t mu, double new):
    """Change in log-density when particle mu moves to angle ``new``."""
    dk = np.empty(max(Y.shape[0], 1))
    return _delta(theta, ctheta, Y, A, dvec, beta, s, mu, new, dk)


def sweep(double[::1] theta, double[::1] ctheta, double[::1] X, double[::1] Y,
          double[:, ::1] A, double[::1] dvec, double beta, double s, double step,
          double[::1] proposals, double[::1] uniforms):
    """One pass of single-site moves over all particles.

    theta, ctheta: angles and their cosines, updated in place.
    X, Y: cached cosine sums and A @ X, updated in place.
    proposals, uniforms: n numbers each, uniforms in (0, 1].
    Returns the number of accepted moves.
    """
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t K = X.shape[0]
    cdef Py_ssize_t mu, k, l
    cdef double new, delta, tmp
    cdef int accepted = 0
    cdef double[::1] dk = np.empty(max(K, 1))

    with nogil:
        for mu in range(n):
            new = _reflect(theta[mu] + step * (2.0 * proposals[mu] - 1.0))
            if new <= 0.0 or new >= M_PI:
                continue
            delta = _delta(theta, ctheta, Y, A, dvec, beta, s, mu, new, dk)
            if log(uniforms[mu]) < delta:
                theta[mu] = new
                ctheta[mu] = cos(new)
                accepted += 1
                for k in range(K):
                    X[k] += dk[k]
                for k in range(K):
                    tmp = 0.0
                    for l in range(K):
                        tmp += A[k, l] * dk[l]
                    Y[k] += tmp
    return accepted


def cos_sums(double[::1] theta, Py_ssize_t K):
    """X_k = sum_mu cos(k theta_mu) for k = 1..K."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t mu, k
    cdef double c, t0, t1, t2
    out = np.zeros(K)
    cdef double[::1] X = out
    with nogil:
        for mu in range(n):
            c = cos(theta[mu])
            t0 = 1.0
            t1 = c
            for k in range(K):
                X[k] += t1
                t2 = 2.0 * c * t1 - t0
                t0 = t1
                t1 = t2
    return out
