"""Pure-Python versions of the compiled sweep kernels (same signatures)."""

import math

import numpy as np


def _reflect(x):
    if x < 0.0:
        return -x
    if x > math.pi:
        return 2.0 * math.pi - x
    return x


def _delta_and_dk(theta, ctheta, Y, A, dvec, beta, s, mu, new):
    c_old = ctheta[mu]
    c_new = math.cos(new)
    others = np.delete(ctheta, mu)
    pair = float(np.sum(np.log(np.abs((c_new - others) / (c_old - others)))))
    delta = beta * pair + math.log(math.sin(new) / math.sin(theta[mu]))
    K = len(Y)
    if K == 0:
        return delta, None
    k = np.arange(1, K + 1)
    dk = np.cos(k * new) - np.cos(k * theta[mu])
    quad = float(dk @ (2.0 * Y + A @ dk))
    delta -= beta * s * quad + (1.0 - 0.5 * beta) * s * float(dvec @ dk)
    return delta, dk


def delta_energy(theta, ctheta, Y, A, dvec, beta, s, mu, new):
    return _delta_and_dk(theta, ctheta, Y, A, dvec, beta, s, mu, new)[0]


def sweep(theta, ctheta, X, Y, A, dvec, beta, s, step, proposals, uniforms):
    n = len(theta)
    accepted = 0
    for mu in range(n):
        new = _reflect(theta[mu] + step * (2.0 * proposals[mu] - 1.0))
        if new <= 0.0 or new >= math.pi:
            continue
        delta, dk = _delta_and_dk(theta, ctheta, Y, A, dvec, beta, s, mu, new)
        if math.log(uniforms[mu]) < delta:
            theta[mu] = new
            ctheta[mu] = math.cos(new)
            accepted += 1
            if dk is not None:
                X += dk
                Y += A @ dk
    return accepted


def cos_sums(theta, K):
    k = np.arange(1, K + 1)
    return np.cos(np.outer(theta, k)).sum(axis=0)
