"""Truncated arc-Grunsky operator and the linear algebra built on it.

The coefficients come from the expansion

    log|(z_e(cos a) - z_e(cos b)) / (cos a - cos b)|
        = -2 sum_{k,l >= 0} a_kl cos(ka) cos(lb),

so a_00 = -(1/(2 pi^2)) int int K and a_kl = -(2/pi^2) int int K cos cos
for k, l >= 1.  Both double integrals are evaluated with a 2D DCT on
midpoint nodes, which is spectrally accurate for the smooth kernel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft, linalg

from .equilibrium import EquilibriumData, cheb_nodes

logger = logging.getLogger(__name__)


class GrunskyError(RuntimeError):
    pass


@dataclass
class GrunskyMatrix:
    N: int
    a: np.ndarray
    b: np.ndarray
    a00: float
    quad_M: int
    decay_fit: tuple

    @property
    def cap(self) -> float:
        return float(np.exp(-2 * self.a00) / 2)


@dataclass
class PommerenkeSolution:
    h_scaled: np.ndarray
    s: float
    beta: float
    residual: float


def kernel_matrix(eq: EquilibriumData, quad_M: int) -> np.ndarray:
    theta = cheb_nodes(quad_M)
    if quad_M == eq.M:
        u = eq.u
    else:
        u = eq.u_of_theta(theta)
    return eq.log_kernel(theta[:, None], theta[None, :], u[:, None], u[None, :])


def grunsky_coeffs(eq: EquilibriumData, N: int = 64, quad_M: int | None = None) -> GrunskyMatrix:
    quad_M = quad_M or max(4 * N, eq.M)
    if quad_M < 4 * N:
        raise ValueError("quad_M must be at least 4N")
    K = kernel_matrix(eq, quad_M)
    # dctn type 2 gives 4 * sum K cos cos; the midpoint rule weight is (pi/quad_M)^2
    Y = fft.dctn(K, type=2) / (4 * quad_M ** 2)
    a00 = -0.5 * Y[0, 0]
    a = -2 * Y[1 : N + 1, 1 : N + 1]
    a = 0.5 * (a + a.T)
    k = np.arange(1, N + 1)
    b = np.sqrt(np.outer(k, k)) * a
    return GrunskyMatrix(N=N, a=a, b=b, a00=float(a00), quad_M=quad_M, decay_fit=_decay_fit(a))


def _decay_fit(a: np.ndarray):
    """Fit |a_k1| ~ A k^(-p) over k >= 8, ignoring entries at roundoff level."""
    N = len(a)
    k = np.arange(1, N + 1)
    col = np.abs(a[:, 0])
    floor = 1e-13 * max(np.max(np.abs(a)), 1e-300)
    sel = (k >= 8) & (col > floor)
    if sel.sum() < 3:
        return (0.0, np.inf)
    slope, icpt = np.polyfit(np.log(k[sel]), np.log(col[sel]), 1)
    return (float(np.exp(icpt)), float(-slope))


def min_eigenvalue(B: GrunskyMatrix):
    lam = linalg.eigvalsh(B.b)
    lmin = float(lam[0])
    logger.debug("arc-Grunsky spectrum in [%.6g, %.6g]", lam[0], lam[-1])
    return lmin, max(0.0, -lmin)


def fredholm_logdet(B: GrunskyMatrix, s: float = 1.0):
    """log det(I + s B_N) and a truncation error estimate.

    The estimate is the log-determinant change from dropping the last
    quarter of the modes, which bounds the contribution of the tail.
    """
    def logdet(n):
        if n == 0:
            return 0.0
        try:
            chol = linalg.cholesky(np.eye(n) + s * B.b[:n, :n], lower=True)
        except linalg.LinAlgError as exc:
            raise GrunskyError("I + B is not positive definite") from exc
        return 2 * float(np.sum(np.log(np.diag(chol))))

    full = logdet(B.N)
    return full, abs(full - logdet(3 * B.N // 4))


def _factor(B: GrunskyMatrix, s: float):
    system = np.eye(B.N) + s * B.b
    cond = np.linalg.cond(system)
    if cond > 1e12:
        raise GrunskyError(f"I + sB is ill-conditioned (cond {cond:.3g})")
    return linalg.cho_factor(system), system


def solve_interp(B: GrunskyMatrix, g_scaled, s: float, beta: float) -> PommerenkeSolution:
    """Solve (I + sB) h = -g / beta."""
    g = _fit(g_scaled, B.N)
    fac, system = _factor(B, s)
    h = linalg.cho_solve(fac, -g / beta)
    res = float(np.max(np.abs(system @ h + g / beta), initial=0.0))
    return PommerenkeSolution(h_scaled=h, s=s, beta=beta, residual=res)


def quad_form(B: GrunskyMatrix, u_scaled, v_scaled, s: float = 1.0) -> float:
    """u^t (I + sB)^{-1} v."""
    u = _fit(u_scaled, B.N)
    v = _fit(v_scaled, B.N)
    fac, _ = _factor(B, s)
    return float(u @ linalg.cho_solve(fac, v))


def bf_consistency(B: GrunskyMatrix, f_scaled, m_scaled) -> float:
    """||B f - m|| over the first N/2 entries."""
    half = B.N // 2
    lhs = B.b @ _fit(f_scaled, B.N)
    return float(np.linalg.norm(lhs[:half] - _fit(m_scaled, B.N)[:half]))


def pommerenke_residual(sol: PommerenkeSolution, g_scaled, B: GrunskyMatrix, grid: int = 257) -> float:
    """Max pointwise defect of the cosine-series form of the equation.

    With G(w) = sum g_k cos(kw), H(t) = sum h_k sin(kt) and its conjugate
    H~(w) = -sum h_k cos(kw), checks
    G(w) = -beta s sum_{k,l} k a_kl h_k cos(lw) + beta H~(w) on a grid.
    """
    k = np.arange(1, B.N + 1)
    g = _fit(g_scaled, B.N) / np.sqrt(k)
    h = sol.h_scaled / np.sqrt(k)
    w = np.linspace(0, np.pi, grid)
    C = np.cos(np.outer(w, k))
    coupling = (k * h) @ B.a
    rhs = -sol.beta * sol.s * (C @ coupling) - sol.beta * (C @ h)
    return float(np.max(np.abs(C @ g - rhs)))


def _fit(v, N):
    v = np.asarray(v, dtype=float)
    out = np.zeros(N)
    m = min(N, len(v))
    out[:m] = v[:m]
    return out
