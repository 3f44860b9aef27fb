"""Equilibrium measure, equilibrium parametrization and Chebyshev data.

The boundary correspondence phi(u) of the opened curve gives the
equilibrium parametrization in closed form.  With

    theta(u) = (phi(u) - phi(-u)) / 2,

theta is an increasing bijection of [0, pi] and tau_e(gamma(cos u)) =
cos(theta(u)).  Hence z_e(cos theta) = gamma(cos u(theta)), and the chain
rule gives

    z_e'(cos theta) = gamma'(cos u) sin(u) / (sin(theta) theta'(u)),

whose limit at the endpoints is |gamma'(+-1)| / theta'(0 or pi)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

from .arcs import ArcSpec
from .conformal import LaurentMap, OpenedCurve, conformal_data, psi_boundary


class ResolutionError(RuntimeError):
    pass


@dataclass
class ChebSeries:
    """Chebyshev-T coefficients: f = c0 + sum_k coeffs[k-1] T_k."""

    c0: float
    coeffs: np.ndarray

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def scaled(self, N: int | None = None) -> np.ndarray:
        """Vector (sqrt(k) c_k), k = 1..N."""
        c = self.coeffs if N is None else _pad(self.coeffs, N)
        return np.sqrt(np.arange(1, len(c) + 1)) * c

    def __call__(self, x):
        return self.c0 + np.polynomial.chebyshev.chebval(x, np.concatenate([[0.0], self.coeffs]))

    def truncate(self, N: int) -> "ChebSeries":
        return ChebSeries(self.c0, _pad(self.coeffs, N))

    @classmethod
    def from_coeffs(cls, coeffs, c0: float = 0.0) -> "ChebSeries":
        return cls(float(c0), np.asarray(coeffs, dtype=float))


def _pad(c, N):
    out = np.zeros(N)
    m = min(N, len(c))
    out[:m] = c[:m]
    return out


def cheb_nodes(M: int) -> np.ndarray:
    """Midpoint angles theta_j = pi (j + 1/2) / M."""
    return np.pi * (np.arange(M) + 0.5) / M


def cheb_transform(samples, N: int | None = None) -> ChebSeries:
    """Chebyshev coefficients from samples at the midpoint angles."""
    samples = np.asarray(samples, dtype=float)
    M = len(samples)
    y = fft.dct(samples, type=2) / M
    N = M - 1 if N is None else N
    if N > M - 1:
        raise ValueError("need at least N + 1 samples")
    return ChebSeries(float(y[0] / 2), y[1 : N + 1].copy())


def f_vector(N: int) -> np.ndarray:
    k = np.arange(1, N + 1)
    return np.where(k % 2 == 0, 2 / np.sqrt(k), 0.0)


@dataclass
class EquilibriumData:
    spec: ArcSpec
    curve: OpenedCurve
    lmap: LaurentMap
    theta: np.ndarray
    u: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    cap: float

    @property
    def M(self) -> int:
        return len(self.theta)

    def theta_of_u(self, u, order: int = 0):
        u = np.asarray(u, dtype=float)
        if order == 0:
            return 0.5 * (self.lmap.phi(u) - self.lmap.phi(-u))
        sign = -1 if order == 2 else 1
        return 0.5 * (self.lmap.phi(u, order) + sign * self.lmap.phi(-u, order))

    def u_of_theta(self, theta, tol: float = 1e-15, maxiter: int = 40):
        theta = np.asarray(theta, dtype=float)
        half = self.curve.M // 2
        u_tab = self.curve.u[: half + 1]
        th_tab = self.theta_of_u(u_tab)
        u = np.interp(theta, th_tab, u_tab)
        for _ in range(maxiter):
            step = (self.theta_of_u(u) - theta) / self.theta_of_u(u, 1)
            u = np.clip(u - step, 0.0, np.pi)
            if np.max(np.abs(step), initial=0.0) < tol:
                break
        else:
            raise ResolutionError("inversion of the equilibrium angle did not converge")
        return u

    def z_e(self, x):
        x = np.asarray(x, dtype=float)
        return self.spec.point(np.cos(self.u_of_theta(np.arccos(np.clip(x, -1, 1)))))

    def z_e_prime_theta(self, theta, u=None):
        theta = np.asarray(theta, dtype=float)
        if u is None:
            u = self.u_of_theta(theta)
        return self.spec.tangent(np.cos(u)) * np.sin(u) / (np.sin(theta) * self.theta_of_u(u, 1))

    def z_e_prime(self, x):
        x = np.asarray(x, dtype=float)
        return self.z_e_prime_theta(np.arccos(np.clip(x, -1, 1)))

    def log_kernel(self, theta1, theta2, u1=None, u2=None):
        """log|(z_e(cos a) - z_e(cos b)) / (cos a - cos b)|, without cancellation."""
        theta1, theta2 = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))
        u1 = self.u_of_theta(theta1) if u1 is None else np.broadcast_to(u1, theta1.shape)
        u2 = self.u_of_theta(theta2) if u2 is None else np.broadcast_to(u2, theta2.shape)
        dd = np.abs(self.spec.divided_difference(np.cos(u1), np.cos(u2)))
        same = theta1 == theta2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (np.sin(0.5 * (u1 + u2)) * np.sin(0.5 * (u1 - u2))
                     / (np.sin(0.5 * (theta1 + theta2)) * np.sin(0.5 * (theta1 - theta2))))
            out = np.log(dd) + np.log(np.abs(ratio))
        if np.any(same):
            diag = np.log(np.abs(self.z_e_prime_theta(theta1[same], u1[same])))
            out = np.array(out)
            out[same] = diag
        return out


def equilibrium_data(spec: ArcSpec, M: int = 512, conformal_M: int = 512,
                     curve=None, lmap=None) -> EquilibriumData:
    """Equilibrium parametrization sampled at M Chebyshev angles."""
    if lmap is None:
        curve, lmap = conformal_data(spec, conformal_M)
    eq = EquilibriumData(spec=spec, curve=curve, lmap=lmap, theta=cheb_nodes(M),
                         u=np.empty(0), z=np.empty(0), dz=np.empty(0), cap=lmap.cap_coeff / 2)
    eq.u = eq.u_of_theta(eq.theta)
    eq.z = spec.point(np.cos(eq.u))
    eq.dz = eq.z_e_prime_theta(eq.theta, eq.u)
    rate = eq.theta_of_u(curve.u[: curve.M // 2 + 1], 1)
    if rate.min() <= 0:
        raise ResolutionError("equilibrium angle is not monotone; increase M")
    return eq


def tau_e(spec: ArcSpec, curve: OpenedCurve, lmap: LaurentMap):
    """tau_e on the arc from the two boundary values of psi.

    Returns (t, tau) with t the arc parameter on the nodes u in [0, pi].
    """
    t, plus, minus = psi_boundary(spec, curve, lmap)
    gap = np.mod(np.angle(minus) - np.angle(plus), 2 * np.pi)
    tau = -np.cos(gap / 2)
    tau[0], tau[-1] = 1.0, -1.0
    return t, tau


def z_e_at_cheb_nodes(spec: ArcSpec, curve: OpenedCurve, lmap: LaurentMap, M: int) -> EquilibriumData:
    return equilibrium_data(spec, M, curve=curve, lmap=lmap)


def equilibrium_density(eq: EquilibriumData, u=None):
    """Density of the equilibrium measure with respect to arclength.

    Returns (t, density) at the nodes u (default: interior conformal nodes
    with u in (0, pi)).
    """
    if u is None:
        half = eq.curve.M // 2
        u = eq.curve.u[1:half]
    u = np.asarray(u, dtype=float)
    t = np.cos(u)
    dens = eq.theta_of_u(u, 1) / (np.pi * np.abs(eq.spec.tangent(t)) * np.sin(u))
    return t, dens


def d_vector(eq: EquilibriumData, N: int):
    """(d0 with the 2/pi normalization, scaled vector (sqrt(k) d_k))."""
    series = cheb_transform(np.log(np.abs(eq.dz)), N)
    d = -series.coeffs
    return -2 * series.c0, np.sqrt(np.arange(1, N + 1)) * d


def d_series(eq: EquilibriumData, N: int) -> ChebSeries:
    """Chebyshev series of d(z_e(t)) = -log|z_e'(t)|."""
    series = cheb_transform(np.log(np.abs(eq.dz)), N)
    return ChebSeries(-series.c0, -series.coeffs)


def m_samples(eq: EquilibriumData) -> np.ndarray:
    """m(z_e(t)) = -1/2 log|(1 - z_e(t)^2) / (1 - t^2)| at the nodes."""
    cu = np.cos(eq.u)
    lo = np.abs(eq.spec.divided_difference(cu, 1.0)) * (np.sin(eq.u / 2) / np.sin(eq.theta / 2)) ** 2
    hi = np.abs(eq.spec.divided_difference(cu, -1.0)) * (np.cos(eq.u / 2) / np.cos(eq.theta / 2)) ** 2
    return -0.5 * (np.log(lo) + np.log(hi))


def m_vector(eq: EquilibriumData, N: int) -> ChebSeries:
    return cheb_transform(m_samples(eq), N)


def z_e_prime_endpoints(eq: EquilibriumData, method: str = "limit"):
    """(|z_e'(1)|, |z_e'(-1)|).

    ``limit`` uses the closed-form one-sided limit |gamma'| / theta'^2;
    ``richardson`` extrapolates interior values in theta^2 instead.
    """
    if method == "limit":
        out = []
        for u_end, t_end in ((0.0, 1.0), (np.pi, -1.0)):
            rate = float(eq.theta_of_u(np.array(u_end), 1))
            out.append(float(np.abs(eq.spec.tangent(t_end))) / rate ** 2)
        return tuple(out)
    if method != "richardson":
        raise ValueError(method)
    out = []
    for end in (0.0, np.pi):
        h = 0.05 / 2.0 ** np.arange(5)
        theta = end + (h if end == 0.0 else -h)
        vals = np.abs(eq.z_e_prime_theta(theta))
        # the function is even about the endpoint, so eliminate h^2, h^4, ...
        table = [vals]
        for level in range(1, len(h)):
            prev = table[-1]
            fac = 4.0 ** level
            table.append((fac * prev[1:] - prev[:-1]) / (fac - 1))
        out.append(float(table[-1][0]))
    return tuple(out)


def frostman_potential(eq: EquilibriumData, t) -> np.ndarray:
    """(1/pi) int log|z_e(s) - z_e(t)| ds / sqrt(1 - s^2) for each t.

    The log|s - t| part integrates to -log 2 exactly; the smooth remainder
    uses the midpoint rule in theta.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phi = np.arccos(t)
    uphi = eq.u_of_theta(phi)
    K = eq.log_kernel(eq.theta[None, :], phi[:, None], eq.u[None, :], uphi[:, None])
    return -np.log(2) + K.mean(axis=1)
