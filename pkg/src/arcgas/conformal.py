"""Opened curve of an arc and the conformal maps of its two sides.

Opening the arc with s(z) = z + sqrt(z^2 - 1) produces a Jordan curve eta
that is symmetric under w -> 1/w.  Write D for its bounded side and D* for
the unbounded one.  The interior Riemann map F: D -> unit disk, F(0) = 0,
is obtained from the Szego kernel, which solves a second kind integral
equation with a smooth kernel (Kerzman-Stein).  Inversion symmetry then
gives everything else: the exterior map g with g(w) = 1 / F^{-1}(1/w),
its Laurent series, h = g^{-1}, and the boundary correspondence.

The curve is parametrized by u in [0, 2pi):

    eta(u) = gamma(cos u) + i * sigma * sin(u) * sqrt(Q(cos u)),
    Q(t)   = (gamma(t)^2 - 1) / (t^2 - 1),

so that 1/eta(u) = eta(-u).  Parameters u in (0, pi) trace the left side
of the arc traversed from -1 to 1 (the "+" side), u in (pi, 2pi) the right
side.  The boundary correspondence is stored as the continuous argument
phi(u) = arg F(eta(u)); the exterior map then satisfies
g(exp(-i phi(u))) = eta(-u).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .arcs import ArcSpec

logger = logging.getLogger(__name__)


class ConformalMapError(RuntimeError):
    pass


@dataclass
class OpenedCurve:
    """Samples of the opened curve eta on equispaced u nodes."""

    u: np.ndarray
    points: np.ndarray
    derivative: np.ndarray
    side: np.ndarray
    arc_param: np.ndarray
    sqrt_q: np.ndarray

    @property
    def M(self) -> int:
        return len(self.u)

    def inversion_defect(self) -> float:
        """max |eta(u) * eta(-u) - 1| over the nodes."""
        mirrored = self.points[(-np.arange(self.M)) % self.M]
        return float(np.max(np.abs(self.points * mirrored - 1)))


@dataclass
class DouglasSeries:
    """Fourier coefficients c_0..c_N of a real function on the unit circle."""

    fourier: np.ndarray

    def coefficient(self, k: int) -> complex:
        return self.fourier[k] if k >= 0 else np.conj(self.fourier[-k])


@dataclass
class LaurentMap:
    """Exterior map g of the opened curve and its boundary correspondence.

    ``coeffs[j]`` is the coefficient of w^(-j) in g(w) - cap_coeff * w.
    ``phase_coeffs`` hold the Fourier series of the periodic part of the
    correspondence phi(u) - u, so that phi can be evaluated anywhere.
    """

    cap_coeff: float
    coeffs: np.ndarray
    curve: OpenedCurve
    phase: np.ndarray
    phase_rate: np.ndarray
    phase_coeffs: np.ndarray
    szego_center: float
    residual: float

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, w):
        """Evaluate the truncated Laurent series of g at w (|w| >= 1)."""
        w = np.asarray(w, dtype=complex)
        inv = 1.0 / w
        acc = np.zeros(w.shape, dtype=complex)
        for c in self.coeffs[::-1]:
            acc = acc * inv + c
        return self.cap_coeff * w + acc

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        inv = 1.0 / w
        acc = np.zeros(w.shape, dtype=complex)
        for j in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * inv - j * self.coeffs[j]
        return self.cap_coeff + acc * inv * inv

    def u_of_phi(self, targets, tol: float = 1e-14, maxiter: int = 30):
        """Invert the correspondence: u with phi(u) = targets (unwrapped)."""
        targets = np.asarray(targets, dtype=float)
        u_ext = np.append(self.curve.u, 2 * np.pi)
        ph_ext = np.append(self.phase, self.phase[0] + 2 * np.pi)
        u = np.interp(targets, ph_ext, u_ext)
        for _ in range(maxiter):
            step = (self.phi(u) - targets) / self.phi(u, 1)
            u = u - step
            if np.max(np.abs(step)) < tol:
                break
        return u

    def interpolate(self, values, u):
        """Trigonometric interpolation of node samples at arbitrary u."""
        M = self.curve.M
        c = np.fft.fft(values) / M
        k = np.fft.fftfreq(M, 1.0 / M)
        c[M // 2] = 0
        return np.exp(1j * np.multiply.outer(np.asarray(u, dtype=float), k)) @ c

    def disk_samples(self, values, L: int | None = None):
        """Resample node values onto a uniform grid of the disk angle phi."""
        L = L or self.curve.M
        angles = self.phase[0] + 2 * np.pi * np.arange(L) / L
        out = self.interpolate(values, self.u_of_phi(angles))
        if np.isrealobj(values):
            out = out.real
        return angles, out

    def boundary_values(self):
        """g(exp(i theta)) on M equispaced theta nodes, via the correspondence."""
        M = self.curve.M
        theta = 2 * np.pi * np.arange(M) / M
        return theta, self(np.exp(1j * theta))

    def phi(self, u, order: int = 0):
        """Correspondence phi(u) (order 0), phi'(u) (1) or phi''(u) (2)."""
        u = np.asarray(u, dtype=float)
        k = np.arange(1, len(self.phase_coeffs))
        ang = np.multiply.outer(u, k)
        c = self.phase_coeffs
        if order == 0:
            base = c[0].real + u
            wave = (np.exp(1j * ang) * c[1:]).real
            return base + 2 * wave.sum(axis=-1)
        if order == 1:
            wave = (1j * k * np.exp(1j * ang) * c[1:]).real
            return 1 + 2 * wave.sum(axis=-1)
        wave = (-(k * k) * np.exp(1j * ang) * c[1:]).real
        return 2 * wave.sum(axis=-1)


def _spectral_derivative(values: np.ndarray) -> np.ndarray:
    M = len(values)
    k = np.fft.fftfreq(M, 1.0 / M)
    k[M // 2] = 0
    return np.fft.ifft(1j * k * np.fft.fft(values))


def _winding(points: np.ndarray) -> int:
    steps = np.angle(np.roll(points, -1) / points)
    return int(round(steps.sum() / (2 * np.pi)))


def open_arc(spec: ArcSpec, M: int = 512) -> OpenedCurve:
    """Sample both sheets of the opened curve as one closed curve."""
    if M % 2 or M < 128:
        raise ValueError("M must be even and at least 128")
    u = 2 * np.pi * np.arange(M) / M
    half = M // 2
    t_half = np.cos(u[: half + 1])
    t_half[0], t_half[-1] = 1.0, -1.0
    q = spec.divided_difference(t_half, 1.0) * spec.divided_difference(t_half, -1.0)
    root = np.sqrt(q)
    # follow one branch of sqrt(Q) along the arc
    for j in range(1, len(root)):
        if (root[j] * np.conj(root[j - 1])).real < 0:
            root[j] = -root[j]
    jumps = np.abs(np.diff(root)) / np.abs(root[1:])
    if jumps.max() > 0.5:
        raise ConformalMapError(f"branch tracking failed (jump {jumps.max():.3g}); increase M")
    idx = np.where(np.arange(M) <= half, np.arange(M), M - np.arange(M))
    t = t_half[idx]
    sq = root[idx]
    gamma = spec.point(t)
    sigma = 1.0
    points = gamma + 1j * sigma * np.sin(u) * sq
    wind = _winding(points)
    if wind == -1:
        sigma = -1.0
        sq = -sq
        points = gamma + 1j * np.sin(u) * sq
    elif wind != 1:
        raise ConformalMapError(f"opened curve has winding number {wind}")
    points[0], points[half] = 1.0, -1.0
    side = np.sign(np.sin(u)).astype(int)
    side[0] = side[half] = 0
    return OpenedCurve(u=u, points=points, derivative=_spectral_derivative(points),
                       side=side, arc_param=t, sqrt_q=sq)


def _szego_solve(curve: OpenedCurve):
    """Szego kernel S(z, 0) on the curve via the Kerzman-Stein equation."""
    z = curve.points
    dz = curve.derivative
    speed = np.abs(dz)
    tangent = dz / speed
    weight = speed * (2 * np.pi / curve.M)
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    cauchy = tangent[None, :] / (2j * np.pi * diff)
    adjoint = np.conj(tangent[:, None] / (2j * np.pi * (-diff)))
    kernel = adjoint - cauchy
    np.fill_diagonal(kernel, 0.0)
    rhs = np.conj(tangent / (2j * np.pi * z))
    system = np.eye(curve.M) + kernel * weight[None, :]
    szego = linalg.solve(system, rhs)
    center = float(np.sum(np.abs(szego) ** 2 * weight))
    return szego, center, tangent


def exterior_map(curve: OpenedCurve, N: int | None = None) -> LaurentMap:
    """Exterior map of the opened curve with Laurent truncation N."""
    M = curve.M
    if N is None:
        N = M // 4
    szego, center, tangent = _szego_solve(curve)
    boundary = -1j * szego ** 2 * tangent / np.abs(szego) ** 2
    phase = np.unwrap(np.angle(boundary))
    rate = 2 * np.pi * np.abs(szego) ** 2 / center * np.abs(curve.derivative)
    if rate.min() <= 0 or np.abs(phase[-1] - phase[0] - 2 * np.pi * (M - 1) / M) > np.pi:
        raise ConformalMapError("boundary correspondence is not monotone")
    periodic = phase - curve.u
    phase_coeffs = np.fft.fft(periodic)[: M // 2] / M
    cap_coeff = 2 * np.pi * center
    lmap = LaurentMap(cap_coeff=cap_coeff, coeffs=np.zeros(N + 1, dtype=complex), curve=curve,
                      phase=phase, phase_rate=rate, phase_coeffs=phase_coeffs,
                      szego_center=center, residual=0.0)
    # g(exp(-i phi)) = 1/eta(u(phi)); sample on a uniform phi grid and transform
    angles, inv = lmap.disk_samples(1.0 / curve.points)
    L = len(angles)
    k = np.arange(-N, 2)
    lcoef = np.exp(1j * k * angles[0]) * np.fft.ifft(inv)[k % L]
    if abs(lcoef[-1] - cap_coeff) > 1e-8 * cap_coeff:
        logger.warning("Laurent and Szego capacities differ by %.3g", abs(lcoef[-1] - cap_coeff))
    lmap.coeffs = lcoef[-2::-1].copy()
    mirrored = curve.points[(-np.arange(M)) % M]
    lmap.residual = float(np.max(np.abs(lmap(np.exp(-1j * phase)) - mirrored)))
    return lmap


def conformal_data(spec: ArcSpec, M: int = 512, N: int | None = None):
    curve = open_arc(spec, M)
    return curve, exterior_map(curve, N)


def capacity_from_map(lmap: LaurentMap, spec: ArcSpec | None = None) -> float:
    """Logarithmic capacity g'(inf)/2, rescaled to the arc's native frame."""
    scale = abs(spec.frame_scale) if spec is not None else 1.0
    return scale * lmap.cap_coeff / 2


def psi_boundary(spec: ArcSpec, curve: OpenedCurve, lmap: LaurentMap):
    """Boundary values of psi = h o s from the two sides of the arc.

    Returns (t, psi_plus, psi_minus) on the nodes with u in [0, pi].
    """
    half = curve.M // 2
    idx = np.arange(half + 1)
    mirror = (-idx) % curve.M
    psi_plus = np.exp(-1j * lmap.phase[mirror])
    psi_minus = np.exp(-1j * lmap.phase[idx])
    # the mirrored node of u = 0 is itself; u = pi mirrors to -pi = pi - 2pi
    psi_plus[half] = np.exp(-1j * (lmap.phase[half] - 2 * np.pi))
    return curve.arc_param[idx], psi_plus, psi_minus


def douglas_energy(series: DouglasSeries) -> float:
    """Dirichlet energy (1/pi) int |grad U|^2 of the harmonic extension."""
    c = np.asarray(series.fourier)
    k = np.arange(len(c))
    return float(4 * np.sum(k[1:] * np.abs(c[1:]) ** 2))


def transported_series(lmap: LaurentMap, values: np.ndarray, N: int | None = None) -> DouglasSeries:
    """Fourier coefficients in the disk angle of a function sampled on the curve.

    ``values[j]`` is the value at eta(u_j); the coefficients are taken with
    respect to the angle of F(eta(u)), where F maps the inside of the
    curve to the unit disk.
    """
    angles, samples = lmap.disk_samples(values)
    L = len(angles)
    if N is None:
        N = L // 2 - 1
    k = np.arange(N + 1)
    return DouglasSeries(np.exp(-1j * k * angles[0]) * np.fft.fft(samples)[k] / L)


def loewner_energy(lmap: LaurentMap, N: int | None = None) -> float:
    """Loewner energy of the opened curve.

    With f the interior map of the disk onto D (f = j o g o j), on the
    boundary log|g'(w)| = log|f'(1/w)| - 2 log|f(1/w)| and |f| = |eta|, so
    both Dirichlet terms are energies of functions on the curve.
    """
    curve = lmap.curve
    log_fprime = -np.log(lmap.phase_rate / np.abs(curve.derivative))
    inner = douglas_energy(transported_series(lmap, log_fprime, N))
    outer = douglas_energy(transported_series(lmap, log_fprime - 2 * np.log(np.abs(curve.points)), N))
    return inner + outer - 8 * np.log(lmap.cap_coeff)


def h_prime_at_pm1(lmap: LaurentMap, tol: float = 1e-12, maxiter: int = 50):
    """(|h'(1)|, |h'(-1)|) from Newton on the Laurent series of g."""
    curve = lmap.curve
    half = curve.M // 2
    out = []
    for target, node in ((1.0, 0), (-1.0, half)):
        w = np.exp(-1j * lmap.phase[node])
        for _ in range(maxiter):
            step = (lmap(w) - target) / lmap.derivative(w)
            w = w - step
            if abs(step) < tol:
                break
        else:
            raise ConformalMapError(f"Newton failed to locate the preimage of {target}")
        out.append(1.0 / abs(complex(lmap.derivative(w))))
    return tuple(out)


def h_prime_from_correspondence(lmap: LaurentMap):
    """Same quantities read directly off the correspondence: |F'| at eta = +-1."""
    curve = lmap.curve
    half = curve.M // 2
    speed = np.abs(curve.derivative)
    return (float(lmap.phase_rate[0] / speed[0]), float(lmap.phase_rate[half] / speed[half]))
