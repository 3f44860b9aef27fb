"""Analytic Jordan arcs with endpoints -1 and 1.

Three families are supported: the interval [-1, 1], circular arcs through
the endpoints, and polynomially bent arcs t + i*A*(1 - t^2)*p(t).  Every
arc is evaluated exactly from its formula, including the divided difference
(gamma(x) - gamma(y)) / (x - y), which downstream code needs without
cancellation near the diagonal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

INTERVAL = "interval"
CIRCULAR = "circular"
PERTURBED = "perturbed"

ENDPOINT_FRAME = "endpoint"
UNIT_CIRCLE_FRAME = "unit_circle"


class ArcValidationError(ValueError):
    """Raised when an arc fails the injectivity or tangent checks."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ArcSample:
    t: float
    point: complex
    tangent: complex


@dataclass(frozen=True)
class ArcSpec:
    """Parametrized arc gamma: [-1, 1] -> C.

    The parametrization is always the endpoint-normalized one, with
    gamma(-1) = -1 and gamma(1) = 1.  For circular arcs in the unit-circle
    frame the arc C_alpha is the affine image ``frame_scale * gamma +
    frame_shift`` of the normalized arc; all potential-theoretic quantities
    are computed on the normalized arc and transported when needed.
    """

    family: str
    alpha: float = 0.0
    frame: str = ENDPOINT_FRAME
    coeffs: tuple = field(default=(1.0,))
    amplitude: float = 0.0

    # evaluation

    def point(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == INTERVAL:
            return t + 0j
        if self.family == CIRCULAR:
            center, radius, rate = self._circle()
            return center + radius * np.exp(1j * (np.pi / 2 - rate * t))
        bump = (1 - t * t) * np.polynomial.polynomial.polyval(t, self.coeffs)
        return t + 1j * self.amplitude * bump

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == INTERVAL:
            return np.ones_like(t) + 0j
        if self.family == CIRCULAR:
            center, radius, rate = self._circle()
            return -1j * rate * radius * np.exp(1j * (np.pi / 2 - rate * t))
        dbump = np.polynomial.polynomial.polyval(t, _bump_poly(self.coeffs, derivative=True))
        return 1 + 1j * self.amplitude * dbump

    def divided_difference(self, x, y):
        """(gamma(x) - gamma(y)) / (x - y), equal to gamma'(x) on the diagonal."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self.family == INTERVAL:
            return np.ones(x.shape, dtype=complex)
        if self.family == CIRCULAR:
            center, radius, rate = self._circle()
            half = 0.5 * rate * (x - y)
            mid = np.pi / 2 - 0.5 * rate * (x + y)
            return -1j * rate * radius * np.exp(1j * mid) * np.sinc(half / np.pi)
        # complete homogeneous sums h_m(x, y) = sum_j x^j y^(m-j)
        bump = _bump_poly(self.coeffs)
        acc = np.zeros(x.shape)
        h = np.ones(x.shape)
        ypow = np.ones(x.shape)
        for m in range(1, len(bump)):
            acc = acc + bump[m] * h
            ypow = ypow * y
            h = x * h + ypow
        return 1 + 1j * self.amplitude * acc

    def sample(self, t) -> ArcSample:
        return ArcSample(float(t), complex(self.point(t)), complex(self.tangent(t)))

    # frames

    @property
    def frame_scale(self) -> complex:
        if self.family == CIRCULAR and self.frame == UNIT_CIRCLE_FRAME:
            return 1j * np.sin(self.alpha)
        return 1.0 + 0j

    @property
    def frame_shift(self) -> complex:
        if self.family == CIRCULAR and self.frame == UNIT_CIRCLE_FRAME:
            return complex(np.cos(self.alpha))
        return 0j

    def frame_point(self, t):
        """Points of the arc in its native frame (C_alpha for the unit-circle frame)."""
        return self.frame_scale * self.point(t) + self.frame_shift

    def endpoints(self):
        ends = self.frame_point(np.array([-1.0, 1.0]))
        return complex(ends[0]), complex(ends[1])

    # circular-arc data

    @property
    def center(self) -> complex:
        return self._circle()[0]

    @property
    def radius(self) -> float:
        return self._circle()[1]

    def _circle(self):
        alpha = self.alpha
        return 1j / np.tan(alpha), 1.0 / np.sin(alpha), np.pi - alpha

    # serialization

    def to_dict(self) -> dict:
        if self.family == INTERVAL:
            return {"family": INTERVAL}
        if self.family == CIRCULAR:
            return {"family": CIRCULAR, "alpha": self.alpha, "frame": self.frame}
        return {"family": PERTURBED, "coeffs": list(self.coeffs), "amplitude": self.amplitude}

    def content_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _bump_poly(coeffs, derivative=False):
    """Ascending coefficients of (1 - t^2) p(t), or of its derivative."""
    P = np.polynomial.polynomial
    bump = P.polymul([1.0, 0.0, -1.0], np.asarray(coeffs, dtype=float))
    return P.polyder(bump) if derivative else bump


def make_interval() -> ArcSpec:
    return ArcSpec(INTERVAL)


def make_circular_arc(alpha: float, frame: str = ENDPOINT_FRAME) -> ArcSpec:
    """Circular arc with center i*cot(alpha) and radius 1/sin(alpha).

    The arc passes through +-1 and i*cot(alpha/2), so it bulges into the
    upper half-plane; at alpha = pi/2 it is the upper unit half-circle.
    """
    if not 0 < alpha < np.pi:
        raise ValueError(f"alpha must lie in (0, pi), got {alpha}")
    if frame not in (ENDPOINT_FRAME, UNIT_CIRCLE_FRAME):
        raise ValueError(f"unknown frame {frame!r}")
    return ArcSpec(CIRCULAR, alpha=float(alpha), frame=frame)


def make_perturbed_arc(coeffs, amplitude: float, grid_size: int = 512) -> ArcSpec:
    coeffs = tuple(float(c) for c in np.atleast_1d(coeffs))
    if not coeffs:
        raise ValueError("coeffs must be non-empty")
    spec = ArcSpec(PERTURBED, coeffs=coeffs, amplitude=float(amplitude))
    diag = validate(spec, grid_size)
    if not diag["ok"]:
        raise ArcValidationError("arc failed validation", diag)
    return spec


def validate(spec: ArcSpec, grid_size: int = 256) -> dict:
    """Grid report: pairwise separation, tangent size and endpoint residuals."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    t = np.cos(np.linspace(np.pi, 0, grid_size))
    z = spec.point(t)
    speed = np.abs(spec.tangent(t))
    dist = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(dist, np.inf)
    # the divided difference vanishes somewhere iff the arc self-intersects
    dd = np.abs(spec.divided_difference(t[:, None], t[None, :]))
    ends = spec.point(np.array([-1.0, 1.0]))
    endpoint_residual = float(max(abs(ends[0] + 1), abs(ends[1] - 1)))
    min_dist = float(dist.min())
    min_dd = float(dd.min())
    return {
        "grid_size": grid_size,
        "min_pairwise_distance": min_dist,
        "min_divided_difference": min_dd,
        "min_speed": float(speed.min()),
        "endpoint_residual": endpoint_residual,
        "ok": bool(min_dist > 0 and min_dd > 1e-12 and speed.min() > 0
                   and endpoint_residual < 1e-14),
    }


def arc_from_dict(data: dict) -> ArcSpec:
    family = data.get("family")
    if family == INTERVAL:
        return make_interval()
    if family == CIRCULAR:
        frame = data.get("frame", ENDPOINT_FRAME)
        if frame in ("unit", "unit_circle", "unitcircle"):
            frame = UNIT_CIRCLE_FRAME
        return make_circular_arc(float(data["alpha"]), frame)
    if family == PERTURBED:
        return make_perturbed_arc(data.get("coeffs", [1.0]), float(data["amplitude"]))
    raise ValueError(f"unknown arc family {family!r}")


def load_arc(path) -> ArcSpec:
    with open(path) as fh:
        return arc_from_dict(json.load(fh))
