"""Arc energies and the asymptotic predictions built from them.

Every quantity that can be computed two ways is computed two ways: J^A from
the Loewner energy of the opened curve and from det(I + B); J^F from
Chebyshev vectors and from a Dirichlet energy transported to the circle.

Terms involving the vector f (2/sqrt(k) on even k, not square summable)
are always rewritten with B f = m before truncation, e.g.

    f^t (I + sB)^{-1} v = f.v - s m^t (I + sB)^{-1} v.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from . import conformal
from .arcs import ArcSpec
from .equilibrium import (ChebSeries, EquilibriumData, d_vector, equilibrium_data,
                          f_vector, m_vector, z_e_prime_endpoints)
from .grunsky import (GrunskyMatrix, fredholm_logdet, grunsky_coeffs, min_eigenvalue,
                      quad_form)

logger = logging.getLogger(__name__)

# Variants of the mean-correction functional M[u]; see mean_functional.
MEAN_VARIANTS = {
    "chebyshev": (+1, -2.0),
    "mean_once": (+1, -1.0),
    "mean_added": (+1, +1.0),
    "negated": (-1, -2.0),
}
SELECTED_MEAN_VARIANT = "chebyshev"


@dataclass
class ArcAnalysis:
    """Everything the predictions need for one arc at fixed truncation."""

    spec: ArcSpec
    eq: EquilibriumData
    B: GrunskyMatrix
    d0: float
    d: np.ndarray
    m: ChebSeries
    N: int

    @property
    def lmap(self):
        return self.eq.lmap

    @property
    def f(self) -> np.ndarray:
        return f_vector(self.N)

    @property
    def m_scaled(self) -> np.ndarray:
        return self.m.scaled()


def analyze_arc(spec: ArcSpec, N: int = 64, M: int = 512, quad_M: int | None = None,
                drift_tol: float = 1e-8, max_N: int = 512) -> ArcAnalysis:
    """Run the pipeline; N doubles until the logdet truncation drift is below drift_tol."""
    while True:
        eq = equilibrium_data(spec, M=max(M, 4 * N), conformal_M=M)
        B = grunsky_coeffs(eq, N, quad_M or max(4 * N, eq.M))
        drift = fredholm_logdet(B)[1]
        if drift <= drift_tol or 2 * N > max_N:
            break
        logger.info("logdet drift %.2e at N=%d; doubling", drift, N)
        N *= 2
    if drift > drift_tol:
        logger.warning("logdet drift %.2e at N=%d exceeds %.1e", drift, N, drift_tol)
    d0, d = d_vector(eq, N)
    return ArcAnalysis(spec=spec, eq=eq, B=B, d0=d0, d=d, m=m_vector(eq, N), N=N)


@dataclass
class EnergyReport:
    cap: float
    cap_frostman: float
    IL: float
    hp1: float
    hm1: float
    JA_geometric: float
    JA_spectral: float
    JF_cheb: float
    JF_dirichlet: float
    kappa: float
    lambda_max: float
    logdet: float
    logdet_tail: float
    bf_residual: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def jA_geometric(lmap) -> float:
    IL = conformal.loewner_energy(lmap)
    hp, hm = conformal.h_prime_at_pm1(lmap)
    return 0.5 * IL - 3 * np.log(hp * hm)


def jA_spectral(B: GrunskyMatrix) -> float:
    return -12 * fredholm_logdet(B)[0]


def _resolvent_terms(an: ArcAnalysis, v, s: float = 1.0):
    """(f.v - s m^t (I+sB)^{-1} v) i.e. f^t (I + sB)^{-1} v."""
    v = np.asarray(v, dtype=float)
    return float(an.f @ v - s * quad_form(an.B, an.m_scaled, v, s))


def jF_cheb(an: ArcAnalysis) -> float:
    d, m = an.d, an.m_scaled
    dd = quad_form(an.B, d, d)
    fd = _resolvent_terms(an, d)
    # f^t (I+B)^{-1} B f = f^t (I+B)^{-1} m
    fm = _resolvent_terms(an, m)
    return dd + 2 * fd - fm


def _theta_on_curve(eq: EquilibriumData):
    """Arc-side data at every opened-curve node: folded u, theta(u), |z_e'|."""
    curve = eq.curve
    u = np.where(curve.u <= np.pi, curve.u, 2 * np.pi - curve.u)
    theta = eq.theta_of_u(u)
    zp1, zm1 = z_e_prime_endpoints(eq)
    interior = (u > 0) & (u < np.pi)
    zprime = np.empty(len(u))
    zprime[interior] = np.abs(eq.z_e_prime_theta(theta[interior], u[interior]))
    zprime[u == 0] = zp1
    zprime[u == np.pi] = zm1
    return u, theta, zprime


def m_on_curve(eq: EquilibriumData, u, theta):
    """m at gamma(cos u) including the endpoint limits."""
    cu = np.cos(u)
    rate = eq.theta_of_u(u, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_lo = np.where(u > 0, np.sin(u / 2) / np.sin(theta / 2), 1 / rate)
        r_hi = np.where(u < np.pi, np.cos(u / 2) / np.cos(theta / 2), 1 / rate)
    lo = np.abs(eq.spec.divided_difference(cu, 1.0)) * r_lo ** 2
    hi = np.abs(eq.spec.divided_difference(cu, -1.0)) * r_hi ** 2
    return -0.5 * (np.log(lo) + np.log(hi))


def dirichlet_energy_on_arc(eq: EquilibriumData, func_of_theta) -> float:
    """Dirichlet energy in C minus the arc of the function with the given
    values on both sides of the arc, written as a function of the
    Chebyshev angle theta (the value at z_e(cos theta)).

    The values are transported to the unit circle through the boundary
    correspondence and evaluated by the Douglas sum.
    """
    u, theta, _ = _theta_on_curve(eq)
    values = func_of_theta(theta)
    return conformal.douglas_energy(conformal.transported_series(eq.lmap, values))


def dirichlet_inner_on_arc(eq: EquilibriumData, f1, f2) -> float:
    plus = dirichlet_energy_on_arc(eq, lambda t: f1(t) + f2(t))
    minus = dirichlet_energy_on_arc(eq, lambda t: f1(t) - f2(t))
    return 0.25 * (plus - minus)


def jF_dirichlet(an: ArcAnalysis) -> float:
    eq = an.eq
    u, theta, zprime = _theta_on_curve(eq)
    values = -np.log(zprime) - m_on_curve(eq, u, theta)
    energy = conformal.douglas_energy(conformal.transported_series(eq.lmap, values))
    hp, hm = conformal.h_prime_at_pm1(eq.lmap)
    return energy + 3 * np.log(hp * hm) - 2 * (an.d0 + np.log(2 * eq.cap))


def energy_report(an: ArcAnalysis) -> EnergyReport:
    from .equilibrium import frostman_potential
    from .grunsky import bf_consistency

    lmap = an.lmap
    IL = conformal.loewner_energy(lmap)
    hp, hm = conformal.h_prime_at_pm1(lmap)
    logdet, tail = fredholm_logdet(an.B)
    lmin, kappa = min_eigenvalue(an.B)
    lam_max = float(np.linalg.eigvalsh(an.B.b)[-1])
    cap_frostman = float(np.exp(frostman_potential(an.eq, [0.0])[0]))
    scale = abs(an.spec.frame_scale)
    return EnergyReport(
        cap=scale * conformal.capacity_from_map(lmap),
        cap_frostman=scale * cap_frostman,
        IL=float(IL), hp1=float(hp), hm1=float(hm),
        JA_geometric=float(0.5 * IL - 3 * np.log(hp * hm)),
        JA_spectral=float(-12 * logdet),
        JF_cheb=float(jF_cheb(an)),
        JF_dirichlet=float(jF_dirichlet(an)),
        kappa=float(kappa), lambda_max=lam_max,
        logdet=float(logdet), logdet_tail=float(tail),
        bf_residual=bf_consistency(an.B, an.f, an.m_scaled),
        diagnostics={"N": an.N, "M": an.eq.curve.M, "quad_M": an.B.quad_M,
                     "map_residual": lmap.residual,
                     "decay_fit": [v if np.isfinite(v) else None for v in an.B.decay_fit]},
    )


# predictions


def beta_bracket(beta: float) -> float:
    """(sqrt(beta/2) - sqrt(2/beta))^2, invariant under beta -> 4/beta."""
    return (np.sqrt(beta / 2) - np.sqrt(2 / beta)) ** 2


def free_energy_prediction(JA: float, JF: float, beta: float) -> float:
    return JA / 24 + beta_bracket(beta) * JF / 8


def leading_coefficients(beta: float):
    """Coefficients of n^2 and n multiplying log(2 cap)."""
    return beta / 2, 1 - beta / 2


def endpoint_sum(u: ChebSeries) -> float:
    """u(1) + u(-1) from the Chebyshev coefficients."""
    k = np.arange(1, u.N + 1)
    return float(2 * u.c0 + np.sum(u.coeffs * (1 + (-1.0) ** k)))


def mean_functional(an: ArcAnalysis, u: ChebSeries, variant: str = SELECTED_MEAN_VARIANT) -> float:
    """sign * [D(d - m, u) + u(1) + u(-1) + c * mean(u)] on the Chebyshev side.

    D(d - m, u) = (d - m)^t (I+B)^{-1} u.  The variant fixes (sign, c):
    ``chebyshev`` is (d + f)^t (I+B)^{-1} u, i.e. c = -2.
    """
    sign, c0_coef = MEAN_VARIANTS[variant]
    g = u.scaled(an.N)
    dirichlet = quad_form(an.B, an.d - an.m_scaled, g)
    return sign * (dirichlet + endpoint_sum(u) + c0_coef * u.c0)


def clt_params(an: ArcAnalysis, u: ChebSeries, beta: float, variant: str = SELECTED_MEAN_VARIANT):
    """(variance, mean shift) of sum u(z_j) - n int u d(nu_e) in the limit."""
    g = u.scaled(an.N)
    variance = quad_form(an.B, g, g) / (2 * beta)
    shift = 0.25 * (1 - 2 / beta) * mean_functional(an, u, variant)
    return variance, shift


def A_s(an: ArcAnalysis, u: ChebSeries, beta: float, s: float = 1.0) -> float:
    """(1/(4 beta)) g^t (I+sB)^{-1} g + (1/4)(1 - 2/beta)(s d + f)^t (I+sB)^{-1} g."""
    g = u.scaled(an.N)
    quad = quad_form(an.B, g, g, s)
    linear = s * quad_form(an.B, an.d, g, s) + _resolvent_terms(an, g, s)
    return quad / (4 * beta) + 0.25 * (1 - 2 / beta) * linear


def laplace_exponent(an: ArcAnalysis, u: ChebSeries | None, beta: float, n: int = 0) -> dict:
    """Terms of the full Laplace asymptotics relative to the interval.

    Returns the separate terms and their sum; the sum approximates
    log Zbar_n(gamma)[e^u] - log Zbar_n(I).
    """
    N = an.N
    if u is None:
        u = ChebSeries(0.0, np.zeros(N))
    g = u.scaled(N)
    c = beta / 2 - 1
    g_beta = g + c * an.d
    terms = {
        "logdet": -0.5 * fredholm_logdet(an.B)[0],
        "linear": n * u.c0,
        "quadratic": quad_form(an.B, g_beta, g_beta) / (4 * beta),
        "f_cross": c / (2 * beta) * _resolvent_terms(an, g_beta),
        "f_self": -(c ** 2) / (4 * beta) * _resolvent_terms(an, an.m_scaled),
    }
    terms["total"] = sum(terms.values())
    return terms


def log_ratio_prediction(an: ArcAnalysis, beta: float, n: int, JA=None, JF=None) -> float:
    """Predicted log Z_n(gamma) - log Z_n(I) including the capacity terms."""
    JA = jA_spectral(an.B) if JA is None else JA
    JF = jF_cheb(an) if JF is None else JF
    a2, a1 = leading_coefficients(beta)
    cap = an.eq.cap * abs(an.spec.frame_scale)
    return (a2 * n * n + a1 * n) * np.log(2 * cap) + free_energy_prediction(JA, JF, beta)


@dataclass
class PredictionReport:
    beta: float
    leading_n2: float
    leading_n: float
    log_2cap: float
    constant: float
    JA: float
    JF: float
    clt_variance: float | None = None
    clt_mean_shift: float | None = None
    mean_variant: str = SELECTED_MEAN_VARIANT
    laplace_terms: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def prediction_report(an: ArcAnalysis, beta: float, u: ChebSeries | None = None) -> PredictionReport:
    JA = jA_spectral(an.B)
    JF = jF_cheb(an)
    a2, a1 = leading_coefficients(beta)
    cap = an.eq.cap * abs(an.spec.frame_scale)
    rep = PredictionReport(beta=beta, leading_n2=a2, leading_n=a1,
                           log_2cap=float(np.log(2 * cap)),
                           constant=float(free_energy_prediction(JA, JF, beta)),
                           JA=float(JA), JF=float(JF))
    if u is not None:
        var, shift = clt_params(an, u, beta)
        rep.clt_variance, rep.clt_mean_shift = float(var), float(shift)
        rep.laplace_terms = {k: float(v) for k, v in laplace_exponent(an, u, beta).items()}
    return rep
