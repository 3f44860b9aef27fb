"""The log-gas on an arc: exact beta = 2 partition functions and a sampler.

The sampler works with angles theta in [0, pi]^n, x = cos(theta), and points
z_e(x) on the arc.  The s-interpolated log-density is

    beta * sum_{i<j} log|x_i - x_j| + (beta/2) * s * [n^2 log(2 cap) - 2 X^t A X]
    + sum_i [(1 - beta/2) * s * l(theta_i) + log sin theta_i]

where X_k = sum_i cos(k theta_i), A holds the Grunsky coefficients a_kl and
l(theta) = log|z_e'(cos theta)| = l0 - sum_k d_k cos(k theta).  At s = 0 this
is the interval gas and at s = 1 the gas on the arc, so the s-derivative of
its log-normalizer integrates to log Z_n(arc) - log Z_n([-1, 1]).
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy import special

from . import kernels
from .arcs import ArcSpec
from .energies import ArcAnalysis, clt_params
from .equilibrium import ChebSeries, cheb_transform
from .selberg import ordered_rule

logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = 0.35
ACCEPTANCE_BAND = (0.2, 0.5)
N_BATCHES = 32
CACHE_TOL = 1e-9


class PrecisionError(ArithmeticError):
    pass


class NumericError(ArithmeticError):
    pass


class AdaptationWarning(UserWarning):
    pass


class StatisticsWarning(UserWarning):
    pass


# exact partition functions


def _gram_norms(z, w, n, dot, sqrt=math.sqrt, log=math.log):
    """log h_j for the monic orthogonal polynomials, j < n.

    Arnoldi on multiplication by z with two passes of modified Gram-Schmidt.
    Returns (log h, worst overlap of a new vector with the earlier ones).
    """
    one = z * 0 + 1
    h0 = dot(one, one, w).real
    q = [one / sqrt(h0)]
    logh = [log(h0)]
    defect = 0.0
    for j in range(1, n):
        v = z * q[-1]
        for _ in range(2):
            for qi in q:
                v = v - dot(v, qi, w) * qi
        norm = sqrt(dot(v, v, w).real)
        v = v / norm
        defect = max(defect, max(float(abs(dot(v, qi, w))) for qi in q))
        q.append(v)
        logh.append(logh[-1] + 2 * log(norm))
    return [float(x) for x in logh], defect


def _dot(u, v, w):
    return np.sum(w * u * np.conj(v))


def _mp_dot(u, v, w):
    return mpmath.fsum(wi * ui * mpmath.conj(vi) for ui, vi, wi in zip(u, v, w))


def logZ_beta2_gram(spec: ArcSpec, n: int, quad_M: int | None = None) -> float:
    """log Z_n(arc) at beta = 2 as a Gram determinant of monomials.

    Andreief's identity turns Z_n into det(int z^j conj(z)^k |dz|), which is the
    product of the squared norms of the monic orthogonal polynomials.  The
    arc is taken in the frame with endpoints -1 and 1.
    """
    quad_M = quad_M or max(8 * n, 64)
    if quad_M < 8 * n:
        raise ValueError("quad_M must be at least 8n")
    t, wt = special.roots_legendre(quad_M)
    z = spec.point(t)
    w = wt * np.abs(spec.tangent(t))
    logh, defect = _gram_norms(z, w, n, _dot)
    if defect > 1e-8:
        logger.warning("orthogonality defect %.2e; retrying in extended precision", defect)
        with mpmath.workdps(40):
            zm = np.array([mpmath.mpc(c) for c in z], dtype=object)
            wm = np.array([mpmath.mpf(x) for x in w], dtype=object)
            logh, defect = _gram_norms(zm, wm, n, _mp_dot, mpmath.sqrt, mpmath.log)
        if defect > 1e-8:
            raise PrecisionError(f"orthogonality defect {defect:.2e} in extended precision")
    return float(sum(logh[:n]))


def arclength(spec: ArcSpec, order: int = 128) -> float:
    t, w = special.roots_legendre(order)
    return float(np.sum(w * np.abs(spec.tangent(t))))


def brute_logZ_arc(spec: ArcSpec, n: int, beta: float, order: int = 48) -> float:
    """log Z_n(arc) by tensor quadrature in the arc parameter, n <= 3."""
    if n == 1:
        return math.log(arclength(spec))
    pts, w = ordered_rule(n, beta, order)
    smooth = np.prod(np.abs(spec.tangent(pts)), axis=1)
    for i in range(n):
        for j in range(i + 1, n):
            smooth = smooth * np.abs(spec.divided_difference(pts[:, i], pts[:, j])) ** beta
    return float(np.log(np.sum(w * smooth)))


# the sampled model


@dataclass
class GasModel:
    """Coefficients of the truncated log-density, K = len(dvec)."""

    A: np.ndarray
    dvec: np.ndarray
    l0: float
    log_2cap: float
    K_int: int

    @property
    def K(self) -> int:
        return len(self.dvec)

    def padded(self, K: int) -> "GasModel":
        """Same interaction with cosine sums tracked up to max(K, self.K)."""
        if K <= self.K:
            return self
        A = np.zeros((K, K))
        A[: self.K, : self.K] = self.A
        d = np.zeros(K)
        d[: self.K] = self.dvec
        return GasModel(A, d, self.l0, self.log_2cap, self.K_int)


def gas_model(an: ArcAnalysis | None, K: int = 16) -> GasModel:
    """Truncate the Grunsky coefficients and d-series at K; None means the interval."""
    if an is None:
        return GasModel(np.zeros((K, K)), np.zeros(K), 0.0, 0.0, K)
    if K > an.N:
        raise ValueError("K exceeds the Grunsky truncation")
    k = np.arange(1, K + 1)
    A = np.ascontiguousarray(an.B.a[:K, :K])
    d = an.d[:K] / np.sqrt(k)
    return GasModel(A, np.ascontiguousarray(d), -an.d0 / 2, float(np.log(2 * an.B.cap)), K)


@dataclass
class GasParams:
    n: int
    beta: float = 2.0
    s: float = 1.0
    seed: int = 0
    sweeps: int = 20000
    burn_in: int = 2000
    step: float = 0.1
    checkpoint: int = 1000

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 <= self.s <= 1:
            raise ValueError("s must lie in [0, 1]")
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass
class GasState:
    theta: np.ndarray
    ctheta: np.ndarray
    X: np.ndarray
    Y: np.ndarray

    @classmethod
    def initial(cls, n: int, model: GasModel):
        theta = np.pi * (np.arange(n) + 0.5) / n
        X = kernels.cos_sums(theta, model.K)
        return cls(theta, np.cos(theta), X, model.A @ X)

    def ordered(self) -> np.ndarray:
        return np.sort(self.theta)

    def refresh(self, model: GasModel) -> float:
        """Recompute the cached sums; returns the deviation that was found."""
        X = kernels.cos_sums(self.theta, model.K)
        dev = float(np.max(np.abs(X - self.X), initial=0.0))
        self.X[:] = X
        self.Y[:] = model.A @ X
        self.ctheta[:] = np.cos(self.theta)
        return dev


def log_density(model: GasModel, theta, beta: float, s: float) -> float:
    """Unnormalized log-density, up to the s-dependent constant terms."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    i, j = np.triu_indices(len(theta), 1)
    X = kernels.cos_sums(theta, model.K)
    return float(beta * np.sum(np.log(np.abs(c[i] - c[j])))
                 - beta * s * X @ model.A @ X
                 - (1 - beta / 2) * s * model.dvec @ X
                 + np.sum(np.log(np.sin(theta))))


def proposal_density(x: float, y: float, step: float) -> float:
    """Density of the reflected uniform proposal from x to y (step <= pi)."""
    images = (y - x, -y - x, 2 * np.pi - y - x)
    return sum(abs(v) < step for v in images) / (2 * step)


def move_delta(model: GasModel, theta, mu: int, new: float, beta: float, s: float) -> float:
    theta = np.ascontiguousarray(theta, dtype=float)
    X = kernels.cos_sums(theta, model.K)
    return float(kernels.delta_energy(theta, np.cos(theta), model.A @ X, model.A, model.dvec,
                                      beta, s, mu, new))


# chain summaries


def batch_means(series, n_batches: int = N_BATCHES):
    """(mean, standard error, effective sample size) of a 1-D series."""
    x = np.asarray(series, dtype=float)
    size = len(x) // n_batches
    if size < 1:
        raise ValueError("series shorter than the batch count")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    se = float(means.std(ddof=1) / math.sqrt(n_batches))
    var = float(x.var(ddof=1))
    ess = float(len(x) if se == 0 else min(len(x), var / se ** 2))
    return float(x.mean()), se, ess


@dataclass
class Estimate:
    mean: float
    se: float
    variance: float
    ess: float


@dataclass
class ChainSummary:
    params: dict
    acceptance: float
    step: float
    n_batches: int
    stats: dict = field(default_factory=dict)
    cache_deviation: float = 0.0
    backend: str = kernels.BACKEND
    series: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("series")
        return out

    def series_csv(self) -> str:
        buf = io.StringIO()
        names = list(self.series)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sweep"] + names)
        for i, row in enumerate(zip(*(self.series[k] for k in names))):
            writer.writerow([i] + [repr(float(v)) for v in row])
        return buf.getvalue()


def chain_rng(seed: int, chain: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, chain])))


def _draws(rng, n):
    r = rng.random(2 * n)
    return r[:n], 1.0 - r[n:]


def mcmc_run(params: GasParams, model: GasModel, requests: dict | None = None,
             chain: int = 0, keep_series: bool = False, sweeper=None) -> ChainSummary:
    """Run one seeded chain and summarize the requested statistics.

    ``requests`` maps a name to a function of (X series of shape
    (sweeps, K), model) returning one value per recorded sweep.  The cosine
    sums X_1..X_K are always summarized.
    """
    requests = requests or {}
    n, beta, s = params.n, params.beta, params.s
    rng = chain_rng(params.seed, chain)
    state = GasState.initial(n, model)
    sweep = sweeper or _compiled_sweep
    step = min(params.step, np.pi)
    log_step = math.log(step)

    for t in range(params.burn_in):
        prop, unif = _draws(rng, n)
        acc = sweep(state, model, beta, s, step, prop, unif) / n
        log_step += (acc - TARGET_ACCEPTANCE) / (1 + t) ** 0.6
        log_step = min(log_step, math.log(np.pi))
        step = math.exp(log_step)
    state.refresh(model)

    record = np.empty((params.sweeps, model.K))
    accepted = 0
    worst = 0.0
    for t in range(params.sweeps):
        prop, unif = _draws(rng, n)
        accepted += sweep(state, model, beta, s, step, prop, unif)
        record[t] = state.X
        if (t + 1) % params.checkpoint == 0:
            if not np.all(np.isfinite(state.X)):
                raise NumericError("non-finite cosine sums")
            dev = state.refresh(model)
            worst = max(worst, dev)
            if dev > CACHE_TOL:
                raise NumericError(f"cached cosine sums drifted by {dev:.2e}")

    acceptance = accepted / (n * params.sweeps)
    if not ACCEPTANCE_BAND[0] <= acceptance <= ACCEPTANCE_BAND[1]:
        warnings.warn(f"acceptance {acceptance:.3f} outside {ACCEPTANCE_BAND}", AdaptationWarning)

    summary = ChainSummary(params=asdict(params) | {"chain": chain}, acceptance=acceptance,
                           step=step, n_batches=N_BATCHES, cache_deviation=worst)
    series = {f"X{k + 1}": record[:, k] for k in range(model.K)}
    for name, fn in requests.items():
        series[name] = np.asarray(fn(record, model), dtype=float)
    for name, values in series.items():
        mean, se, ess = batch_means(values)
        if not math.isfinite(se):
            raise NumericError(f"non-finite standard error for {name}")
        summary.stats[name] = asdict(Estimate(mean, se, float(np.var(values, ddof=1)), ess))
    if keep_series:
        summary.series = series
    return summary


def _compiled_sweep(state, model, beta, s, step, prop, unif):
    return kernels.sweep(state.theta, state.ctheta, state.X, state.Y, model.A, model.dvec,
                         beta, s, step, prop, unif)


# pairwise-exact validation mode


class ExactSweeper:
    """Sweep with the untruncated pairwise density; slow, meant for n <= 32.

    Log-density: beta * sum_{i<j} [(1-s) log|x_i - x_j| + s log|z_i - z_j|]
    + sum_i [s * l(theta_i) + log sin theta_i], with exact z_e and l.
    The cosine sums are still tracked so statistics are comparable.
    """

    def __init__(self, eq, tol: float = 1e-17):
        # full-resolution Chebyshev series of Re z_e, Im z_e and log|z_e'|
        series = [cheb_transform(v) for v in (np.real(eq.z), np.imag(eq.z), np.log(np.abs(eq.dz)))]
        C = np.array([s.coeffs for s in series])
        big = np.nonzero(np.max(np.abs(C), axis=0) > tol)[0]
        keep = big[-1] + 1 if len(big) else 1
        self.c0 = np.array([s.c0 for s in series])
        self.C = C[:, :keep]
        self.k = np.arange(1, keep + 1)
        self._z = None

    def _point(self, theta):
        theta = np.atleast_1d(theta)
        vals = self.c0[:, None] + self.C @ np.cos(np.outer(self.k, theta))
        return vals[0] + 1j * vals[1], vals[2]

    def log_density(self, theta, beta, s):
        theta = np.asarray(theta, dtype=float)
        z, ell = self._point(theta)
        x = np.cos(theta)
        i, j = np.triu_indices(len(theta), 1)
        return float(beta * np.sum((1 - s) * np.log(np.abs(x[i] - x[j])) + s * np.log(np.abs(z[i] - z[j])))
                     + np.sum(s * ell + np.log(np.sin(theta))))

    def __call__(self, state, model, beta, s, step, prop, unif):
        if self._z is None or len(self._z[0]) != len(state.theta):
            self._z = self._point(state.theta)
        z, ell = self._z
        n = len(state.theta)
        k = np.arange(1, model.K + 1)
        accepted = 0
        for mu in range(n):
            new = kernels_reflect(state.theta[mu] + step * (2 * prop[mu] - 1))
            if new <= 0 or new >= np.pi:
                continue
            zn, ln = self._point(new)
            xo, xn = state.ctheta[mu], math.cos(new)
            others = np.arange(n) != mu
            xs, zs = state.ctheta[others], z[others]
            delta = beta * float(np.sum((1 - s) * np.log(np.abs((xn - xs) / (xo - xs)))
                                        + s * np.log(np.abs((zn[0] - zs) / (z[mu] - zs)))))
            delta += s * (ln[0] - ell[mu]) + math.log(math.sin(new) / math.sin(state.theta[mu]))
            if math.log(unif[mu]) < delta:
                dk = np.cos(k * new) - np.cos(k * state.theta[mu])
                state.theta[mu] = new
                state.ctheta[mu] = xn
                state.X += dk
                state.Y += model.A @ dk
                z[mu], ell[mu] = zn[0], ln[0]
                accepted += 1
        return accepted


def kernels_reflect(x: float) -> float:
    if x < 0:
        return -x
    if x > np.pi:
        return 2 * np.pi - x
    return x


# linear statistics


def pullback_series(an: ArcAnalysis, func, N: int | None = None) -> ChebSeries:
    """Chebyshev series of func(z_e(x)) for a function on the arc."""
    return cheb_transform(np.real(func(an.eq.z)), N or an.N)


def linear_statistic(u: ChebSeries):
    """Request computing sum_i u(x_i) - n * c0 from the cosine sums."""
    def stat(X, model):
        K = min(u.N, X.shape[1])
        return X[:, :K] @ u.coeffs[:K]
    return stat


def run_chains(params: GasParams, model: GasModel, requests: dict, chains: int,
               workers: int = 1, sweeper=None):
    """Independent chains; results ordered by chain index."""
    def one(c):
        return mcmc_run(params, model, requests, chain=c, sweeper=sweeper)
    if workers > 1 and sweeper is None:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(chains)))
    return [one(c) for c in range(chains)]


def linear_statistic_clt(params: GasParams, model: GasModel, u: ChebSeries, chains: int = 16,
                         an: ArcAnalysis | None = None, workers: int = 1) -> dict:
    """Mean and variance of sum u(z_i) - n int u d(nu_e) across seeded chains.

    The estimates come with standard errors from the spread over chains and,
    when an analysis is given, with the limiting predictions.
    """
    model = model.padded(u.N)
    runs = run_chains(params, model, {"linear": linear_statistic(u)}, chains, workers)
    means = np.array([r.stats["linear"]["mean"] for r in runs])
    variances = np.array([r.stats["linear"]["variance"] for r in runs])
    ess = sum(r.stats["linear"]["ess"] for r in runs)
    if ess < 100:
        warnings.warn(f"only {ess:.0f} effective samples", StatisticsWarning)
    within = math.sqrt(sum(r.stats["linear"]["se"] ** 2 for r in runs)) / chains
    out = {
        "mean_shift": float(means.mean()),
        "mean_shift_se": float(max(means.std(ddof=1) / math.sqrt(chains), within)),
        "variance": float(variances.mean()),
        "variance_se": float(variances.std(ddof=1) / math.sqrt(chains)),
        "acceptance": float(np.mean([r.acceptance for r in runs])),
        "effective_samples": float(ess),
        "chains": chains,
    }
    if an is not None:
        var, shift = clt_params(an, u, params.beta)
        out["predicted_variance"], out["predicted_mean_shift"] = float(var), float(shift)
    return out


# thermodynamic integration


def b_prime_request(n: int, beta: float):
    """Per-sweep d/ds of the log-weight, including the s-linear constants."""
    def stat(X, model):
        const = (beta / 2) * n * n * model.log_2cap + (1 - beta / 2) * n * model.l0
        K = model.K_int
        Xi = X[:, :K]
        quad = np.einsum("ti,ij,tj->t", Xi, model.A[:K, :K], Xi)
        return const - beta * quad - (1 - beta / 2) * Xi @ model.dvec[:K]
    return stat


def thermo_log_ratio(model: GasModel, n: int, beta: float, nodes: int = 8, sweeps: int = 20000,
                     burn_in: int = 2000, seed: int = 0) -> dict:
    """log Z_n(arc) - log Z_n([-1, 1]) by Gauss-Legendre integration over s.

    One chain per node; the error propagates the node standard errors as
    independent, sqrt(sum (w_i se_i)^2).
    """
    x, w = special.roots_legendre(nodes)
    s_nodes = (x + 1) / 2
    w = w / 2
    rows = []
    for i, s in enumerate(s_nodes):
        if not np.any(model.A) and not np.any(model.dvec) and model.log_2cap == 0 and model.l0 == 0:
            rows.append({"s": float(s), "weight": float(w[i]), "b_prime": 0.0, "se": 0.0})
            continue
        params = GasParams(n=n, beta=beta, s=float(s), seed=seed, sweeps=sweeps, burn_in=burn_in)
        summ = mcmc_run(params, model, {"b_prime": b_prime_request(n, beta)}, chain=i)
        est = summ.stats["b_prime"]
        rows.append({"s": float(s), "weight": float(w[i]), "b_prime": est["mean"], "se": est["se"],
                     "acceptance": summ.acceptance})
    value = float(sum(r["weight"] * r["b_prime"] for r in rows))
    err = float(math.sqrt(sum((r["weight"] * r["se"]) ** 2 for r in rows)))
    return {"estimate": value, "se": err, "nodes": rows}


# exact interval means, used to settle the sign of the mean correction


def exact_interval_mean(n: int, beta: float, u: ChebSeries, order: int = 48) -> float:
    """E[sum u(x_i)] - n * c0 for the interval gas by ordered quadrature."""
    pts, w = ordered_rule(n, beta, order)
    vals = np.sum(u(pts), axis=1) - n * u.c0
    return float(np.sum(w * vals) / np.sum(w))


def exact_interval_mean_rational(n: int, k: int):
    """E[sum T_k(x_i)] at beta = 1 as an exact rational (sympy)."""
    import sympy as sp

    xs = sp.symbols(f"x0:{n}")
    vdm = sp.prod([xs[j] - xs[i] for i in range(n) for j in range(i + 1, n)])
    stat = sum(sp.chebyshevt(k, x) for x in xs)

    def integrate(expr):
        # ordered region -1 < x0 < x1 < ... < x_{n-1} < 1, innermost last variable
        for i in reversed(range(n)):
            lower = xs[i - 1] if i > 0 else -1
            expr = sp.integrate(sp.expand(expr), (xs[i], lower, 1))
        return expr

    return sp.nsimplify(integrate(vdm * stat) / integrate(vdm))
