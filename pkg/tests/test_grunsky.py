import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from arcgas.grunsky import (bf_consistency, fredholm_logdet, grunsky_coeffs, min_eigenvalue,
                            pommerenke_residual, quad_form, solve_interp)


def test_interval_matrix_vanishes(interval_an):
    assert np.max(np.abs(interval_an.B.a)) < 1e-10
    assert fredholm_logdet(interval_an.B)[0] == pytest.approx(0, abs=1e-10)


def test_matrix_symmetric(any_an):
    B = any_an.B
    assert np.array_equal(B.b, B.b.T)
    assert B.b.shape == (B.N, B.N)


def test_symmetric_arc_parity(half_circle_an):
    a = half_circle_an.B.a
    k = np.arange(1, len(a) + 1)
    odd = (k[:, None] + k[None, :]) % 2 == 1
    assert np.max(np.abs(a[odd])) < 1e-9
    assert np.max(np.abs(a[~odd])) > 1e-3


def test_capacity_from_constant_term(any_an):
    assert any_an.B.cap == pytest.approx(any_an.eq.cap, abs=1e-10)


def test_spectrum_above_minus_one(any_an):
    lmin, kappa = min_eigenvalue(any_an.B)
    assert lmin > -1 and 0 <= kappa < 1


def test_coefficient_decay(half_circle_an, perturbed_an):
    for an in (half_circle_an, perturbed_an):
        assert an.B.decay_fit[1] >= 2


def test_logdet_converged_in_N(perturbed_an):
    eq = perturbed_an.eq
    coarse = fredholm_logdet(grunsky_coeffs(eq, 32))[0]
    fine, tail = fredholm_logdet(perturbed_an.B)
    assert abs(coarse - fine) < 1e-8 and tail < 1e-8


def test_quad_M_too_small(half_circle_an):
    with pytest.raises(ValueError):
        grunsky_coeffs(half_circle_an.eq, 64, 128)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 64, elements=st.floats(-1, 1)))
def test_grunsky_inequality(half_circle_an, x):
    B = half_circle_an.B
    kappa = min_eigenvalue(B)[1]
    assert x @ x + x @ B.b @ x >= (1 - kappa) * (x @ x) - 1e-12


@pytest.mark.parametrize("s,beta", [(1.0, 2.0), (0.5, 1.0), (1.0, 4.0)])
def test_interpolation_equation(perturbed_an, s, beta):
    B = perturbed_an.B
    g = np.zeros(B.N)
    g[:3] = np.sqrt([1, 2, 3]) * [1.0, -0.5, 0.25]
    sol = solve_interp(B, g, s, beta)
    assert sol.residual < 1e-12
    assert pommerenke_residual(sol, g, B) < 1e-10
    assert quad_form(B, g, g, s) == pytest.approx(-beta * g @ sol.h_scaled, rel=1e-12)


def test_bf_equals_m(any_an):
    assert bf_consistency(any_an.B, any_an.f, any_an.m_scaled) < 1e-4
