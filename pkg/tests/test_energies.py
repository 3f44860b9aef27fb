import numpy as np
import pytest
from hypothesis import given, strategies as st

from arcgas.arcs import make_circular_arc
from arcgas.energies import (MEAN_VARIANTS, SELECTED_MEAN_VARIANT, A_s, analyze_arc, beta_bracket,
                             clt_params, endpoint_sum, energy_report, free_energy_prediction,
                             jA_spectral, jF_cheb, leading_coefficients, log_ratio_prediction,
                             mean_functional, prediction_report, laplace_exponent)
from arcgas.equilibrium import ChebSeries


@pytest.fixture(scope="module")
def reports(interval_an, half_circle_an, perturbed_an):
    return {"interval": energy_report(interval_an), "half_circle": energy_report(half_circle_an),
            "perturbed": energy_report(perturbed_an)}


def test_interval_energies_vanish(reports):
    r = reports["interval"]
    assert r.cap == pytest.approx(0.5, abs=1e-12)
    for v in (r.JA_geometric, r.JA_spectral, r.JF_cheb, r.JF_dirichlet, r.IL):
        assert abs(v) < 1e-8


@pytest.mark.parametrize("alpha", [np.pi / 3, 2 * np.pi / 3])
def test_circle_energies(alpha):
    r = energy_report(analyze_arc(make_circular_arc(alpha), N=64))
    half = np.sin(alpha / 2)
    assert r.cap == pytest.approx(1 / (2 * half), abs=1e-10)
    assert r.JA_geometric == pytest.approx(-6 * np.log(half), abs=1e-8)
    assert r.JA_spectral == pytest.approx(-6 * np.log(half), abs=1e-8)
    # Fekete energy of a circular arc is 2 log sin(alpha/2), which is negative
    assert r.JF_cheb == pytest.approx(2 * np.log(half), abs=1e-8)
    assert r.JF_dirichlet == pytest.approx(2 * np.log(half), abs=1e-8)


def test_routes_agree(reports):
    for r in reports.values():
        assert r.JA_geometric >= -1e-8
        assert abs(r.JA_geometric - r.JA_spectral) < 1e-4
        assert abs(r.JF_cheb - r.JF_dirichlet) < 1e-4
        assert abs(r.cap - r.cap_frostman) < 1e-8
        assert r.logdet_tail < 1e-8


def test_report_serializes(reports):
    d = reports["interval"].to_dict()
    assert d["diagnostics"]["N"] == 64
    assert set(d) >= {"cap", "JA_geometric", "JF_cheb", "kappa", "lambda_max"}


@given(st.floats(0.05, 20))
def test_beta_bracket_duality(beta):
    assert beta_bracket(beta) == pytest.approx(beta_bracket(4 / beta), rel=1e-10, abs=1e-14)
    assert beta_bracket(beta) >= 0


def test_beta2_constant_is_ja_over_24():
    assert beta_bracket(2.0) == 0
    assert free_energy_prediction(2.4, 17.0, 2.0) == pytest.approx(0.1)
    assert free_energy_prediction(0.0, 1.0, 4.0) == pytest.approx(1 / 16)
    assert leading_coefficients(2.0) == (1.0, 0.0)


def test_endpoint_sum():
    u = ChebSeries(0.5, np.array([1.0, 2.0, 3.0]))
    assert endpoint_sum(u) == pytest.approx(u(1.0) + u(-1.0))


def test_interval_clt_parameters(interval_an):
    var, shift = clt_params(interval_an, ChebSeries.from_coeffs([1.0]), 2.0)
    assert var == pytest.approx(0.25) and shift == 0
    var, shift = clt_params(interval_an, ChebSeries.from_coeffs([0.0, 1.0]), 1.0)
    assert var == pytest.approx(1.0)
    assert shift == pytest.approx(-0.5, abs=1e-10)


def test_selected_variant_kills_constants(any_an):
    one = ChebSeries(1.0, np.zeros(4))
    assert SELECTED_MEAN_VARIANT in MEAN_VARIANTS
    assert abs(mean_functional(any_an, one)) < 1e-10


def test_A_s_at_zero_interval(interval_an):
    u = ChebSeries.from_coeffs([1.0, 0.5])
    g = u.scaled()
    assert A_s(interval_an, u, 2.0, 0.0) == pytest.approx(g @ g / 8)


def test_laplace_terms_vanish_for_interval(interval_an):
    terms = laplace_exponent(interval_an, None, 2.0)
    assert abs(terms["total"]) < 1e-12


def test_log_ratio_prediction_circle(half_circle_an):
    n = 10
    pred = log_ratio_prediction(half_circle_an, 2.0, n)
    expect = n * n * np.log(np.sqrt(2)) + jA_spectral(half_circle_an.B) / 24
    assert pred == pytest.approx(expect, abs=1e-10)
    assert jF_cheb(half_circle_an) < 0


def test_prediction_report(half_circle_an):
    rep = prediction_report(half_circle_an, 4.0, ChebSeries.from_coeffs([1.0]))
    assert rep.constant == pytest.approx(rep.JA / 24 + rep.JF / 16)
    assert rep.clt_variance > 0 and rep.laplace_terms is not None
    assert prediction_report(half_circle_an, 2.0).clt_variance is None


def test_truncation_doubles_until_drift_small():
    an = analyze_arc(make_circular_arc(np.pi / 2), N=8, drift_tol=1e-12)
    assert an.N > 8
    assert analyze_arc(make_circular_arc(np.pi / 2), N=8, drift_tol=1.0).N == 8
