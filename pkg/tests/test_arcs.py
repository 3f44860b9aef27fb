import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcgas.arcs import (ArcValidationError, UNIT_CIRCLE_FRAME, arc_from_dict, load_arc,
                         make_circular_arc, make_interval, make_perturbed_arc, validate)


def test_interval_basics():
    arc = make_interval()
    assert arc.point(0.5) == 0.5
    assert arc.tangent(0.5) == 1
    assert arc.endpoints() == (-1, 1)
    assert validate(arc, 256)["ok"]
    assert validate(arc, 256)["endpoint_residual"] == 0


@pytest.mark.parametrize("alpha", [np.pi / 3, np.pi / 2, 2 * np.pi / 3, 0.2, 3.0])
def test_circle_geometry(alpha):
    arc = make_circular_arc(alpha)
    t = np.linspace(-1, 1, 257)
    assert np.max(np.abs(np.abs(arc.point(t) - 1j / np.tan(alpha)) - 1 / np.sin(alpha))) < 1e-12
    ends = arc.point(np.array([-1.0, 1.0]))
    assert np.max(np.abs(ends - [-1, 1])) < 1e-14
    assert validate(arc, 256)["min_speed"] > 0


def test_circle_center_radius():
    arc = make_circular_arc(np.pi / 3)
    assert abs(arc.center - 1j / np.sqrt(3)) < 1e-15
    assert abs(arc.radius - 2 / np.sqrt(3)) < 1e-15
    half = make_circular_arc(np.pi / 2)
    assert abs(half.center) < 1e-15 and abs(half.radius - 1) < 1e-15


def test_unit_circle_frame():
    alpha = np.pi / 3
    arc = make_circular_arc(alpha, UNIT_CIRCLE_FRAME)
    a, b = arc.endpoints()
    assert {round(a.imag, 12), round(b.imag, 12)} == {round(np.sin(alpha), 12), round(-np.sin(alpha), 12)}
    assert abs(a.real - np.cos(alpha)) < 1e-14
    t = np.linspace(-1, 1, 101)
    assert np.max(np.abs(np.abs(arc.frame_point(t)) - 1)) < 1e-12
    # the frame map is v(z) = i z at alpha = pi / 2
    half = make_circular_arc(np.pi / 2, UNIT_CIRCLE_FRAME)
    assert abs(half.frame_scale - 1j) < 1e-15 and abs(half.frame_shift) < 1e-15


@pytest.mark.parametrize("alpha", [0.0, np.pi, -1.0, 4.0])
def test_circle_domain(alpha):
    with pytest.raises(ValueError):
        make_circular_arc(alpha)


def test_perturbed_reduces_to_interval():
    arc = make_perturbed_arc((1.0,), 0.0)
    t = np.linspace(-1, 1, 33)
    assert np.array_equal(arc.point(t), make_interval().point(t))


def test_perturbed_validation():
    arc = make_perturbed_arc((1.0,), 0.3)
    diag = validate(arc, 512)
    assert diag["ok"] and diag["min_pairwise_distance"] > 0
    # a polynomial graph over the real axis never self-intersects
    assert validate(make_perturbed_arc((1.0,), 10.0), 512)["ok"]


def test_divided_difference_matches_chord():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-1, 1, (2, 50))
    for arc in (make_circular_arc(1.1), make_perturbed_arc((1.0, -0.5, 0.25), 0.4)):
        dd = arc.divided_difference(x, y)
        chord = (arc.point(x) - arc.point(y)) / (x - y)
        assert np.max(np.abs(dd - chord)) < 1e-12
        assert np.max(np.abs(arc.divided_difference(x, x) - arc.tangent(x))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, np.pi - 0.05), st.floats(-1, 1))
def test_circle_tangent_is_derivative(alpha, t):
    arc = make_circular_arc(alpha)
    h = 1e-6
    fd = (arc.point(t + h) - arc.point(t - h)) / (2 * h)
    assert abs(fd - arc.tangent(t)) < 1e-7 * max(1, abs(arc.tangent(t)))


def test_config_roundtrip(tmp_path):
    for arc in (make_interval(), make_circular_arc(1.5708), make_perturbed_arc([1.0], 0.3)):
        path = tmp_path / "arc.json"
        path.write_text(json.dumps(arc.to_dict()))
        again = load_arc(path)
        assert again == arc
        assert again.content_hash() == arc.content_hash()
    assert arc_from_dict({"family": "circular", "alpha": 1.5708, "frame": "endpoint"}).alpha == 1.5708


def test_bad_config():
    with pytest.raises(ValueError):
        arc_from_dict({"family": "spiral"})
