import numpy as np
import pytest

import btq
from conftest import sphere_points


@pytest.mark.parametrize("text, want", [
    ("x3", lambda x1, x2, x3: x3),
    ("2*x1 - x2", lambda x1, x2, x3: 2 * x1 - x2),
    ("-x1 * -x2", lambda x1, x2, x3: x1 * x2),
    ("x3 * (x1 + 2)", lambda x1, x2, x3: x3 * (x1 + 2)),
    ("1 - 2 * x3 * x3", lambda x1, x2, x3: 1 - 2 * x3**2),
    (" 1.5e-1*x1+.5 ", lambda x1, x2, x3: 0.15 * x1 + 0.5),
])
def test_parse_sphere(sphere, atoms, rng, text, want):
    z = sphere_points(rng, 20)
    f = btq.parse_observable(sphere, text)
    xs = [a(z) for a in atoms]
    assert np.allclose(f(z), want(*xs), rtol=1e-14, atol=1e-14)
    assert f.is_real
    assert f.label == " ".join(text.split())


def test_parse_torus(torus, rng):
    u, v = rng.random(30), rng.random(30)
    z = torus.torus_point(u, v)
    f = btq.parse_observable(torus, "c(1,0) - 3*s(2,-1) + 0.25")
    want = np.cos(2 * np.pi * u) - 3 * np.sin(2 * np.pi * (2 * u - v)) + 0.25
    assert np.allclose(f(z), want, atol=1e-13)
    assert f.degree == 3


def test_degree_tracking(sphere):
    assert btq.parse_observable(sphere, "x1*x2*x3 + x1").degree == 3
    assert btq.parse_observable(sphere, "4").degree == 0


@pytest.mark.parametrize("text, pos", [
    ("x3 * (x1 + 2", 12),
    ("x4", 0),
    ("x1 +", 4),
    ("x1 x2", 3),
    ("2 # x1", 2),
    ("", 0),
])
def test_parse_errors_report_position(sphere, text, pos):
    with pytest.raises(btq.ParseError) as info:
        btq.parse_observable(sphere, text)
    assert info.value.pos == pos
    assert f"position {pos}" in str(info.value)


def test_atoms_of_wrong_model_rejected(sphere, torus):
    with pytest.raises(btq.ParseError, match="position 4"):
        btq.parse_observable(sphere, "1 + c(1,0)")
    with pytest.raises(btq.ParseError, match="position 0"):
        btq.parse_observable(torus, "x1")
    with pytest.raises(btq.ParseError):
        btq.parse_observable(torus, "c(1.5,0)")


def test_random_observable_reproducible(sphere, torus):
    for model in (sphere, torus):
        a = btq.random_observable(model, np.random.default_rng(5))
        b = btq.random_observable(model, np.random.default_rng(5))
        assert a.label == b.label and a.is_real
        assert btq.parse_observable(model, a.label).expr == a.expr
