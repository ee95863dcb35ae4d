import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sipcheck.errors import DimensionMismatch, InvalidInput
from sipcheck.norms import (
    Family,
    NonSmoothNorm,
    NormSpec,
    build_direct_sum,
    dual_norm,
    load_norm,
    norm_eval,
    norm_gradient,
    numeric_gradient,
    parse_norm,
    register_family,
    support_point,
)

from corpus import seeded_spd

ELL = NormSpec.ellipsoid(np.diag([1.0, 4.0]))


def families():
    return {
        "lp1.5": NormSpec.lp(1.5, 5),
        "lp2": NormSpec.lp(2, 4),
        "lp3": NormSpec.lp(3, 6),
        "lp4": NormSpec.lp(4, 8),
        "wlp": NormSpec.weighted_lp(3, [1.0, 0.5, 2.0, 3.0]),
        "ellipsoid": NormSpec.ellipsoid(seeded_spd(5, 3)),
        "direct_sum": build_direct_sum([NormSpec.lp(4, 2), ELL, NormSpec.lp(1.5, 3)]),
    }


def central_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


# --- examples ---------------------------------------------------------------


def test_norm_examples():
    assert norm_eval(NormSpec.lp(4, 2), [1, 0]) == 1.0
    assert norm_eval(NormSpec.lp(4, 2), [1, 1]) == pytest.approx(2 ** 0.25, rel=1e-15)
    assert norm_eval(ELL, [0, 1]) == pytest.approx(2.0, rel=1e-15)


def test_gradient_examples():
    np.testing.assert_allclose(norm_gradient(NormSpec.lp(2, 2), [3, 4]), [0.6, 0.8], rtol=1e-15)
    g = norm_gradient(NormSpec.lp(4, 2), [1, 1])
    np.testing.assert_allclose(g, [2 ** -0.75] * 2, rtol=1e-14)
    np.testing.assert_allclose(g, central_difference(lambda v: norm_eval(NormSpec.lp(4, 2), v),
                                                     np.array([1.0, 1.0])), atol=1e-8)
    np.testing.assert_allclose(norm_gradient(ELL, [0, 1]), [0, 2], atol=1e-15)


def test_direct_sum_examples():
    np.testing.assert_allclose(
        [norm_eval(build_direct_sum([NormSpec.lp(2, 1), NormSpec.lp(2, 1)]), v)
         for v in ([3, 4], [1, -1], [0.2, 7])],
        [norm_eval(NormSpec.lp(2, 2), v) for v in ([3, 4], [1, -1], [0.2, 7])],
        rtol=1e-15,
    )
    ds = build_direct_sum([NormSpec.lp(4, 2), NormSpec.lp(4, 2)])
    assert ds.dim == 4
    assert norm_eval(ds, [1, 0, 1, 0]) == pytest.approx(math.sqrt(2), rel=1e-15)


# --- invariants ---------------------------------------------------------------


@pytest.mark.parametrize("name", list(families()))
def test_euler_identity_and_dual_norm(name):
    spec = families()[name]
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.standard_normal(spec.dim) * 10 ** rng.uniform(-3, 3)
        g = norm_gradient(spec, x)
        assert g @ x == pytest.approx(norm_eval(spec, x), rel=1e-9)
        assert dual_norm(spec, g) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("name", list(families()))
def test_triangle_inequality(name):
    spec = families()[name]
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        x, y = rng.standard_normal((2, spec.dim))
        assert norm_eval(spec, x + y) <= norm_eval(spec, x) + norm_eval(spec, y) + 1e-12


@pytest.mark.parametrize("name", list(families()))
def test_finite_difference_gradient(name):
    spec = families()[name]
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 50:
        x = rng.standard_normal(spec.dim)
        if np.min(np.abs(x)) < 1e-3:
            continue
        x = x / norm_eval(spec, x)
        fd = central_difference(lambda v: norm_eval(spec, v), x)
        np.testing.assert_allclose(norm_gradient(spec, x), fd, atol=1e-6)
        checked += 1


vectors = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=5, max_size=5)


@settings(max_examples=200, deadline=None)
@given(vectors, st.floats(-1e3, 1e3, allow_nan=False))
def test_absolute_homogeneity(x, lam):
    for spec in families().values():
        if spec.dim != 5:
            continue
        x = np.array(x)
        assert norm_eval(spec, lam * x) == pytest.approx(abs(lam) * norm_eval(spec, x),
                                                         rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_zero_iff_origin(x):
    x = np.array(x)
    for spec in (NormSpec.lp(1.5, 5), NormSpec.lp(4, 5), NormSpec.ellipsoid(seeded_spd(5, 3))):
        assert (norm_eval(spec, x) == 0) == (not np.any(x))


@pytest.mark.parametrize("name", list(families()))
def test_support_point_maximizes(name):
    spec = families()[name]
    rng = np.random.default_rng(4)
    for _ in range(20):
        c = rng.standard_normal(spec.dim)
        e = support_point(spec, c)
        assert norm_eval(spec, e) == pytest.approx(1.0, rel=1e-12)
        assert c @ e == pytest.approx(dual_norm(spec, c), rel=1e-12)
        for _ in range(20):
            f = rng.standard_normal(spec.dim)
            assert c @ f / norm_eval(spec, f) <= c @ e + 1e-12


# --- errors and fallbacks -------------------------------------------------------


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0, float("inf")])
def test_rejects_non_smooth_exponents(p):
    with pytest.raises(InvalidInput):
        NormSpec.lp(p, 2)


def test_rejects_bad_ellipsoid():
    with pytest.raises(InvalidInput, match="symmetric"):
        NormSpec.ellipsoid([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidInput, match="positive definite"):
        NormSpec.ellipsoid([[1.0, 0.0], [0.0, -1.0]])


def test_input_errors():
    with pytest.raises(DimensionMismatch):
        norm_eval(NormSpec.lp(3, 2), [1, 2, 3])
    with pytest.raises(InvalidInput, match="non-finite"):
        norm_eval(NormSpec.lp(3, 2), [1, np.nan])
    with pytest.raises(InvalidInput, match="origin"):
        norm_gradient(NormSpec.lp(3, 2), [0, 0])
    with pytest.raises(InvalidInput):
        build_direct_sum([])


def test_registered_family_uses_finite_differences():
    # a rotated l4 norm, registered without a gradient
    R = np.array([[0.6, -0.8], [0.8, 0.6]])
    register_family("rotated_l4", Family(norm=lambda s, x: float(np.sum((R @ x) ** 4) ** 0.25)))
    spec = NormSpec("rotated_l4", 2)
    x = np.array([0.3, -1.1])
    exact = R.T @ norm_gradient(NormSpec.lp(4, 2), R @ x)
    np.testing.assert_allclose(norm_gradient(spec, x), exact, atol=1e-8)
    c = np.array([1.0, 2.0])
    e = support_point(spec, c)
    np.testing.assert_allclose(e, R.T @ support_point(NormSpec.lp(4, 2), R @ c), atol=1e-6)


def test_smoothness_probe_detects_kink():
    register_family("l1_kinked", Family(norm=lambda s, x: float(np.sum(np.abs(x)))))
    spec = NormSpec("l1_kinked", 2)
    with pytest.raises(NonSmoothNorm):
        norm_gradient(spec, [1.0, 0.0])
    with pytest.raises(NonSmoothNorm):
        numeric_gradient(lambda v: abs(v[0]), np.array([0.0]))


# --- file format ---------------------------------------------------------------


@pytest.mark.parametrize(
    "obj, dim",
    [
        ({"type": "lp", "p": 4.0, "dim": 2}, 2),
        ({"type": "weighted_lp", "p": 3.0, "weights": [1.0, 2.0]}, 2),
        ({"type": "ellipsoid", "Q": [[1.0, 0.0], [0.0, 4.0]]}, 2),
        ({"type": "direct_sum", "parts": [{"type": "lp", "p": 4.0, "dim": 2},
                                          {"type": "ellipsoid", "Q": [[2.0]]}]}, 3),
    ],
)
def test_parse_round_trip(obj, dim, tmp_path):
    spec = parse_norm(obj)
    assert spec.dim == dim
    path = tmp_path / "norm.json"
    path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
    assert load_norm(path) == spec


@pytest.mark.parametrize(
    "obj",
    [
        {"type": "lp", "p": 4.0, "dim": 2, "extra": 1},
        {"type": "lp", "p": 4.0},
        {"type": "lp", "p": 1.0, "dim": 2},
        {"type": "lp", "p": "4", "dim": 2},
        {"type": "linf", "dim": 2},
        {"type": "weighted_lp", "p": 3.0, "weights": [1.0, -2.0]},
        {"type": "weighted_lp", "p": 3.0, "weights": [1.0, 2.0], "dim": 3},
        {"type": "ellipsoid", "Q": [[1.0, 2.0], [2.0, 1.0]]},
        {"type": "direct_sum", "parts": []},
        [1, 2],
    ],
)
def test_parse_rejects(obj):
    with pytest.raises(InvalidInput):
        parse_norm(obj)
