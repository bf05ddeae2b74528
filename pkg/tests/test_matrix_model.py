import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epscope.errors import ParameterError
from epscope.matrix_model import (
    PencilParams,
    asymptotic_lines,
    build_pencil,
    evaluate,
    n_angles,
    rotation,
    sample_ensemble,
    unperturbed_intersections,
)

finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def pencil_params(draw, min_n=2, max_n=6):
    n = draw(st.integers(min_n, max_n))
    eps = draw(st.lists(finite, min_size=n, max_size=n))
    omega = draw(st.lists(finite, min_size=n, max_size=n))
    angles = draw(st.lists(st.floats(-np.pi, np.pi), min_size=n_angles(n),
                           max_size=n_angles(n)))
    return PencilParams(eps, omega, angles)


def test_identity_rotation_keeps_h1_diagonal(crossing_lines):
    np.testing.assert_array_equal(crossing_lines.h1, np.diag([2.0, 1.0]))
    np.testing.assert_array_equal(crossing_lines.h0, np.diag([1.0, 2.0]))


def test_quarter_rotation_matrix(two_level):
    # U = [[c, -s], [s, c]] at 45 degrees: U diag(2, 1) U^T has off-diagonal +1/2
    np.testing.assert_allclose(two_level.h1, [[1.5, 0.5], [0.5, 1.5]], atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(two_level.h1), [1.0, 2.0], atol=1e-14)


def test_two_by_two_rotation_form():
    c, s = np.cos(0.3), np.sin(0.3)
    np.testing.assert_allclose(rotation(2, [0.3]), [[c, -s], [s, c]])


def test_rotation_is_orthogonal_and_identity_at_zero():
    u = rotation(5, np.linspace(-2, 2, 10))
    np.testing.assert_allclose(u.T @ u, np.eye(5), atol=1e-14)
    np.testing.assert_array_equal(rotation(5, np.zeros(10)), np.eye(5))


@pytest.mark.parametrize("kwargs", [
    dict(eps=[1, 2], omega=[1], angles=[0]),
    dict(eps=[1, 2], omega=[1, 2], angles=[0, 0]),
    dict(eps=[1, np.nan], omega=[1, 2], angles=[0]),
    dict(eps=[1, 2], omega=[1, np.inf], angles=[0]),
    dict(eps=[1], omega=[1], angles=[]),
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        PencilParams(**kwargs)


def test_params_are_read_only():
    p = PencilParams([1.0, 2.0], [0.5, 0.1], [0.2])
    with pytest.raises(ValueError):
        p.eps[0] = 3.0


def test_evaluate_examples(crossing_lines, two_level):
    np.testing.assert_array_equal(evaluate(crossing_lines, 0), crossing_lines.h0)
    np.testing.assert_array_equal(evaluate(crossing_lines, 1), np.diag([3.0, 3.0]))
    m = evaluate(two_level, 1j)
    np.testing.assert_array_equal(m, m.T)
    assert not np.allclose(m, m.conj().T)
    with pytest.raises(ParameterError):
        evaluate(two_level, complex(np.nan, 0))


@given(pencil_params(), finite, finite)
def test_evaluate_is_complex_symmetric(params, re, im):
    m = evaluate(build_pencil(params), complex(re, im))
    np.testing.assert_array_equal(m, m.T)


@given(pencil_params())
def test_h1_spectrum_is_omega(params):
    p = build_pencil(params)
    scale = max(1.0, np.max(np.abs(params.omega)))
    np.testing.assert_allclose(np.linalg.eigvalsh(p.h1), np.sort(params.omega),
                               atol=1e-10 * scale)


@given(pencil_params())
def test_asymptotic_intercepts_preserve_trace(params):
    lines = asymptotic_lines(build_pencil(params))
    alpha = sum(l.intercept for l in lines)
    assert abs(alpha - params.eps.sum()) <= 1e-12 * max(1.0, np.abs(params.eps).sum())
    assert [l.slope for l in lines] == list(params.omega)


def test_ensemble_is_deterministic_and_sliceable():
    a = sample_ensemble(4, 3, 0.5, seed=7)
    b = sample_ensemble(4, 3, 0.5, seed=7)
    c = sample_ensemble(4, 1, 0.5, seed=7, start=2)
    for x, y in zip(a, b):
        assert x.h0.tobytes() == y.h0.tobytes() and x.h1.tobytes() == y.h1.tobytes()
    assert a[2].h1.tobytes() == c[0].h1.tobytes()
    assert a[0].h1.tobytes() != a[1].h1.tobytes()


def test_ensemble_ranges_and_zero_window():
    for p in sample_ensemble(5, 20, 0.3, seed=1):
        assert np.all(np.abs(p.params.eps) <= 1) and np.all(np.abs(p.params.omega) <= 1)
        assert np.all(np.abs(p.params.angles) <= 0.3)
    for p in sample_ensemble(5, 5, 0.0, seed=1):
        np.testing.assert_array_equal(p.h1, np.diag(p.params.omega))


@pytest.mark.parametrize("args", [(1, 3, 0.1), (3, 0, 0.1), (3, 2, -1.0), (3, 2, np.inf)])
def test_ensemble_rejects_bad_arguments(args):
    with pytest.raises(ParameterError):
        sample_ensemble(*args, seed=0)


def test_intersection_examples():
    got, skipped = unperturbed_intersections(PencilParams([1, 2], [2, 1], [0]))
    assert got == [(1.0, (0, 1))] and skipped == 0
    got, skipped = unperturbed_intersections(PencilParams([0, 1], [1, 1], [0]))
    assert got == [] and skipped == 1
    got, _ = unperturbed_intersections(PencilParams([0, 1, 2], [3, 2, 1], [0, 0, 0]))
    assert [lam for lam, _ in got] == [1.0, 1.0, 1.0]


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=7, unique=True),
       st.lists(st.floats(-5, 5), min_size=2, max_size=7, unique=True))
def test_intersection_sign_follows_ordering(eps, omega):
    n = min(len(eps), len(omega))
    e, w = sorted(eps[:n]), sorted(omega[:n])
    same, _ = unperturbed_intersections(PencilParams.unrotated(e, w))
    opposite, _ = unperturbed_intersections(PencilParams.unrotated(e, w[::-1]))
    assert len(same) <= n_angles(n)
    assert all(lam <= 0 for lam, _ in same)
    assert all(lam >= 0 for lam, _ in opposite)


def test_asymptotic_examples():
    p = build_pencil(PencilParams([0.3, -0.7], [1.0, 2.0], [0.0]))
    assert [l.intercept for l in asymptotic_lines(p)] == [0.3, -0.7]
    q = build_pencil(PencilParams([0.3, -0.7], [1.0, 2.0], [np.pi / 2]))
    np.testing.assert_allclose([l.intercept for l in asymptotic_lines(q)], [-0.7, 0.3],
                               atol=1e-15)


def test_asymptotic_lines_match_large_lambda_fit():
    p = sample_ensemble(4, 1, np.pi, seed=11)[0]
    lam = np.linspace(1e3, 1e4, 50)
    levels = np.array([np.linalg.eigvalsh(p.h0 + x * p.h1) for x in lam])
    w = p.params.omega
    g = p.u.T @ p.h0 @ p.u
    # next order of the large-lambda expansion: sum_j g_kj^2 / (lam (w_k - w_j))
    c = np.array([sum(g[k, j] ** 2 / (w[k] - w[j]) for j in range(4) if j != k)
                  for k in range(4)])
    lines = asymptotic_lines(p)
    for col, k in enumerate(np.argsort(w)):
        slope, intercept = np.polyfit(lam, levels[:, col], 1)
        assert abs(slope - lines[k].slope) < 1e-3
        assert abs(intercept - lines[k].intercept) <= 1e-3 + 2 * abs(c[k]) / lam[0]
        _, corrected = np.polyfit(lam, levels[:, col] - c[k] / lam, 1)
        assert abs(corrected - lines[k].intercept) < 1e-4
