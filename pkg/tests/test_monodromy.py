import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epscope.ep_locator import locate_eps
from epscope.errors import ConfigurationError, ParameterError, PathTooCloseError
from epscope.matrix_model import sample_ensemble
from epscope.monodromy import (
    LambdaPath,
    compose,
    conjugate_is_nearest,
    crossing_scan,
    default_radius,
    loop_action,
    loop_monodromy,
    nearest_other_distance,
    track_spectrum,
    winding_number,
)


def assert_trace_healthy(pencil, trace):
    assert np.max(trace.trace_errors(pencil)) <= 1e-9
    assert np.max(trace.eigen_residuals(pencil)) <= 1e-8


def transposition(n, pair):
    p = np.arange(n)
    p[list(pair)] = p[list(pair[::-1])]
    return p


@pytest.fixture(scope="module")
def five_level():
    p = sample_ensemble(5, 1, np.pi, seed=21)[0]
    return p, list(locate_eps(p))


def test_path_validation():
    with pytest.raises(ParameterError):
        LambdaPath(np.arange(5))
    with pytest.raises(ParameterError):
        LambdaPath([0, 1, 1, 2, 3, 4, 5, 6])
    with pytest.raises(ParameterError):
        LambdaPath.circle(0, -1.0)
    still = LambdaPath(np.full(8, 0.3 + 0.2j), closed=True)
    assert still.points().size == 9


def test_constant_path_is_trivial(two_level):
    trace = track_spectrum(two_level, LambdaPath(np.full(8, 0.3 + 0.2j), closed=True))
    perm, factors = loop_action(trace)
    np.testing.assert_array_equal(perm, [0, 1])
    np.testing.assert_allclose(factors, [1, 1], atol=1e-12)


def test_winding_number():
    pts = np.exp(2j * np.pi * np.arange(16) / 16)
    assert winding_number(pts, 0) == 1
    assert winding_number(pts[::-1], 0) == -1
    assert winding_number(pts, 3) == 0


@pytest.mark.parametrize("turns, perm, factors", [
    (1, [1, 0], [-1, 1]),
    (2, [0, 1], [-1, -1]),
    (3, [1, 0], [1, -1]),
    (4, [0, 1], [1, 1]),
])
def test_two_level_four_cycle(two_level, turns, perm, factors):
    eps = list(locate_eps(two_level))
    rep = loop_monodromy(two_level, eps[1], turns=turns, all_eps=eps, keep_trace=True)
    np.testing.assert_array_equal(rep.permutation, perm)
    np.testing.assert_allclose(rep.phase_factors, factors, atol=1e-6)
    assert rep.enclosed_eps == [1] and rep.warning is None
    assert_trace_healthy(two_level, rep.trace)


def test_one_turn_maps_pair_to_minus_second_and_first(two_level):
    # {psi1, psi2} -> {-psi2, psi1}: branch 0 arrives on slot 1 with factor -1
    eps = list(locate_eps(two_level))
    rep = loop_monodromy(two_level, eps[1], keep_trace=True)
    v0, v1 = rep.trace.frames[0], rep.trace.frames[-1]
    np.testing.assert_allclose(v1[:, 0], -v0[:, 1], atol=1e-6)
    np.testing.assert_allclose(v1[:, 1], v0[:, 0], atol=1e-6)


def test_loops_on_every_ep_of_a_random_pencil(five_level):
    p, eps = five_level
    for ep in eps:
        one = loop_monodromy(p, ep, all_eps=eps)
        pair = one.coalescing_pair
        np.testing.assert_array_equal(one.permutation, transposition(5, pair))
        np.testing.assert_allclose(np.abs(one.phase_factors), 1, atol=1e-6)
        others = [k for k in range(5) if k not in pair]
        np.testing.assert_allclose(one.phase_factors[others], 1, atol=1e-6)
        two = loop_monodromy(p, ep, turns=2, all_eps=eps)
        np.testing.assert_array_equal(two.permutation, np.arange(5))
        np.testing.assert_allclose(two.phase_factors[list(pair)], -1, atol=1e-6)
        four = loop_monodromy(p, ep, turns=4, all_eps=eps)
        np.testing.assert_allclose(four.phase_factors, 1, atol=1e-6)
        back = loop_monodromy(p, ep, direction=-1, all_eps=eps)
        three = loop_monodromy(p, ep, turns=3, all_eps=eps)
        np.testing.assert_array_equal(back.permutation, three.permutation)
        np.testing.assert_allclose(back.phase_factors, three.phase_factors, atol=1e-6)


def test_powers_of_one_turn_compose(five_level):
    p, eps = five_level
    ep = eps[3]
    one = loop_monodromy(p, ep, all_eps=eps)
    for k in (2, 3, 4):
        perm, factors = one.permutation, one.phase_factors
        rep = loop_monodromy(p, ep, turns=k, all_eps=eps)
        acc = one
        for _ in range(k - 1):
            perm, factors = compose(acc, one)
            acc = type(one)(perm, factors)
        np.testing.assert_array_equal(rep.permutation, perm)
        np.testing.assert_allclose(rep.phase_factors, factors, atol=1e-6)


def test_loop_radius_does_not_matter(five_level):
    p, eps = five_level
    ep = eps[0]
    d = nearest_other_distance(ep, eps)
    a = loop_monodromy(p, ep, radius=0.15 * d, all_eps=eps)
    b = loop_monodromy(p, ep, radius=0.45 * d, all_eps=eps)
    np.testing.assert_array_equal(a.permutation, b.permutation)
    np.testing.assert_allclose(a.phase_factors, b.phase_factors, atol=1e-6)


def test_empty_loop_is_identity(five_level):
    p, eps = five_level
    lams = np.array([e.lambda_c for e in eps])
    # a disk free of EPs: centre far from every EP relative to its radius
    centre = 0.37 + 0.11j
    radius = 0.3 * np.min(np.abs(lams - centre))
    trace = track_spectrum(p, LambdaPath.circle(centre, radius))
    perm, factors = loop_action(trace)
    np.testing.assert_array_equal(perm, np.arange(5))
    np.testing.assert_allclose(factors, 1, atol=1e-6)
    assert_trace_healthy(p, trace)


def test_loop_around_every_ep_is_single_valued(five_level):
    # outside all EPs the branches are the asymptotic lines: no permutation
    p, eps = five_level
    big = 2 * max(abs(e.lambda_c) for e in eps)
    rep = loop_monodromy(p, eps[0], radius=big + abs(eps[0].lambda_c), all_eps=eps)
    assert len(rep.enclosed_eps) == len(eps) and "encloses" in rep.warning
    np.testing.assert_array_equal(rep.permutation, np.arange(5))


def test_parallel_gauge_keeps_permutation(two_level):
    eps = list(locate_eps(two_level))
    rep = loop_monodromy(two_level, eps[1], gauge="parallel")
    np.testing.assert_array_equal(rep.permutation, [1, 0])
    np.testing.assert_allclose(np.abs(rep.phase_factors), 1, atol=1e-6)
    four = loop_monodromy(two_level, eps[1], turns=4, gauge="parallel")
    np.testing.assert_array_equal(four.permutation, [0, 1])


def test_path_through_an_ep_is_refused(two_level):
    path = LambdaPath.segment(-1 + 1j, 1 + 1j, 9)
    with pytest.raises(PathTooCloseError) as info:
        track_spectrum(two_level, path, max_depth=6)
    assert info.value.segment is not None


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.05, 1.0))
def test_traces_conserve_trace(re, im, radius):
    p = sample_ensemble(3, 1, np.pi, seed=5)[0]
    try:
        trace = track_spectrum(p, LambdaPath.circle(complex(re, im), radius, samples_per_turn=32))
    except PathTooCloseError:
        return
    assert_trace_healthy(p, trace)


def test_crossing_two_level(two_level):
    eps = list(locate_eps(two_level))
    rep = crossing_scan(two_level, eps[1], 0.1, all_eps=eps)
    assert rep.dichotomy
    half = crossing_scan(two_level, eps[1], 0.05, all_eps=eps)
    assert half.to_dict()["above"] == rep.to_dict()["above"]
    assert half.to_dict()["below"] == rep.to_dict()["below"]


def test_crossing_needs_off_axis_ep(crossing_lines, two_level):
    ep = locate_eps(crossing_lines)[0]
    with pytest.raises(ConfigurationError):
        crossing_scan(crossing_lines, ep, 0.1)
    eps = list(locate_eps(two_level))
    with pytest.raises(ConfigurationError):
        crossing_scan(two_level, eps[1], 1.5)


def test_crossing_dichotomy_on_isolated_random_eps():
    checked = 0
    for p in sample_ensemble(4, 6, np.pi, seed=2):
        eps = list(locate_eps(p))
        for ep in eps:
            if ep.lambda_c.imag <= 0 or not conjugate_is_nearest(ep, eps):
                continue
            rep = crossing_scan(p, ep, abs(ep.lambda_c.imag) / 4, all_eps=eps)
            assert rep.dichotomy, rep.to_dict()
            checked += 1
    assert checked >= 5


def test_default_radius_is_a_fraction_of_the_gap(two_level):
    eps = list(locate_eps(two_level))
    assert default_radius(eps[1], eps) == pytest.approx(0.6)
