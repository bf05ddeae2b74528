import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from epscope.ep_local import (
    chirality_decompose,
    ep_eigenvector,
    local_report,
    phase_rigidity,
)
from epscope.ep_locator import ExceptionalPoint, locate_eps
from epscope.errors import NotDefectiveError, ParameterError
from epscope.matrix_model import PencilParams, build_pencil, sample_ensemble


@pytest.fixture(scope="module")
def four_level_eps():
    out = []
    for p in sample_ensemble(4, 3, np.pi, seed=8):
        out.append((p, list(locate_eps(p))))
    return out


def test_rigidity_examples():
    assert phase_rigidity([1.0, 0.0]) == 1.0
    assert phase_rigidity(np.array([1, 1j]) / np.sqrt(2)) < 1e-16
    assert phase_rigidity(np.exp(0.7j) * np.array([0.3, -0.4, 1.2])) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        phase_rigidity([0.0, 0.0])


@given(arrays(complex, 5, elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                      allow_infinity=False)))
def test_rigidity_lies_in_unit_interval(v):
    if np.linalg.norm(v) < 1e-6:
        return
    assert 0.0 <= phase_rigidity(v) <= 1.0 + 1e-12


def test_two_level_ep_vector_is_chiral(two_level):
    eps = locate_eps(two_level)
    for ep in eps:
        vec = ep_eigenvector(two_level, ep)
        assert np.linalg.norm(vec.vector) == pytest.approx(1.0, abs=1e-12)
        assert vec.self_orthogonality < 1e-8
    lower = chirality_decompose(two_level, eps[0])
    upper = chirality_decompose(two_level, eps[1])
    assert lower.sign == -upper.sign
    assert max(lower.error, upper.error) < 1e-8


def test_reference_swap_flips_sign(two_level):
    ep = locate_eps(two_level)[1]
    psi = np.linalg.eigh(two_level.h0 + ep.lambda_c.real * two_level.h1)[1]
    a = chirality_decompose(two_level, ep, reference=(psi[:, 0], psi[:, 1]))
    b = chirality_decompose(two_level, ep, reference=(psi[:, 1], psi[:, 0]))
    assert a.sign == -b.sign
    assert a.error == pytest.approx(b.error, abs=1e-12)


def test_not_an_ep_is_reported(two_level):
    lam = 0.4
    e = np.linalg.eigvalsh(two_level.h0 + lam * two_level.h1)[0]
    fake = ExceptionalPoint(complex(lam), complex(e), 0.0)
    with pytest.raises(NotDefectiveError):
        ep_eigenvector(two_level, fake)
    off = ExceptionalPoint(complex(lam), complex(e + 0.3), 0.0)
    with pytest.raises(NotDefectiveError):
        ep_eigenvector(two_level, off)


def test_diabolic_point_is_reported():
    p = build_pencil(PencilParams([1.0, 2.0, 5.0], [2.0, 1.0, 0.0], [0.0, 0.0, 0.0]))
    with pytest.raises(NotDefectiveError):
        ep_eigenvector(p, ExceptionalPoint(1 + 0j, 3 + 0j, 0.0))


def test_three_level_pencil_decomposes():
    p = sample_ensemble(3, 1, np.pi, seed=4)[0]
    eps = locate_eps(p)
    assert len(eps) == 6
    for ep in eps:
        assert chirality_decompose(p, ep).error <= 1e-3


def test_random_four_level_local_structure(four_level_eps):
    for p, eps in four_level_eps:
        signs = {}
        for i, ep in enumerate(eps):
            rep = local_report(p, ep)
            assert rep.self_orthogonality <= 1e-4
            assert phase_rigidity(rep.vector) <= 1e-4
            assert rep.decomposition_error <= 1e-3
            assert rep.sigma_min <= 1e-8
            assert rep.sigma_second >= 1e-5
            signs[i] = rep.chirality_sign
            chi = chirality_decompose(p, ep)
            c1, c2 = chi.coefficients
            assert abs(c2 / c1 - 1j * chi.sign) <= 2 * max(chi.error, 1e-12) + 1e-9
        for i, ep in enumerate(eps):
            assert signs[i] == -signs[ep.conjugate_partner]


def test_real_lambda_eigenvectors_are_rigid():
    p = sample_ensemble(4, 1, np.pi, seed=9)[0]
    _, vecs = np.linalg.eig(p.h0 + 0.37 * p.h1)
    for v in vecs.T:
        assert phase_rigidity(v) >= 0.99
