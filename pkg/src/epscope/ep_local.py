"""The eigenvector at an EP: defectiveness, self-orthogonality and chirality.

For a real symmetric pencil the EP eigenvector obeys v^T v = 0. Writing
v = e^{i theta} (a + i b) with real a, b this forces |a| = |b| and a . b = 0,
so v is (up to a global phase) psi1 + i psi2 or psi1 - i psi2 for a real
orthonormal pair spanning the real plane P = span{Re v, Im v}. The sign is the
orientation of P relative to a reference pair; here the reference is the two
real eigenvectors of the Hermitian problem at lam = Re lam_c that lie closest
to P, ordered by energy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ep_locator import ExceptionalPoint, pencil_scale
from .errors import NotDefectiveError, ParameterError, ReferenceMismatchError
from .matrix_model import MatrixPencil, evaluate

# near a square-root branch point eigenpairs are only good to ~sqrt(machine eps)
RIGIDITY_TOL = 1e-4
DECOMPOSITION_TOL = 1e-3
NULL_TOL = 1e-8
# eigenvalues at a double root split like sqrt(perturbation)
COALESCENCE_TOL = 1e-4
CAPTURE_MIN = 0.99
ALIGNMENT_MIN = 0.05


@dataclass(frozen=True)
class EpEigenvector:
    vector: np.ndarray
    self_orthogonality: float
    sigma_min: float
    sigma_second: float
    chirality_sign: int | None = None
    decomposition_error: float | None = None


@dataclass(frozen=True)
class Chirality:
    sign: int
    error: float
    coefficients: tuple[complex, complex]
    basis: np.ndarray         # (N, 2) real orthonormal psi1, psi2
    capture: float            # norm of v inside span{psi1, psi2}
    alignment: float          # smallest singular value of the reference overlap
    reference_levels: tuple[int, int] | None = None


def phase_rigidity(v) -> float:
    """|v^T v| / (v^H v): 1 for a real vector, 0 for a perfectly chiral one."""
    v = np.asarray(v, dtype=complex).ravel()
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0.0:
        raise ParameterError("phase rigidity of the zero vector is undefined")
    return float(abs(v @ v) / norm2)


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[k]))


def ep_eigenvector(pencil: MatrixPencil, ep: ExceptionalPoint,
                   null_tol: float = NULL_TOL) -> EpEigenvector:
    """Null vector of H(lam_c) - E_c from the smallest singular triplet."""
    n = pencil.dim
    scale = pencil_scale(pencil, ep.lambda_c)
    m = evaluate(pencil, ep.lambda_c) - ep.energy_c * np.eye(n)
    _, s, vh = np.linalg.svd(m)
    smin, ssec = float(s[-1]), float(s[-2])
    if smin > null_tol * scale:
        raise NotDefectiveError(
            f"E_c is not an eigenvalue of H(lam_c): smallest singular value "
            f"{smin / scale:.2e} x scale"
        )
    if ssec <= null_tol * scale:
        raise NotDefectiveError(
            "two vanishing singular values: diabolic point or higher-order degeneracy"
        )
    shifts = np.sort(np.abs(np.linalg.eigvals(m)))
    if shifts[1] > COALESCENCE_TOL * scale:
        raise NotDefectiveError(
            f"E_c is a simple eigenvalue: nearest other level at {shifts[1] / scale:.2e} x scale"
        )
    v = _canonical_phase(vh[-1].conj())
    return EpEigenvector(v, float(abs(v @ v)), smin / scale, ssec / scale)


def _real_plane(v: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(np.column_stack([v.real, v.imag]))
    return q


def _reference_pair(pencil: MatrixPencil, lam_real: float, plane: np.ndarray):
    w, psi = np.linalg.eigh(pencil.h0 + lam_real * pencil.h1)
    weight = np.linalg.norm(plane.T @ psi, axis=0)
    a, b = np.sort(np.argsort(-weight)[:2])
    return psi[:, [a, b]], (int(a), int(b))


def chirality_decompose(pencil: MatrixPencil, ep: ExceptionalPoint, reference=None,
                        vector=None) -> Chirality:
    """Sign s and error of v ~ (psi1 + s i psi2) / sqrt(2).

    ``reference`` optionally overrides the Hermitian reference pair with two
    real vectors (r1, r2); swapping them flips the sign.
    """
    v = ep_eigenvector(pencil, ep).vector if vector is None else np.asarray(vector, complex)
    v = v / np.linalg.norm(v)
    plane = _real_plane(v)
    levels = None
    if reference is None:
        ref, levels = _reference_pair(pencil, ep.lambda_c.real, plane)
    else:
        ref = np.column_stack([np.asarray(r, dtype=float) for r in reference])
    overlap = plane.T @ ref
    u, sv, wt = np.linalg.svd(overlap)
    alignment = float(sv[-1])
    if alignment < ALIGNMENT_MIN:
        raise ReferenceMismatchError(
            f"reference pair is nearly orthogonal to the EP plane (alignment {alignment:.2e})"
        )
    # closest orthonormal pair inside the plane with the reference's orientation
    basis = plane @ (u @ wt)
    c1, c2 = basis.T @ v
    capture = float(np.hypot(abs(c1), abs(c2)))
    if capture < CAPTURE_MIN:
        raise ReferenceMismatchError(
            f"reference pair captures only {capture:.4f} of the EP eigenvector"
        )
    overlaps = {s: abs(c1 - 1j * s * c2) / np.sqrt(2) for s in (1, -1)}
    sign = max(overlaps, key=overlaps.get)
    return Chirality(sign, float(1.0 - overlaps[sign]), (complex(c1), complex(c2)),
                     basis, capture, alignment, levels)


def local_report(pencil: MatrixPencil, ep: ExceptionalPoint) -> EpEigenvector:
    """EP eigenvector with its chirality fields filled in."""
    vec = ep_eigenvector(pencil, ep)
    chi = chirality_decompose(pencil, ep, vector=vec.vector)
    return EpEigenvector(vec.vector, vec.self_orthogonality, vec.sigma_min,
                         vec.sigma_second, chi.sign, chi.error)
