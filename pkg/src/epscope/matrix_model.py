"""Matrix pencils H(lam) = H0 + lam * H1 built from spectra and Givens angles."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ParameterError


def n_angles(n: int) -> int:
    return n * (n - 1) // 2


def _as_finite_vector(name, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class PencilParams:
    """Eigenvalues of H0 (``eps``), of H1 (``omega``) and the mixing angles.

    ``angles`` are ordered by pair index (0,1), (0,2), ..., (N-2,N-1).
    """

    eps: np.ndarray
    omega: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        eps = _as_finite_vector("eps", self.eps)
        omega = _as_finite_vector("omega", self.omega)
        angles = _as_finite_vector("angles", np.atleast_1d(self.angles))
        if eps.size < 2:
            raise ParameterError("need N >= 2 levels")
        if omega.size != eps.size:
            raise ParameterError(f"eps has {eps.size} entries but omega has {omega.size}")
        if angles.size != n_angles(eps.size):
            raise ParameterError(
                f"expected {n_angles(eps.size)} angles for N={eps.size}, got {angles.size}"
            )
        for name, arr in (("eps", eps), ("omega", omega), ("angles", angles)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.eps.size

    @classmethod
    def unrotated(cls, eps, omega) -> "PencilParams":
        n = len(eps)
        return cls(eps, omega, np.zeros(n_angles(n)))


def rotation(n: int, angles) -> np.ndarray:
    """Product of Givens rotations G(0,1) G(0,2) ... G(n-2,n-1).

    For n = 2 this is [[cos, -sin], [sin, cos]]; it is the identity when all
    angles vanish.
    """
    angles = np.asarray(angles, dtype=float)
    u = np.eye(n)
    for theta, (i, j) in zip(angles, combinations(range(n), 2)):
        if theta == 0.0:
            continue
        c, s = np.cos(theta), np.sin(theta)
        # right-multiply by G(i, j): only columns i and j change
        ci, cj = u[:, i].copy(), u[:, j].copy()
        u[:, i] = c * ci + s * cj
        u[:, j] = -s * ci + c * cj
    return u


@dataclass(frozen=True)
class MatrixPencil:
    params: PencilParams
    h0: np.ndarray
    h1: np.ndarray
    u: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.params.dim

    def __call__(self, lam) -> np.ndarray:
        return evaluate(self, lam)


@dataclass(frozen=True)
class UnperturbedLine:
    slope: float
    intercept: float
    index: int

    def __call__(self, lam):
        return self.intercept + lam * self.slope


def build_pencil(params: PencilParams) -> MatrixPencil:
    if not isinstance(params, PencilParams):
        raise ParameterError("build_pencil expects PencilParams")
    n = params.dim
    u = rotation(n, params.angles)
    h0 = np.diag(params.eps)
    if not np.any(params.angles):
        h1 = np.diag(params.omega)
    else:
        h1 = (u * params.omega) @ u.T
        h1 = 0.5 * (h1 + h1.T)
    for arr in (h0, h1, u):
        arr.setflags(write=False)
    return MatrixPencil(params, h0, h1, u)


def evaluate(pencil: MatrixPencil, lam) -> np.ndarray:
    lam = complex(lam)
    if not np.isfinite(lam):
        raise ParameterError(f"non-finite lambda {lam!r}")
    if lam.imag == 0.0:
        return (pencil.h0 + lam.real * pencil.h1).astype(complex)
    return pencil.h0 + lam * pencil.h1


def ensemble_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization ``index``; order of evaluation is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_params(n_dim: int, angle_window: float, rng: np.random.Generator) -> PencilParams:
    eps = rng.uniform(-1.0, 1.0, n_dim)
    omega = rng.uniform(-1.0, 1.0, n_dim)
    angles = rng.uniform(-angle_window, angle_window, n_angles(n_dim))
    if angle_window == 0:
        angles = np.zeros_like(angles)
    return PencilParams(eps, omega, angles)


def sample_ensemble(n_dim: int, n_real: int, angle_window: float, seed: int,
                    start: int = 0) -> list[MatrixPencil]:
    """Random pencils with eps, omega ~ U[-1, 1] and angles ~ U[-w, w].

    Realization ``j`` draws from the stream ``(seed, j)``, so any slice of the
    ensemble can be regenerated on its own via ``start``.
    """
    if n_dim < 2:
        raise ParameterError("n_dim must be >= 2")
    if n_real < 1:
        raise ParameterError("n_real must be >= 1")
    if not np.isfinite(angle_window) or angle_window < 0:
        raise ParameterError("angle_window must be finite and >= 0")
    return [
        build_pencil(sample_params(n_dim, angle_window, ensemble_rng(seed, j)))
        for j in range(start, start + n_real)
    ]


def unperturbed_intersections(params: PencilParams):
    """Crossings of the lines eps_k + lam * omega_k.

    Returns ``(crossings, skipped)`` where ``crossings`` is a list of
    ``(lam, (i, k))`` with 0-based ``i < k`` and ``skipped`` counts parallel pairs.
    """
    eps, omega = params.eps, params.omega
    out = []
    skipped = 0
    for i, k in combinations(range(params.dim), 2):
        dw = omega[i] - omega[k]
        if dw == 0.0:
            skipped += 1
            continue
        out.append((float(-(eps[i] - eps[k]) / dw), (i, k)))
    return out, skipped


def asymptotic_lines(pencil: MatrixPencil) -> list[UnperturbedLine]:
    """Large-|lam| lines lam * omega_k + alpha_k with alpha_k = (U^T H0 U)_kk."""
    u = pencil.u
    alpha = np.einsum("ik,i,ik->k", u, pencil.params.eps, u)
    return [
        UnperturbedLine(float(w), float(a), k)
        for k, (w, a) in enumerate(zip(pencil.params.omega, alpha))
    ]
