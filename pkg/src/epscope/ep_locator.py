"""Exceptional points of a pencil: discriminant polynomial, roots, Newton polish.

The EPs are the roots of D(lam) = prod_{i<j} (E_i(lam) - E_j(lam))**2, a
polynomial of degree N(N-1) with real coefficients. Its coefficients are
recovered by FFT from samples on a circle, its roots taken from the
companion matrix and then polished on the coupled system

    f1(E, lam) = det(E - H0 - lam H1) = 0,    f2(E, lam) = d f1 / dE = 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConditioningError,
    DegeneratePencilError,
    ParameterError,
    RefinementError,
)
from .matrix_model import MatrixPencil, evaluate, unperturbed_intersections

log = logging.getLogger(__name__)

REFINE_TOL = 1e-11
MAX_NEWTON = 50
DEDUP_RTOL = 1e-8
JAC_COND_WARN = 1e14


@dataclass(frozen=True)
class DiscriminantPoly:
    coeffs: np.ndarray  # ascending powers of lam
    dim: int
    build_radius: float
    interp_residual: float = 0.0

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.coeffs)

    def roots(self) -> np.ndarray:
        """Companion-matrix roots, computed on the circle-scaled polynomial."""
        rho = self.build_radius
        scaled = self.coeffs * rho ** np.arange(self.coeffs.size)
        nz = np.flatnonzero(scaled)
        if nz.size == 0:
            raise DegeneratePencilError("discriminant vanishes identically")
        lead = nz[-1]
        trailing = nz[0]  # roots at lam = 0
        core = scaled[trailing:lead + 1]
        mu = np.roots(core[::-1]) if core.size > 1 else np.empty(0, complex)
        return np.concatenate([np.zeros(trailing, complex), rho * mu.astype(complex)])


@dataclass(frozen=True)
class ExceptionalPoint:
    lambda_c: complex
    energy_c: complex
    residual: float
    sheet_pair: tuple[int, int] | None = None
    conjugate_partner: int | None = None
    multiplicity: int = 1
    warning: str | None = None

    @property
    def radius(self) -> float:
        return abs(self.lambda_c)

    @property
    def angle(self) -> float:
        return math.atan2(self.lambda_c.imag, self.lambda_c.real)


class LocateResult(list):
    """List of EPs plus pipeline diagnostics."""

    def __init__(self, eps=(), duplicates_collapsed=0, poly=None):
        super().__init__(eps)
        self.duplicates_collapsed = duplicates_collapsed
        self.poly = poly

    def __repr__(self):
        return f"LocateResult({list.__repr__(self)}, duplicates_collapsed={self.duplicates_collapsed})"


def spectral_scale(h: np.ndarray) -> float:
    """Spectral norm of the traceless part of ``h``.

    Shift invariant like the spectral diameter, but stays positive at an EP
    where the diameter of a 2x2 problem collapses to zero.
    """
    n = h.shape[0]
    centered = h - (np.trace(h) / n) * np.eye(n)
    return float(np.linalg.norm(centered, 2))


def pencil_scale(pencil: MatrixPencil, lam) -> float:
    """Energy scale ||H0'|| + |lam| ||H1'|| of the traceless parts.

    Bounds the spread of the spectrum of H(lam) and, unlike the local
    spread, does not collapse at a degeneracy.
    """
    s = spectral_scale(pencil.h0) + abs(complex(lam)) * spectral_scale(pencil.h1)
    return s if s > 0.0 else 1.0


def char_poly_at(pencil: MatrixPencil, lam) -> np.ndarray:
    """Monic coefficients of det(E - H(lam)) in ascending powers of E."""
    ev = np.linalg.eigvals(evaluate(pencil, lam))
    coeffs = np.poly(ev)[::-1].astype(complex)
    coeffs[-1] = 1.0
    return coeffs


def discriminant_from_eigenvalues(ev) -> complex:
    ev = np.asarray(ev)
    diff = ev[:, None] - ev[None, :]
    iu = np.triu_indices(ev.size, 1)
    return complex(np.prod(diff[iu] ** 2))


def discriminant_value(pencil: MatrixPencil, lam) -> complex:
    """D(lam) computed directly from the spectrum of H(lam)."""
    return discriminant_from_eigenvalues(np.linalg.eigvals(evaluate(pencil, lam)))


def poly_discriminant(coeffs) -> complex:
    """Discriminant of a monic polynomial given ascending coefficients."""
    return discriminant_from_eigenvalues(np.roots(np.asarray(coeffs)[::-1]))


def build_radius(pencil: MatrixPencil) -> float:
    """Geometric mean of the line-crossing magnitudes, clamped to [1e-2, 1e2].

    This equals |D(0) / leading|**(1/deg), the geometric mean of all EP radii.
    """
    crossings, _ = unperturbed_intersections(pencil.params)
    mags = np.abs([lam for lam, _ in crossings])
    mags = mags[mags > 0]
    if mags.size == 0:
        return 1.0
    return float(np.clip(np.exp(np.mean(np.log(mags))), 1e-2, 1e2))


def _pow2_at_least(n: int) -> int:
    return 1 << (n - 1).bit_length()


def discriminant_poly(pencil: MatrixPencil, radius: float | None = None,
                      check_tol: float = 1e-6) -> DiscriminantPoly:
    n = pencil.dim
    deg = n * (n - 1)
    # leading coefficient is prod (omega_i - omega_j)**2
    omega = pencil.params.omega
    gaps = np.abs(omega[:, None] - omega[None, :])[np.triu_indices(n, 1)]
    if np.min(gaps) <= 1e-12 * max(np.max(np.abs(omega)), 1e-300):
        raise DegeneratePencilError(
            "leading discriminant coefficient vanishes (repeated omega values)"
        )
    rho = build_radius(pencil) if radius is None else float(radius)
    m = _pow2_at_least(2 * (deg + 1))
    lam = rho * np.exp(2j * np.pi * np.arange(m) / m)
    h0, h1 = pencil.h0, pencil.h1
    mats = h0[None, :, :] + lam[:, None, None] * h1[None, :, :]
    ev = np.linalg.eigvals(mats)
    iu = np.triu_indices(n, 1)
    diff = ev[:, :, None] - ev[:, None, :]
    samples = np.prod(diff[:, iu[0], iu[1]] ** 2, axis=1)

    scaled = np.fft.fft(samples) / m  # coefficient k times rho**k
    peak = np.max(np.abs(scaled))
    if peak == 0.0:
        raise DegeneratePencilError("discriminant vanishes on the sampling circle")
    alias = float(np.max(np.abs(scaled[deg + 1:])) / peak) if m > deg + 1 else 0.0
    if alias > check_tol:
        raise ConditioningError(
            f"coefficients beyond degree {deg} carry {alias:.2e} of the peak "
            f"(radius {rho:.3g}); interpolation is ill-conditioned"
        )
    scaled = scaled[:deg + 1]
    # D has real coefficients; drop round-off imaginary parts
    coeffs = scaled.real / rho ** np.arange(deg + 1)
    return DiscriminantPoly(coeffs.astype(complex), n, rho, alias)


def _minimal_gap_pair(ev) -> tuple[int, int]:
    diff = np.abs(ev[:, None] - ev[None, :])
    np.fill_diagonal(diff, np.inf)
    i, j = np.unravel_index(np.argmin(diff), diff.shape)
    return (int(min(i, j)), int(max(i, j)))


def coalescing_energy(pencil: MatrixPencil, lam) -> complex:
    """Midpoint of the closest eigenvalue pair of H(lam)."""
    ev = np.linalg.eigvals(evaluate(pencil, lam))
    i, j = _minimal_gap_pair(ev)
    return complex(0.5 * (ev[i] + ev[j]))


def discriminant_logderiv(pencil: MatrixPencil, lam: np.ndarray) -> np.ndarray:
    """D'(lam) / D(lam) for an array of lam, straight from the eigensystem.

    For complex symmetric H(lam) the left eigenvectors are the transposed
    right ones, so dE_i/dlam = x_i^T H1 x_i / x_i^T x_i.
    """
    lam = np.asarray(lam, dtype=complex)
    mats = pencil.h0[None] + lam[:, None, None] * pencil.h1[None]
    ev, vec = np.linalg.eig(mats)
    num = np.einsum("kji,jl,kli->ki", vec, pencil.h1, vec)
    den = np.einsum("kji,kji->ki", vec, vec)
    dev = num / den
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = ev[:, :, None] - ev[:, None, :]
        ddiff = dev[:, :, None] - dev[:, None, :]
        ratio = ddiff / diff
    n = pencil.dim
    ratio[:, np.arange(n), np.arange(n)] = 0.0
    return np.sum(ratio, axis=(1, 2))


def aberth_roots(pencil: MatrixPencil, start: np.ndarray, rtol: float = 1e-12,
                 max_iter: int = 200) -> np.ndarray:
    """Simultaneous Aberth-Ehrlich iteration on D(lam) from starting points ``start``.

    D is never expanded: each step only needs D'/D at the current iterates.
    """
    z = np.array(start, dtype=complex)
    n = z.size
    if n == 0:
        return z
    floor = 1e-6 * max(np.median(np.abs(z)), 1e-3)
    active = np.ones(n, bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        g = discriminant_logderiv(pencil, z[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = 1.0 / g
            d = z[idx, None] - z[None, :]
            d[np.arange(idx.size), idx] = np.inf
            rep = np.sum(1.0 / d, axis=1)
            step = newton / (1.0 - newton * rep)
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        z[idx] -= step
        done = bad | (np.abs(step) <= rtol * (np.abs(z[idx]) + floor))
        active[idx[done]] = False
    return z


def _det_adj(m: np.ndarray):
    """Determinant and adjugate of a stack of square matrices via the SVD.

    Stays accurate when the matrices are singular, where det * inv fails.
    """
    u, s, vh = np.linalg.svd(m)
    phase = np.linalg.det(u) * np.linalg.det(vh)
    k = s.shape[-1]
    # product of all singular values except the i-th
    excl = np.ones_like(s)
    for i in range(k):
        excl[..., i] = np.prod(np.delete(s, i, axis=-1), axis=-1)
    det = phase * np.prod(s, axis=-1)
    adj = phase[..., None, None] * np.einsum(
        "...ji,...j,...kj->...ik", vh.conj(), excl, u.conj()
    )
    return det, adj


def _principal_minors(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    idx = np.array([np.delete(np.arange(n), i) for i in range(n)])
    return m[idx[:, :, None], idx[:, None, :]]


def ep_system(pencil: MatrixPencil, energy, lam, scale: float):
    """Scaled (f1, f2) and their Jacobian w.r.t. (E/scale, lam).

    Uses Jacobi's formula d det M = tr(adj M dM) on M and on its principal
    (N-1)-minors, whose determinants sum to tr adj M = d det M / dE.
    """
    n = pencil.dim
    m = (energy * np.eye(n) - evaluate(pencil, lam)) / scale
    h1 = pencil.h1 / scale
    det, adj = _det_adj(m)
    minors = _principal_minors(m)
    mdet, madj = _det_adj(minors)
    h1_minors = _principal_minors(h1)
    f1 = complex(det)
    f2 = complex(np.sum(mdet))
    jac = np.array([
        [np.trace(adj), -np.trace(adj @ h1)],
        [np.sum(np.trace(madj, axis1=1, axis2=2)),
         -np.sum(np.einsum("kij,kji->k", madj, h1_minors))],
    ], dtype=complex)
    return np.array([f1, f2]), jac


def refine_ep(pencil: MatrixPencil, lambda0, e0=None, tol: float = REFINE_TOL,
              max_iter: int = MAX_NEWTON) -> ExceptionalPoint:
    """Newton iteration on (E, lam) for the EP system, seeded at (e0, lambda0)."""
    lam = complex(lambda0)
    energy = coalescing_energy(pencil, lam) if e0 is None else complex(e0)
    scale = pencil_scale(pencil, lam)
    e = energy / scale
    warning = None
    residual = np.inf
    for _ in range(max_iter + 1):
        f, jac = ep_system(pencil, e * scale, lam, scale)
        residual = float(np.max(np.abs(f)))
        if residual <= tol:
            break
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        e += step[0]
        lam += step[1]
    else:
        pass
    if not residual <= tol:
        raise RefinementError(
            f"Newton did not converge from lambda0={complex(lambda0):.6g}: "
            f"residual {residual:.3e} > {tol:.1e}",
            lambda_last=lam, energy_last=e * scale, residual=residual,
        )
    cond = np.linalg.cond(jac)
    if not cond <= JAC_COND_WARN:
        warning = f"near higher-order degeneracy (Jacobian condition {cond:.2e})"
    return ExceptionalPoint(lam, coalescing_energy(pencil, lam), residual, warning=warning)


def two_level_ep(eps1, eps2, omega1, omega2, phi) -> tuple[complex, complex]:
    """Closed-form EP pair of the 2x2 pencil: -(de/dw) * exp(+-2i phi)."""
    if omega1 == omega2:
        raise ParameterError("omega1 == omega2: the 2x2 pencil has no EP")
    base = -(eps1 - eps2) / (omega1 - omega2)
    return (base * np.exp(2j * phi), base * np.exp(-2j * phi))


def _same(a: complex, b: complex, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def _link_conjugates(eps: list[ExceptionalPoint], rtol: float) -> list[ExceptionalPoint]:
    lams = np.array([ep.lambda_c for ep in eps])
    out = []
    for i, ep in enumerate(eps):
        target = ep.lambda_c.conjugate()
        d = np.abs(lams - target)
        j = int(np.argmin(d))
        partner = j if d[j] <= rtol * max(abs(target), 1e-300) else None
        out.append(replace(ep, conjugate_partner=partner))
    return out


def locate_eps(pencil: MatrixPencil, tol: float = REFINE_TOL,
               dedup_rtol: float = DEDUP_RTOL) -> LocateResult:
    """All EPs of ``pencil``, sorted by (Re lam, Im lam), conjugate partners linked."""
    poly = discriminant_poly(pencil)
    seeds = aberth_roots(pencil, poly.roots())
    refined = []
    for seed in seeds:
        refined.append(refine_ep(pencil, seed, tol=tol))

    refined.sort(key=lambda ep: (ep.lambda_c.real, ep.lambda_c.imag))
    clusters: list[list[ExceptionalPoint]] = []
    for ep in refined:
        for cl in clusters:
            if _same(cl[0].lambda_c, ep.lambda_c, dedup_rtol):
                cl.append(ep)
                break
        else:
            clusters.append([ep])
    merged = []
    for cl in clusters:
        best = min(cl, key=lambda ep: ep.residual)
        merged.append(replace(best, multiplicity=len(cl)))
    collapsed = len(refined) - len(merged)
    merged.sort(key=lambda ep: (ep.lambda_c.real, ep.lambda_c.imag))
    return LocateResult(_link_conjugates(merged, dedup_rtol), collapsed, poly)
