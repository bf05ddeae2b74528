"""Analytic continuation of eigenvalue and eigenvector branches in the lam-plane.

Branches are matched between neighbouring samples by a minimal-distance
assignment on eigenvalues; segments whose assignment is ambiguous are bisected.
Eigenvectors are carried in one of two gauges:

``analytic``
    each vector is rescaled so that its bilinear square v^T v is real and
    positive, with the sign chosen for continuity. This is the Euclidean
    normalisation of the analytically continued, v^T v = 1 normalised
    eigenvector, so loop factors come out as exact signs.
``parallel``
    each vector is rotated so that its Hermitian overlap with its
    predecessor is real and positive. Loop factors then carry a
    path-dependent geometric phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ep_locator import ExceptionalPoint, pencil_scale
from .errors import ConfigurationError, NumericalError, ParameterError, PathTooCloseError
from .matrix_model import MatrixPencil, evaluate

GAUGES = ("analytic", "parallel")
SAMPLES_PER_TURN = 64
MAX_DEPTH = 20


@dataclass(frozen=True)
class LambdaPath:
    samples: np.ndarray
    closed: bool = False

    def __post_init__(self):
        z = np.asarray(self.samples, dtype=complex).ravel()
        if z.size < 8:
            raise ParameterError("a path needs at least 8 samples")
        if not np.all(np.isfinite(z)):
            raise ParameterError("path samples must be finite")
        if np.any(z[1:] == z[:-1]) and np.ptp(z) != 0:
            raise ParameterError("consecutive path samples must be distinct")
        z.setflags(write=False)
        object.__setattr__(self, "samples", z)

    @classmethod
    def circle(cls, center, radius, turns=1, direction=1, base_angle=0.0,
               samples_per_turn=SAMPLES_PER_TURN) -> "LambdaPath":
        if direction not in (1, -1):
            raise ParameterError("direction must be +1 or -1")
        if turns < 1:
            raise ParameterError("turns must be >= 1")
        if not radius > 0:
            raise ParameterError("radius must be positive")
        m = samples_per_turn * turns
        theta = base_angle + direction * 2 * np.pi * np.arange(m) / samples_per_turn
        return cls(complex(center) + radius * np.exp(1j * theta), closed=True)

    @classmethod
    def segment(cls, start, stop, n=201) -> "LambdaPath":
        return cls(np.linspace(complex(start), complex(stop), n), closed=False)

    def points(self) -> np.ndarray:
        """Samples in traversal order, with the start repeated at the end if closed."""
        if self.closed:
            return np.append(self.samples, self.samples[0])
        return np.asarray(self.samples)


@dataclass
class SheetTrace:
    """Branches continued along a path (including inserted bisection samples)."""

    path: LambdaPath
    lambdas: np.ndarray   # (S,) all visited samples, in order
    energies: np.ndarray  # (S, N) eigenvalue of branch k at each sample
    frames: np.ndarray    # (S, N, N) frames[s, :, k] is the vector of branch k
    step_subdivisions: int = 0
    gauge: str = "analytic"

    @property
    def n_branches(self) -> int:
        return self.energies.shape[1]

    def trace_errors(self, pencil: MatrixPencil) -> np.ndarray:
        """|sum E - tr H(lam)| relative to the pencil scale, per sample."""
        tr = np.trace(pencil.h0) + self.lambdas * np.trace(pencil.h1)
        scale = np.array([pencil_scale(pencil, lam) for lam in self.lambdas])
        return np.abs(self.energies.sum(axis=1) - tr) / np.maximum(np.abs(tr), scale)

    def eigen_residuals(self, pencil: MatrixPencil) -> np.ndarray:
        """max_k ||H v_k - E_k v_k|| / scale, per sample."""
        mats = pencil.h0[None] + self.lambdas[:, None, None] * pencil.h1[None]
        hv = mats @ self.frames
        r = np.linalg.norm(hv - self.frames * self.energies[:, None, :], axis=1)
        scale = np.array([pencil_scale(pencil, lam) for lam in self.lambdas])
        return r.max(axis=1) / scale


@dataclass
class LoopReport:
    permutation: np.ndarray     # branch k ends in the slot of branch permutation[k]
    phase_factors: np.ndarray   # v_k(end) = phase_factors[k] * v_{permutation[k]}(start)
    enclosed_eps: list[int] = field(default_factory=list)
    coalescing_pair: tuple[int, int] | None = None
    warning: str | None = None
    trace: SheetTrace | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "permutation": [int(p) for p in self.permutation],
            "phase_factors": [[float(z.real), float(z.imag)] for z in self.phase_factors],
            "enclosed_eps": [int(i) for i in self.enclosed_eps],
            "coalescing_pair": None if self.coalescing_pair is None
            else [int(i) for i in self.coalescing_pair],
            "warning": self.warning,
        }


def _eig(pencil: MatrixPencil, lam):
    try:
        return np.linalg.eig(evaluate(pencil, lam))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed at lambda={lam}") from exc


def _fix_gauge(prev: np.ndarray, vecs: np.ndarray, gauge: str) -> np.ndarray:
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    if gauge == "analytic":
        sq = np.sum(vecs * vecs, axis=0)
        vecs = vecs * np.exp(-0.5j * np.angle(sq))
        flip = np.real(np.sum(prev.conj() * vecs, axis=0)) < 0
        vecs[:, flip] *= -1
    else:
        ov = np.sum(prev.conj() * vecs, axis=0)
        vecs = vecs * np.exp(-1j * np.angle(ov))
    return vecs


def _initial_frames(vecs: np.ndarray, gauge: str) -> np.ndarray:
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    if gauge == "analytic":
        sq = np.sum(vecs * vecs, axis=0)
        vecs = vecs * np.exp(-0.5j * np.angle(sq))
    # deterministic sign: largest-modulus component has positive real part
    k = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[k, np.arange(vecs.shape[1])]
    vecs[:, np.real(lead) < 0] *= -1
    return vecs


def _match(prev_e: np.ndarray, new_e: np.ndarray):
    """Optimal assignment plus an ambiguity flag."""
    cost = np.abs(prev_e[:, None] - new_e[None, :])
    rows, cols = linear_sum_assignment(cost)
    best = cost[rows, cols].sum()
    disp = cost[rows, cols]
    n = prev_e.size
    # cheapest alternative obtained by exchanging two assignments
    c = cols
    alt = np.inf
    if n > 1:
        a = cost[rows[:, None], c[None, :]]
        swap = a + a.T - disp[:, None] - disp[None, :]
        np.fill_diagonal(swap, np.inf)
        alt = best + swap.min()
    gap = np.abs(prev_e[:, None] - prev_e[None, :])
    np.fill_diagonal(gap, np.inf)
    local_gap = gap.min(axis=1)
    ambiguous = (alt < 2.0 * best) or bool(np.any(disp > 0.5 * local_gap))
    return cols, ambiguous


def track_spectrum(pencil: MatrixPencil, path: LambdaPath, gauge: str = "analytic",
                   max_depth: int = MAX_DEPTH) -> SheetTrace:
    """Continue all N branches along ``path`` with adaptive bisection.

    Branch labels are fixed at the first sample by sorting (Re E, Im E).
    """
    if gauge not in GAUGES:
        raise ParameterError(f"gauge must be one of {GAUGES}")
    pts = path.points()
    e0, v0 = _eig(pencil, pts[0])
    order = np.lexsort((e0.imag, e0.real))
    lams = [complex(pts[0])]
    energies = [e0[order]]
    frames = [_initial_frames(v0[:, order], gauge)]
    subdivisions = 0

    def advance(lam_a, lam_b, depth):
        nonlocal subdivisions
        e_b, v_b = _eig(pencil, lam_b)
        cols, ambiguous = _match(energies[-1], e_b)
        if ambiguous and lam_a != lam_b:
            if depth >= max_depth:
                raise PathTooCloseError(
                    f"branch matching unresolved after {max_depth} bisections "
                    f"between {lam_a:.6g} and {lam_b:.6g}",
                    segment=(lam_a, lam_b),
                )
            subdivisions += 1
            mid = 0.5 * (lam_a + lam_b)
            advance(lam_a, mid, depth + 1)
            advance(mid, lam_b, depth + 1)
            return
        lams.append(complex(lam_b))
        energies.append(e_b[cols])
        frames.append(_fix_gauge(frames[-1], v_b[:, cols], gauge))

    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            lams.append(complex(b))
            energies.append(energies[-1].copy())
            frames.append(frames[-1].copy())
            continue
        advance(complex(a), complex(b), 0)
    return SheetTrace(path, np.array(lams), np.array(energies), np.array(frames),
                      subdivisions, gauge)


def loop_action(trace: SheetTrace):
    """Permutation and per-branch factors of a trace that returns to its start."""
    if abs(trace.lambdas[-1] - trace.lambdas[0]) > 1e-12 * max(1.0, abs(trace.lambdas[0])):
        raise ParameterError("trace does not return to its starting point")
    e_start, e_end = trace.energies[0], trace.energies[-1]
    cost = np.abs(e_end[:, None] - e_start[None, :])
    _, perm = linear_sum_assignment(cost)
    v_start, v_end = trace.frames[0], trace.frames[-1]
    factors = np.einsum("ik,ik->k", v_start[:, perm].conj(), v_end)
    return perm, factors


def winding_number(path_points: np.ndarray, z: complex) -> int:
    """Winding number of the closed polygon ``path_points`` around ``z``."""
    w = np.asarray(path_points, dtype=complex) - z
    w = np.append(w, w[0])
    dtheta = np.angle(w[1:] / w[:-1])
    return int(np.rint(dtheta.sum() / (2 * np.pi)))


def enclosed(path: LambdaPath, eps: list[ExceptionalPoint]) -> list[int]:
    pts = np.asarray(path.samples)
    return [i for i, ep in enumerate(eps) if winding_number(pts, ep.lambda_c) != 0]


def nearest_other_distance(ep: ExceptionalPoint, eps: list[ExceptionalPoint]) -> float:
    d = [abs(o.lambda_c - ep.lambda_c) for o in eps]
    d = [x for x in d if x > 1e-8 * max(abs(ep.lambda_c), 1e-300)]
    return min(d) if d else np.inf


def default_radius(ep: ExceptionalPoint, eps: list[ExceptionalPoint] | None) -> float:
    if eps:
        d = nearest_other_distance(ep, eps)
        if np.isfinite(d):
            return 0.3 * d
    return 0.3 * max(abs(ep.lambda_c.imag), 1e-3)


def _coalescing_branches(pencil: MatrixPencil, ep: ExceptionalPoint, start: complex,
                         start_energies: np.ndarray) -> tuple[int, int]:
    """Labels, in ``start_energies`` order, of the two branches that meet at ``ep``.

    The pair is identified where it is unambiguous, right next to lam_c, and
    carried out to ``start`` along a straight ray.
    """
    lc = ep.lambda_c
    inner = lc + 1e-4 * (start - lc)
    ray = track_spectrum(pencil, LambdaPath(np.linspace(inner, start, 65)))
    e_in = ray.energies[0]
    gap = np.abs(e_in[:, None] - e_in[None, :]) + np.diag(np.full(e_in.size, np.inf))
    i, j = np.unravel_index(np.argmin(gap), gap.shape)
    cost = np.abs(ray.energies[-1][:, None] - np.asarray(start_energies)[None, :])
    _, slots = linear_sum_assignment(cost)
    a, b = sorted((int(slots[i]), int(slots[j])))
    return a, b


def loop_monodromy(pencil: MatrixPencil, ep: ExceptionalPoint, radius: float | None = None,
                   direction: int = 1, turns: int = 1, all_eps=None, base_angle: float = 0.0,
                   gauge: str = "analytic", samples_per_turn: int = SAMPLES_PER_TURN,
                   keep_trace: bool = False) -> LoopReport:
    """Encircle ``ep`` ``turns`` times and report the induced branch action.

    With ``all_eps`` the enclosed set is checked; enclosing more than the
    target EP attaches a warning rather than failing.
    """
    if radius is None:
        radius = default_radius(ep, all_eps)
    path = LambdaPath.circle(ep.lambda_c, radius, turns, direction, base_angle,
                             samples_per_turn)
    trace = track_spectrum(pencil, path, gauge=gauge)
    perm, factors = loop_action(trace)
    inside: list[int] = []
    warning = None
    if all_eps is not None:
        inside = enclosed(path, list(all_eps))
        if len(inside) > 1:
            warning = f"loop encloses {len(inside)} EPs: {inside}"
    pair = _coalescing_branches(pencil, ep, path.samples[0], trace.energies[0])
    return LoopReport(perm, factors, inside, pair, warning, trace if keep_trace else None)


def compose(first: LoopReport, second: LoopReport):
    """Action of traversing ``first`` then ``second`` (same base point)."""
    p1, f1 = first.permutation, first.phase_factors
    p2, f2 = second.permutation, second.phase_factors
    return p2[p1], f1 * f2[p1]


@dataclass
class PathCrossings:
    real_part_crosses: bool
    imag_part_crosses: bool
    n_real_sign_changes: int
    n_imag_sign_changes: int

    def to_dict(self):
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else int(v))
                for k, v in self.__dict__.items()}


@dataclass
class CrossingReport:
    above: PathCrossings
    below: PathCrossings
    offset: float
    half_span: float
    coalescing_pair: tuple[int, int]

    @property
    def dichotomy(self) -> bool:
        """One path crosses only in Re, the other only in Im."""
        a, b = self.above, self.below
        one = a.real_part_crosses and not a.imag_part_crosses
        other = b.imag_part_crosses and not b.real_part_crosses
        one_r = b.real_part_crosses and not b.imag_part_crosses
        other_r = a.imag_part_crosses and not a.real_part_crosses
        return (one and other) or (one_r and other_r)

    def to_dict(self):
        return {"above": self.above.to_dict(), "below": self.below.to_dict(),
                "offset": self.offset, "half_span": self.half_span,
                "coalescing_pair": list(self.coalescing_pair),
                "dichotomy": self.dichotomy}


def _sign_changes(x: np.ndarray) -> int:
    s = np.sign(x)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _scan_path(pencil, ep, im, half_span, n_samples):
    re = ep.lambda_c.real
    path = LambdaPath.segment(complex(re - half_span, im), complex(re + half_span, im), n_samples)
    trace = track_spectrum(pencil, path)
    mid = int(np.argmin(np.abs(trace.lambdas - complex(re, im))))
    a, b = _coalescing_branches(pencil, ep, trace.lambdas[mid], trace.energies[mid])
    diff = trace.energies[:, a] - trace.energies[:, b]
    nr, ni = _sign_changes(diff.real), _sign_changes(diff.imag)
    return PathCrossings(nr > 0, ni > 0, nr, ni), (a, b)


def _rectangle_clear(ep, all_eps, half_span, offset) -> bool:
    c = ep.lambda_c
    for other in all_eps:
        z = other.lambda_c
        if abs(z - c) <= 1e-8 * max(abs(c), 1e-300):
            continue
        if abs(z.real - c.real) <= half_span and abs(z.imag - c.imag) <= offset:
            return False
    return True


def crossing_scan(pencil: MatrixPencil, ep: ExceptionalPoint, offset: float,
                  all_eps=None, span_factor: float = 5.0,
                  n_samples: int = 201) -> CrossingReport:
    """Follow the coalescing pair along Im lam = Im lam_c +- offset.

    Each segment spans Re lam_c +- span_factor * offset; the report says, per
    path, whether Re(E_a - E_b) and Im(E_a - E_b) change sign.
    """
    lc = ep.lambda_c
    if not (0 < offset < abs(lc.imag)):
        raise ConfigurationError(
            f"offset {offset:g} must lie in (0, |Im lambda_c| = {abs(lc.imag):g})"
        )
    half_span = span_factor * offset
    if all_eps is not None and not _rectangle_clear(ep, all_eps, half_span, offset):
        raise ConfigurationError("another EP lies inside the scan rectangle")
    upper, pair = _scan_path(pencil, ep, lc.imag + offset, half_span, n_samples)
    lower, _ = _scan_path(pencil, ep, lc.imag - offset, half_span, n_samples)
    return CrossingReport(upper, lower, float(offset), float(half_span), pair)


def conjugate_is_nearest(ep: ExceptionalPoint, eps) -> bool:
    """True when the closest other EP is the conjugate image of ``ep``.

    This is the avoided-crossing geometry: a conjugate pair split off the
    real axis with no third EP closer than its partner.
    """
    if ep.lambda_c.imag == 0:
        return False
    return nearest_other_distance(ep, eps) >= 2 * abs(ep.lambda_c.imag) * (1 - 1e-9)
