"""Ensemble statistics: crossing and EP radial laws, angular isotropy, spacings."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ep_locator import ExceptionalPoint, locate_eps
from .errors import ParameterError, StatisticsError
from .matrix_model import MatrixPencil, sample_ensemble, unperturbed_intersections
from .parallel import ordered_map

KS_VERDICT = 0.05
MIN_FIT_BINS = 5
MIN_BIN_COUNT = 10
FIT_LOW_QUANTILE = 0.75
UNFOLD_DEGREE = 7
CENTER_FRACTION = 0.6


# -- distribution laws -------------------------------------------------------

def wigner_pdf(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)


def wigner_cdf(s):
    s = np.asarray(s, dtype=float)
    return -np.expm1(-0.25 * np.pi * s * s)


def poisson_cdf(s):
    return -np.expm1(-np.asarray(s, dtype=float))


def uniform_angle_cdf(a):
    return (np.asarray(a, dtype=float) + np.pi) / (2 * np.pi)


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between a sample and a continuous CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise StatisticsError("KS distance of an empty sample")
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


# -- log-binned radial densities -----------------------------------------------

@dataclass
class RadialHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray        # per unit r, per pooled sample
    density_area: np.ndarray   # per unit area of the (wedge of the) annulus
    fitted_exponent: float
    fit_stderr: float
    fit_range: tuple[float, float]
    n_total: int
    n_bins_fitted: int = 0

    def rows(self):
        for lo, hi, c, d, da in zip(self.bin_edges[:-1], self.bin_edges[1:],
                                    self.counts, self.density, self.density_area):
            yield {"edge_lo": float(lo), "edge_hi": float(hi), "count": int(c),
                   "density": float(d), "density_area": float(da)}

    def summary(self) -> dict:
        return {"fitted_exponent": self.fitted_exponent, "fit_stderr": self.fit_stderr,
                "fit_range": list(self.fit_range), "n_total": self.n_total,
                "n_in_range": int(self.counts.sum()), "n_bins_fitted": self.n_bins_fitted}


def default_fit_range(r: np.ndarray) -> tuple[float, float]:
    """One decade starting at the upper quartile of the pooled radii.

    Everything below is discarded: the finite support of the sampled spectra
    bends the density away from a power law at small radius.
    """
    lo = float(np.quantile(r, FIT_LOW_QUANTILE))
    return lo, 10.0 * lo


def radial_histogram(radii, bins: int = 12, fit_range=None,
                     wedge_width: float = 2 * np.pi) -> RadialHistogram:
    """Log-binned density of ``radii`` and its least-squares log-log slope."""
    r = np.asarray(radii, dtype=float)
    r = r[np.isfinite(r) & (r > 0)]
    if r.size < MIN_FIT_BINS * MIN_BIN_COUNT:
        raise StatisticsError(f"only {r.size} positive radii; cannot fit a power law")
    lo, hi = default_fit_range(r) if fit_range is None else map(float, fit_range)
    if not (0 < lo < hi) or np.isclose(lo, hi, rtol=1e-12):
        raise StatisticsError(f"degenerate fit range ({lo:g}, {hi:g})")
    edges = np.geomspace(lo, hi, bins + 1)
    counts, _ = np.histogram(r, edges)
    widths = np.diff(edges)
    density = counts / (widths * r.size)
    area = 0.5 * wedge_width * (edges[1:] ** 2 - edges[:-1] ** 2)
    density_area = counts / (area * r.size)
    use = counts >= MIN_BIN_COUNT
    if np.count_nonzero(use) < MIN_FIT_BINS:
        raise StatisticsError(
            f"{np.count_nonzero(use)} bins with >= {MIN_BIN_COUNT} counts; need {MIN_FIT_BINS}"
        )
    centers = np.sqrt(edges[:-1] * edges[1:])
    x, y = np.log(centers[use]), np.log(density[use])
    # Poisson errors: sigma(log count) ~ 1/sqrt(count)
    coef, cov = np.polyfit(x, y, 1, w=np.sqrt(counts[use]), cov="unscaled")
    return RadialHistogram(edges, counts, density, density_area, float(coef[0]),
                           float(np.sqrt(cov[0, 0])), (lo, hi), int(r.size),
                           int(np.count_nonzero(use)))


def pooled_intersections(pencils) -> np.ndarray:
    out = []
    for p in pencils:
        params = p.params if isinstance(p, MatrixPencil) else p
        crossings, _ = unperturbed_intersections(params)
        out.extend(abs(lam) for lam, _ in crossings)
    return np.asarray(out, dtype=float)


def intersection_distribution(pencils, bins: int = 12, fit_range=None) -> RadialHistogram:
    """Radial law of the unperturbed line crossings |lam_ik| pooled over pencils."""
    return radial_histogram(pooled_intersections(pencils), bins, fit_range)


def _angles(eps) -> np.ndarray:
    lam = np.array([ep.lambda_c if isinstance(ep, ExceptionalPoint) else complex(ep)
                    for ep in eps])
    return np.angle(lam), np.abs(lam)


def in_wedge(alpha, wedge) -> np.ndarray:
    """Mask of angles inside the counter-clockwise arc from wedge[0] to wedge[1]."""
    a0, a1 = wedge
    return np.mod(np.asarray(alpha) - a0, 2 * np.pi) < np.mod(a1 - a0, 2 * np.pi)


def ep_radial_distribution(eps, bins: int = 12, wedge=None, fit_range=None) -> RadialHistogram:
    """Radial law of |lam_c|, optionally restricted to angles in ``wedge = (a0, a1)``."""
    alpha, r = _angles(eps)
    width = 2 * np.pi
    if wedge is not None:
        r = r[in_wedge(alpha, wedge)]
        width = float(np.mod(wedge[1] - wedge[0], 2 * np.pi)) or 2 * np.pi
    if r.size and np.ptp(r) == 0:
        raise StatisticsError("all radii identical; power-law fit is degenerate")
    return radial_histogram(r, bins, fit_range, wedge_width=width)


@dataclass
class AngularReport:
    alpha_values: np.ndarray
    isotropy_stat: float
    n: int


def angular_isotropy(eps, min_samples: int = 200) -> AngularReport:
    """KS distance of the EP angles arg(lam_c) to the uniform law on (-pi, pi]."""
    alpha, _ = _angles(eps)
    if alpha.size < min_samples:
        raise StatisticsError(f"{alpha.size} EPs; need at least {min_samples}")
    return AngularReport(alpha, ks_distance(alpha, uniform_angle_cdf), int(alpha.size))


# -- nearest-neighbour spacings ---------------------------------------------------

@dataclass
class SpacingSample:
    spacings: np.ndarray
    lambda_star: float
    level_range: tuple[int, int]
    n_realizations: int = 0
    raw_mean: float = 1.0     # mean gap after unfolding, before rescaling to 1

    @property
    def mean(self) -> float:
        return float(np.mean(self.spacings))


@dataclass
class SpacingFit:
    ks_wigner: float
    ks_poisson: float
    verdict: str
    n: int

    def to_dict(self):
        return dict(self.__dict__)


def central_window(n: int, center_fraction: float) -> tuple[int, int]:
    if not 0 < center_fraction <= 1:
        raise ParameterError("center_fraction must lie in (0, 1]")
    keep = int(round(center_fraction * n))
    start = (n - keep) // 2
    return start, start + keep


UNFOLDINGS = ("ensemble", "realization")


def staircase_fit(levels, n_real: int = 1, degree: int = UNFOLD_DEGREE):
    """Polynomial fit of the counting staircase of ``levels`` per realization.

    Pooling all levels and dividing the count by ``n_real`` gives the
    ensemble-averaged staircase, which a low-degree polynomial follows without
    chasing the fluctuations of any single spectrum.
    """
    levels = np.sort(np.asarray(levels, dtype=float).ravel())
    if levels.size < 3:
        raise ParameterError("need at least 3 levels to unfold")
    deg = min(degree, levels.size - 2)
    staircase = (np.arange(levels.size) + 0.5) / n_real
    return np.polynomial.Polynomial.fit(levels, staircase, deg)


def unfold(levels: np.ndarray, degree: int = UNFOLD_DEGREE) -> np.ndarray:
    """Map the sorted levels of one spectrum through a fit of its own staircase."""
    levels = np.sort(np.asarray(levels, dtype=float))
    return staircase_fit(levels, 1, degree)(levels)


def spectra_at(pencils, lambda_star: float) -> np.ndarray:
    return np.array([np.linalg.eigvalsh(p.h0 + lambda_star * p.h1) for p in pencils])


def unfolded_spacings(pencils, lambda_star: float = 1.0,
                      center_fraction: float = CENTER_FRACTION,
                      degree: int = UNFOLD_DEGREE, unfolding: str = "ensemble") -> SpacingSample:
    """Pool unfolded nearest-neighbour gaps of H(lambda_star) over the ensemble.

    The staircase is fitted on whole spectra (``unfolding="ensemble"`` pools
    all realizations, ``"realization"`` fits each one separately); only gaps
    between levels in the central index window are kept, and the pooled
    sample is finally rescaled to unit mean.
    """
    pencils = list(pencils)
    if not pencils:
        raise ParameterError("empty ensemble")
    if unfolding not in UNFOLDINGS:
        raise ParameterError(f"unfolding must be one of {UNFOLDINGS}, got {unfolding!r}")
    spectra = spectra_at(pencils, float(lambda_star))
    n = spectra.shape[1]
    a, b = central_window(n, center_fraction)
    if b - a < 4:
        raise ParameterError(f"center_fraction keeps {b - a} levels; need at least 4")
    if unfolding == "ensemble":
        fit = staircase_fit(spectra, len(pencils), degree)
        unfolded = fit(spectra)
    else:
        unfolded = np.array([unfold(row, degree) for row in spectra])
    gaps = np.diff(unfolded[:, a:b], axis=1).ravel()
    if np.any(gaps < 0):
        raise StatisticsError("staircase fit is not monotone over the central window")
    mean = gaps.mean()
    if not mean > 0:
        raise StatisticsError("degenerate spectra: zero mean spacing")
    return SpacingSample(gaps / mean, float(lambda_star), (a, b), len(pencils), float(mean))


def fit_spacing_law(sample, min_samples: int = 1000, threshold: float = KS_VERDICT) -> SpacingFit:
    """KS distances to the Wigner surmise and to Poisson, and the verdict."""
    s = sample.spacings if isinstance(sample, SpacingSample) else np.asarray(sample, float)
    if s.size < min_samples:
        raise StatisticsError(f"{s.size} spacings; need at least {min_samples}")
    kw, kp = ks_distance(s, wigner_cdf), ks_distance(s, poisson_cdf)
    if min(kw, kp) >= threshold:
        verdict = "neither"
    else:
        verdict = "wigner" if kw < kp else "poisson"
    return SpacingFit(kw, kp, verdict, int(s.size))


# -- ensemble pipelines ----------------------------------------------------------

def _locate_one(pencil: MatrixPencil) -> list[ExceptionalPoint]:
    return list(locate_eps(pencil))


def ensemble_eps(pencils, workers: int = 1) -> list[ExceptionalPoint]:
    """Pooled EPs of all pencils, in realization order."""
    out: list[ExceptionalPoint] = []
    for eps in ordered_map(_locate_one, list(pencils), workers):
        out.extend(eps)
    return out


def expand_multiplicity(eps) -> list[complex]:
    return [ep.lambda_c for ep in eps for _ in range(ep.multiplicity)]


@dataclass
class SweepRow:
    angle_window: float
    isotropy_stat: float
    radial_exponent: float
    radial_stderr: float
    verdict: str
    ks_wigner: float
    ks_poisson: float
    n_eps: int
    n_spacings: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SweepConfig:
    spacing_dim: int = 40
    spacing_real: int = 250
    lambda_star: float = 1.0
    center_fraction: float = CENTER_FRACTION
    unfold_degree: int = UNFOLD_DEGREE
    unfolding: str = "ensemble"
    bins: int = 12
    workers: int = 1


def fan_out_sweep(n_dim: int, n_real: int, angle_windows, seed: int,
                  config: SweepConfig | None = None) -> list[SweepRow]:
    """EP isotropy, EP radial exponent and spacing verdict per mixing window.

    EP statistics come from ``n_real`` pencils of size ``n_dim``; spacings from
    a separate ``config.spacing_dim`` ensemble drawn with the same seed, since
    small matrices give too few levels per realization to unfold.
    """
    cfg = config or SweepConfig()
    windows = [float(w) for w in angle_windows]
    if any(b < a for a, b in zip(windows, windows[1:])):
        raise ParameterError("angle windows must be ascending")
    rows = []
    for w in windows:
        pencils = sample_ensemble(n_dim, n_real, w, seed)
        eps = ensemble_eps(pencils, cfg.workers)
        lam = expand_multiplicity(eps)
        iso = angular_isotropy(lam)
        try:
            hist = ep_radial_distribution(lam, cfg.bins)
            expo, err = hist.fitted_exponent, hist.fit_stderr
        except StatisticsError:
            expo, err = float("nan"), float("nan")
        big = sample_ensemble(cfg.spacing_dim, cfg.spacing_real, w, seed)
        sample = unfolded_spacings(big, cfg.lambda_star, cfg.center_fraction,
                                   cfg.unfold_degree, cfg.unfolding)
        fit = fit_spacing_law(sample)
        rows.append(SweepRow(w, iso.isotropy_stat, expo, err, fit.verdict, fit.ks_wigner,
                             fit.ks_poisson, len(lam), fit.n))
    return rows
