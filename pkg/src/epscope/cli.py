"""Command-line front end: ``epscope <command> [flags] [--config file.json]``.

Every flag is a config-file key with dashes for underscores; flags override the
file. Outputs go to ``--out`` (else $EPSCOPE_OUT, else the file's ``out``,
else ./epscope_out) and each artifact carries the resolved configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import MISSING, asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .ep_local import local_report, phase_rigidity
from .ep_locator import DEDUP_RTOL, REFINE_TOL, ExceptionalPoint, locate_eps
from .errors import ConfigurationError, EpscopeError, ParameterError
from .matrix_model import (
    PencilParams,
    asymptotic_lines,
    build_pencil,
    sample_ensemble,
    unperturbed_intersections,
)
from .monodromy import GAUGES, SAMPLES_PER_TURN, crossing_scan, loop_monodromy
from .parallel import default_workers
from .spectral_stats import (
    CENTER_FRACTION,
    UNFOLD_DEGREE,
    UNFOLDINGS,
    SweepConfig,
    angular_isotropy,
    ensemble_eps,
    ep_radial_distribution,
    expand_multiplicity,
    fan_out_sweep,
    fit_spacing_law,
    intersection_distribution,
    unfolded_spacings,
)

SCHEMA_VERSION = 1
DEFAULT_OUT = "epscope_out"
EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3

# keys that describe how a run executes rather than what it computes; they are
# left out of the embedded provenance so outputs do not depend on them
_RUNTIME_KEYS = ("out", "workers")

EP_COLUMNS = ["re_lambda", "im_lambda", "re_energy", "im_energy", "residual", "conj_index"]
LOCAL_COLUMNS = EP_COLUMNS + ["self_orthogonality", "rigidity", "chirality_sign",
                              "decomposition_error"]
HIST_COLUMNS = ["edge_lo", "edge_hi", "count", "density"]


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


def _opt(conv):
    def parse(value):
        return None if value is None or str(value).lower() == "none" else conv(value)
    return parse


def _key(conv, help_text, default=None, **kw):
    return field(default=default, metadata={"conv": conv, "help": help_text, **kw})


@dataclass
class CommonConfig:
    schema_version: int = _key(int, "config schema version", SCHEMA_VERSION)
    out: str | None = _key(_opt(str), "output directory")
    workers: int | None = _key(_opt(int), "worker processes (default: all CPUs)")


@dataclass
class PencilConfig(CommonConfig):
    dim: int | None = _key(_opt(int), "matrix size N (inferred from --eps when given)")
    eps: list[float] | None = _key(_opt(_floats), "eigenvalues of H0, comma separated")
    omega: list[float] | None = _key(_opt(_floats), "eigenvalues of H1, comma separated")
    angles: list[float] | None = _key(_opt(_floats), "N(N-1)/2 rotation angles (default 0)")
    seed: int | None = _key(_opt(int), "seed for a random pencil when --eps is absent")
    angle_window: float = _key(float, "random angles drawn from [-w, w]", math.pi)
    index: int = _key(int, "realization index within the seeded ensemble", 0)


@dataclass
class LocateConfig(PencilConfig):
    tol: float = _key(float, "scaled residual tolerance of the EP refinement", REFINE_TOL)
    dedup_rtol: float = _key(float, "relative distance below which EPs merge", DEDUP_RTOL)


@dataclass
class LoopConfig(LocateConfig):
    ep_index: int = _key(int, "row of the located-EP table to encircle", 0)
    turns: int = _key(int, "number of loops", 1)
    direction: int = _key(int, "+1 counter-clockwise, -1 clockwise", 1)
    radius: float | None = _key(_opt(float), "loop radius (default 0.3 x nearest EP distance)")
    gauge: str = _key(str, f"eigenvector gauge, one of {GAUGES}", "analytic")
    samples_per_turn: int = _key(int, "base samples per loop", SAMPLES_PER_TURN)
    write_trace: bool = _key(_bool, "also write the continued branches as CSV", False)


@dataclass
class CrossingConfig(LocateConfig):
    ep_index: int = _key(int, "row of the located-EP table to scan", 0)
    offset: float | None = _key(_opt(float), "path offset from Im lam_c (default |Im lam_c|/4)")
    span_factor: float = _key(float, "half length of each path in units of offset", 5.0)
    n_samples: int = _key(int, "base samples per path", 201)


@dataclass
class LocalConfig(LocateConfig):
    pass


@dataclass
class EnsembleConfig(CommonConfig):
    dim: int = _key(int, "matrix size of the EP ensemble", 12)
    realizations: int = _key(int, "pencils in the EP ensemble", 100)
    seed: int | None = _key(_opt(int), "ensemble seed (required)")
    bins: int = _key(int, "log-spaced radial bins", 12)
    spacing_dim: int = _key(int, "matrix size of the spacing ensemble", 40)
    spacing_realizations: int = _key(int, "pencils in the spacing ensemble", 250)
    lambda_star: float = _key(float, "real lambda at which spectra are taken", 1.0)
    center_fraction: float = _key(float, "central share of each spectrum kept", CENTER_FRACTION)
    unfold_degree: int = _key(int, "degree of the staircase fit", UNFOLD_DEGREE)
    unfolding: str = _key(str, f"staircase fit, one of {UNFOLDINGS}", "ensemble")


@dataclass
class StatsConfig(EnsembleConfig):
    angle_window: float = _key(float, "random angles drawn from [-w, w]", math.pi)
    wedge: list[float] | None = _key(_opt(_floats), "restrict the EP radial law to angles a0,a1")


@dataclass
class SweepCliConfig(EnsembleConfig):
    windows: list[float] = _key(_floats, "ascending angle windows",
                                (0.0, 0.01, 0.05, 0.3, math.pi))


# -- config resolution ------------------------------------------------------------

def _config_keys(cls) -> dict:
    return {f.name: f for f in fields(cls)}


def _add_flags(parser: argparse.ArgumentParser, cls) -> None:
    for f in fields(cls):
        # SUPPRESS keeps untouched flags out of the namespace so the file wins
        parser.add_argument("--" + f.name.replace("_", "-"), dest=f.name,
                            default=argparse.SUPPRESS, help=f.metadata["help"])
    parser.add_argument("--config", dest="_config", default=None,
                        help="JSON file with any of the keys above")


def resolve_config(cls, file_values: dict, flag_values: dict, env=None):
    keys = _config_keys(cls)
    unknown = sorted(set(file_values) - set(keys))
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    merged = {}
    for name, f in keys.items():
        if name in flag_values:
            raw = flag_values[name]
        elif name in file_values:
            raw = file_values[name]
        else:
            default = f.default if f.default is not MISSING else None
            raw = list(default) if isinstance(default, tuple) else default
        try:
            merged[name] = f.metadata["conv"](raw) if raw is not None else None
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"bad value for {name}: {raw!r}") from exc
    env = os.environ if env is None else env
    if "out" not in flag_values and env.get("EPSCOPE_OUT"):
        merged["out"] = env["EPSCOPE_OUT"]
    if merged["out"] is None:
        merged["out"] = DEFAULT_OUT
    if merged["workers"] is None:
        merged["workers"] = default_workers()
    cfg = cls(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg) -> None:
    if cfg.schema_version != SCHEMA_VERSION:
        raise ParameterError(
            f"schema_version {cfg.schema_version} unsupported (expected {SCHEMA_VERSION})"
        )
    if cfg.workers < 1:
        raise ParameterError("workers must be >= 1")
    for name in ("tol", "dedup_rtol", "span_factor", "center_fraction"):
        value = getattr(cfg, name, None)
        if value is not None and not value > 0:
            raise ParameterError(f"{name} must be positive")
    for name in ("radius", "offset"):
        value = getattr(cfg, name, None)
        if value is not None and not value > 0:
            raise ParameterError(f"{name} must be positive")
    if isinstance(cfg, LoopConfig):
        if cfg.turns < 1:
            raise ParameterError("turns must be >= 1")
        if cfg.direction not in (1, -1):
            raise ParameterError("direction must be +1 or -1")
        if cfg.gauge not in GAUGES:
            raise ParameterError(f"gauge must be one of {GAUGES}")
    if isinstance(cfg, PencilConfig) and cfg.eps is None and cfg.seed is None:
        raise ParameterError("give --eps/--omega or a --seed for a random pencil")
    if isinstance(cfg, EnsembleConfig):
        if cfg.seed is None:
            raise ParameterError("stochastic command needs --seed")
        if cfg.unfolding not in UNFOLDINGS:
            raise ParameterError(f"unfolding must be one of {UNFOLDINGS}")
        for name in ("dim", "realizations", "spacing_dim", "spacing_realizations", "bins"):
            if getattr(cfg, name) < 1:
                raise ParameterError(f"{name} must be >= 1")


def provenance(command: str, cfg) -> dict:
    data = {k: v for k, v in asdict(cfg).items() if k not in _RUNTIME_KEYS}
    return {"command": command, "epscope_version": __version__, **data}


# -- output helpers ---------------------------------------------------------------

class Writer:
    def __init__(self, command: str, cfg):
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.meta = provenance(command, cfg)
        self.written: list[Path] = []

    def _report(self, path: Path, note: str) -> None:
        self.written.append(path)
        print(f"wrote {path} ({note})")

    def json(self, name: str, payload: dict, note: str) -> Path:
        path = self.dir / name
        text = json.dumps({"config": self.meta, **payload}, indent=2, allow_nan=True)
        path.write_text(text + "\n", encoding="utf-8")
        self._report(path, note)
        return path

    def csv(self, name: str, columns: list[str], rows, note: str) -> Path:
        path = self.dir / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(columns)
            n = 0
            for row in rows:
                out.writerow([_cell(row[c]) for c in columns])
                n += 1
        side = path.with_suffix(path.suffix + ".config.json")
        side.write_text(json.dumps(self.meta, indent=2) + "\n", encoding="utf-8")
        self._report(path, f"{n} rows; {note}" if note else f"{n} rows")
        return path


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _ep_row(ep: ExceptionalPoint) -> dict:
    return {
        "re_lambda": ep.lambda_c.real, "im_lambda": ep.lambda_c.imag,
        "re_energy": ep.energy_c.real, "im_energy": ep.energy_c.imag,
        "residual": ep.residual,
        "conj_index": -1 if ep.conjugate_partner is None else ep.conjugate_partner,
    }


def _complex_list(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


# -- commands ---------------------------------------------------------------------

def _pencil(cfg: PencilConfig):
    if cfg.eps is not None:
        if cfg.omega is None:
            raise ParameterError("--eps needs --omega")
        n = len(cfg.eps)
        if cfg.dim is not None and cfg.dim != n:
            raise ParameterError(f"--dim {cfg.dim} disagrees with {n} eps values")
        angles = cfg.angles if cfg.angles is not None else [0.0] * (n * (n - 1) // 2)
        return build_pencil(PencilParams(cfg.eps, cfg.omega, angles))
    if cfg.dim is None:
        raise ParameterError("random pencil needs --dim")
    if cfg.index < 0:
        raise ParameterError("index must be >= 0")
    return sample_ensemble(cfg.dim, 1, cfg.angle_window, cfg.seed, start=cfg.index)[0]


def _located(cfg: LocateConfig):
    pencil = _pencil(cfg)
    return pencil, locate_eps(pencil, cfg.tol, cfg.dedup_rtol)


def _pick(eps, index: int) -> ExceptionalPoint:
    if not 0 <= index < len(eps):
        raise ParameterError(f"ep_index {index} out of range for {len(eps)} EPs")
    return eps[index]


def cmd_pencil(cfg: PencilConfig, w: Writer) -> None:
    p = _pencil(cfg)
    crossings, skipped = unperturbed_intersections(p.params)
    w.json("pencil.json", {
        "eps": p.params.eps.tolist(), "omega": p.params.omega.tolist(),
        "angles": p.params.angles.tolist(), "h0": p.h0.tolist(), "h1": p.h1.tolist(),
        "rotation": p.u.tolist(),
        "asymptotic_lines": [{"index": l.index, "slope": l.slope, "intercept": l.intercept}
                             for l in asymptotic_lines(p)],
        "line_intersections": [{"lambda": lam, "pair": list(pair)} for lam, pair in crossings],
        "parallel_pairs_skipped": skipped,
    }, f"N={p.dim}")


def cmd_locate(cfg: LocateConfig, w: Writer) -> None:
    pencil, eps = _located(cfg)
    w.csv("eps.csv", EP_COLUMNS, (_ep_row(e) for e in eps), f"expected {pencil.dim * (pencil.dim - 1)}")
    w.json("locate.json", {
        "n_eps": len(eps), "expected": pencil.dim * (pencil.dim - 1),
        "duplicates_collapsed": eps.duplicates_collapsed,
        "max_residual": max((e.residual for e in eps), default=0.0),
        "warnings": [e.warning for e in eps if e.warning],
    }, f"{len(eps)} EPs")


def cmd_loop(cfg: LoopConfig, w: Writer) -> None:
    pencil, eps = _located(cfg)
    ep = _pick(eps, cfg.ep_index)
    rep = loop_monodromy(pencil, ep, cfg.radius, cfg.direction, cfg.turns, all_eps=list(eps),
                         gauge=cfg.gauge, samples_per_turn=cfg.samples_per_turn,
                         keep_trace=True)
    trace = rep.trace
    w.json("loop.json", {
        "ep": _ep_row(ep), **rep.to_dict(),
        "max_trace_error": float(np.max(trace.trace_errors(pencil))),
        "max_eigen_residual": float(np.max(trace.eigen_residuals(pencil))),
        "step_subdivisions": int(trace.step_subdivisions),
    }, "identity" if np.array_equal(rep.permutation, np.arange(pencil.dim)) else "permuted")
    if cfg.write_trace:
        cols = ["step", "re_lambda", "im_lambda"]
        for k in range(pencil.dim):
            cols += [f"re_e{k}", f"im_e{k}"]

        def rows():
            for s, (lam, e) in enumerate(zip(trace.lambdas, trace.energies)):
                row = {"step": s, "re_lambda": lam.real, "im_lambda": lam.imag}
                for k, z in enumerate(e):
                    row[f"re_e{k}"], row[f"im_e{k}"] = z.real, z.imag
                yield row
        w.csv("trace.csv", cols, rows(), "")


def cmd_crossing(cfg: CrossingConfig, w: Writer) -> None:
    pencil, eps = _located(cfg)
    ep = _pick(eps, cfg.ep_index)
    if ep.lambda_c.imag == 0:
        raise ConfigurationError("crossing scan needs an EP off the real axis")
    offset = cfg.offset if cfg.offset is not None else abs(ep.lambda_c.imag) / 4
    rep = crossing_scan(pencil, ep, offset, all_eps=list(eps), span_factor=cfg.span_factor,
                        n_samples=cfg.n_samples)
    w.json("crossing.json", {"ep": _ep_row(ep), **rep.to_dict()},
           "dichotomy holds" if rep.dichotomy else "dichotomy fails")


def cmd_local(cfg: LocalConfig, w: Writer) -> None:
    pencil, eps = _located(cfg)

    def rows():
        for ep in eps:
            rep = local_report(pencil, ep)
            yield {**_ep_row(ep), "self_orthogonality": rep.self_orthogonality,
                   "rigidity": phase_rigidity(rep.vector), "chirality_sign": rep.chirality_sign,
                   "decomposition_error": rep.decomposition_error}
    w.csv("local.csv", LOCAL_COLUMNS, rows(), "")


def _hist_rows(hist):
    for row in hist.rows():
        yield {c: row[c] for c in HIST_COLUMNS}


def cmd_stats(cfg: StatsConfig, w: Writer) -> None:
    pencils = sample_ensemble(cfg.dim, cfg.realizations, cfg.angle_window, cfg.seed)
    lam = expand_multiplicity(ensemble_eps(pencils, cfg.workers))
    wedge = tuple(cfg.wedge) if cfg.wedge is not None else None
    if wedge is not None and len(wedge) != 2:
        raise ParameterError("wedge needs two angles a0,a1")
    ep_hist = ep_radial_distribution(lam, cfg.bins, wedge)
    x_hist = intersection_distribution(pencils, cfg.bins)
    iso = angular_isotropy(lam)
    big = sample_ensemble(cfg.spacing_dim, cfg.spacing_realizations, cfg.angle_window, cfg.seed)
    sample = unfolded_spacings(big, cfg.lambda_star, cfg.center_fraction, cfg.unfold_degree,
                               cfg.unfolding)
    fit = fit_spacing_law(sample)
    w.csv("ep_radial.csv", HIST_COLUMNS, _hist_rows(ep_hist),
          f"exponent {ep_hist.fitted_exponent:.3f}")
    w.csv("intersections.csv", HIST_COLUMNS, _hist_rows(x_hist),
          f"exponent {x_hist.fitted_exponent:.3f}")
    w.csv("spacings.csv", ["spacing"], ({"spacing": s} for s in sample.spacings),
          f"verdict {fit.verdict}")
    w.json("stats.json", {
        "ep_radial": ep_hist.summary(), "intersections": x_hist.summary(),
        "isotropy_stat": iso.isotropy_stat, "n_eps": iso.n,
        "spacing": {**fit.to_dict(), "raw_mean": sample.raw_mean,
                    "level_range": list(sample.level_range)},
    }, f"isotropy {iso.isotropy_stat:.3f}, verdict {fit.verdict}")


def cmd_sweep(cfg: SweepCliConfig, w: Writer) -> None:
    sc = SweepConfig(cfg.spacing_dim, cfg.spacing_realizations, cfg.lambda_star,
                     cfg.center_fraction, cfg.unfold_degree, cfg.unfolding, cfg.bins,
                     cfg.workers)
    rows = fan_out_sweep(cfg.dim, cfg.realizations, cfg.windows, cfg.seed, sc)
    table = [r.to_dict() for r in rows]
    w.csv("sweep.csv", list(table[0]), table, "")
    w.json("sweep.json", {"rows": table}, f"{len(rows)} windows")


COMMANDS = {
    "pencil": (PencilConfig, cmd_pencil, "build one pencil and its line skeleton"),
    "locate": (LocateConfig, cmd_locate, "find all EPs of one pencil"),
    "loop": (LoopConfig, cmd_loop, "encircle one EP and report the branch action"),
    "crossing": (CrossingConfig, cmd_crossing, "energy/width crossings beside one EP"),
    "local": (LocalConfig, cmd_local, "EP eigenvectors: rigidity and chirality"),
    "stats": (StatsConfig, cmd_stats, "radial laws, isotropy and spacings of an ensemble"),
    "sweep": (SweepCliConfig, cmd_sweep, "statistics across growing angle windows"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epscope", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (cls, _, help_text) in COMMANDS.items():
        _add_flags(sub.add_parser(name, help=help_text), cls)
    return parser


def _load_file(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("config file must hold a JSON object")
    return data


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARAM
    cls, fn, _ = COMMANDS[ns.command]
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "_config")}
    try:
        cfg = resolve_config(cls, _load_file(ns._config), flags)
        fn(cfg, Writer(ns.command, cfg))
    except (ParameterError, ConfigurationError) as exc:
        print(f"epscope {ns.command}: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except EpscopeError as exc:
        print(f"epscope {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
