"""Seeded Monte Carlo campaigns and their CSV reports.

A campaign is described by a :class:`ExperimentConfig` (usually read from a
``key=value`` file) and runs ``trials`` independent Kostlan samples.  Trial
``i`` draws every random number from streams keyed by ``(seed, i)``, so the
outcome of a trial does not depend on which worker ran it or in what order.

Configuration keys
------------------
``kind``
    ``curve_zero_count``, ``surface_components``, ``surface_crit``, ``tail``
    or ``rotation_invariance``.
``n``, ``d``, ``trials``, ``seed``
    Ambient dimension, degree, number of trials, master seed.
``gamma.*``
    Curve or surface descriptor (see :mod:`defzeros.geometry`).
``f.c``
    Height direction for ``surface_crit``.
``t_list``
    Comma-separated tail thresholds ``t`` (counts ``>= t d^{n-1}``).
``resolution``
    Curve grid points per unit FS length, or surface cells per face side.
``workers``
    Worker processes (default 1).

Output files
------------
``trials.csv``
    ``trial_index, mode, count, min_margin, resolution_stable`` plus
    ``components`` and ``morse_ok`` for ``surface_crit`` and ``campaign``
    for ``rotation_invariance``.
``summary.csv``
    One row per campaign with the columns of :data:`SUMMARY_FIELDS`.
``survival.csv``
    Only for ``tail``: ``t, threshold, survival, markov, violation``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ChartOverflow, InvalidArgument, ResolutionFailure
from .geometry import (MorseFunctionSpec, curve_from_descriptor, fs_area, fs_length,
                       haar_rotation, rotate, surface_from_descriptor)
from .intersect import (CSV_FIELDS, count_zeros_on_curve, critical_points_on_surface,
                        trace_components_on_surface)
from .io import parse_key_values, write_csv
from .poly import sample_kostlan
from .predict import betti_mean_bound, kac_rice_crit_expectation, markov_tail_bound

log = logging.getLogger(__name__)

KINDS = ("curve_zero_count", "surface_components", "surface_crit", "tail", "rotation_invariance")
MIN_STABLE_FRACTION = 0.99
SUMMARY_FIELDS = ("campaign", "kind", "n", "d", "trials", "stable_trials", "stable_fraction",
                  "mean", "sample_std", "std_error", "min", "max", "gamma_volume", "prediction")
SURVIVAL_FIELDS = ("t", "threshold", "survival", "markov", "violation")
MAX_ROTATION_RETRIES = 10


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    d: int
    trials: int
    seed: int
    gamma: dict
    f: tuple | None = None
    t_list: tuple = ()
    resolution: float | None = None
    workers: int = 1
    base_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.trials < 1:
            raise InvalidArgument("trials must be >= 1")
        if self.d < 1:
            raise InvalidArgument("d must be >= 1")
        if self.n not in (2, 3):
            raise InvalidArgument("campaigns support n=2 (curves) and n=3 (surfaces)")
        if not self.gamma:
            raise InvalidArgument("missing gamma.* descriptor")
        if self.kind in ("surface_components", "surface_crit") and self.n != 3:
            raise InvalidArgument(f"{self.kind} needs n=3")
        if self.kind in ("curve_zero_count", "rotation_invariance") and self.n != 2:
            raise InvalidArgument(f"{self.kind} needs n=2")
        if self.kind == "surface_crit" and self.f is None:
            raise InvalidArgument("surface_crit needs f.c")
        if self.kind == "tail" and not self.t_list:
            raise InvalidArgument("tail needs t_list")
        if any(not t > 0 for t in self.t_list):
            raise InvalidArgument("tail thresholds must be positive")
        if self.workers < 1:
            raise InvalidArgument("workers must be >= 1")

    @classmethod
    def from_mapping(cls, kv, base_dir=None):
        """Build from parsed ``key=value`` pairs (all values strings)."""
        kv = dict(kv)
        required = ("kind", "n", "d", "trials", "seed")
        missing = [k for k in required if k not in kv]
        if missing:
            raise InvalidArgument(f"missing keys: {', '.join(missing)}")
        gamma = {k[len("gamma."):]: v for k, v in kv.items() if k.startswith("gamma.")}
        f = None
        if "f.c" in kv:
            f = tuple(float(v) for v in kv["f.c"].split(","))
        known = set(required) | {"t_list", "resolution", "workers", "f.c"}
        unknown = [k for k in kv if k not in known and not k.startswith("gamma.")]
        if unknown:
            raise InvalidArgument(f"unknown keys: {', '.join(sorted(unknown))}")
        return cls(
            kind=kv["kind"], n=int(kv["n"]), d=int(kv["d"]), trials=int(kv["trials"]),
            seed=int(kv["seed"], 0), gamma=gamma, f=f,
            t_list=tuple(float(v) for v in kv.get("t_list", "").split(",") if v.strip()),
            resolution=float(kv["resolution"]) if "resolution" in kv else None,
            workers=int(kv.get("workers", 1)),
            base_dir=None if base_dir is None else str(base_dir),
        )

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        return cls.from_mapping(parse_key_values(path.read_text()), base_dir=path.parent)


@dataclass
class SummaryStats:
    mean: float
    sample_std: float
    std_error: float
    min: float
    max: float
    stable_fraction: float
    trials: int
    stable_trials: int
    survival: dict = field(default_factory=dict)
    markov: dict = field(default_factory=dict)
    gamma_volume: float = math.nan
    prediction: float = math.nan

    def csv_row(self, campaign, config):
        return {"campaign": campaign, "kind": config.kind, "n": config.n, "d": config.d,
                "trials": self.trials, "stable_trials": self.stable_trials,
                "stable_fraction": self.stable_fraction, "mean": self.mean,
                "sample_std": self.sample_std, "std_error": self.std_error,
                "min": self.min, "max": self.max, "gamma_volume": self.gamma_volume,
                "prediction": self.prediction}


@dataclass
class CampaignResult:
    config: ExperimentConfig
    summary: SummaryStats
    rows: list
    counts: np.ndarray
    stable: np.ndarray


# ---------------------------------------------------------------------------
# geometry and per-trial work

def _uses_surface(config):
    return config.n == 3


def build_geometry(config):
    """The curve or surface named by ``config.gamma``."""
    if _uses_surface(config):
        return surface_from_descriptor(config.gamma)
    return curve_from_descriptor(config.gamma, config.base_dir)


def geometry_volume(obj, n):
    return fs_area(obj) if n == 3 else fs_length(obj)


def run_trial(config, geometry, trial_index):
    """Run one trial and return its CSV row (a dict)."""
    p = sample_kostlan(config.n, config.d, config.seed, trial_index).poly
    jitter = config.seed ^ (trial_index + 1)
    if config.n == 2:
        rep = count_zeros_on_curve(p, geometry, config.resolution, jitter_seed=jitter)
        return rep.csv_row(trial_index)
    grid = None if config.resolution is None else int(config.resolution)
    if config.kind == "surface_crit":
        crit, comp = critical_points_on_surface(p, geometry, MorseFunctionSpec(config.f), grid,
                                                jitter_seed=jitter, with_components=True)
        row = crit.csv_row(trial_index)
        row["resolution_stable"] = bool(crit.resolution_stable and comp.resolution_stable)
        row["components"] = comp.count
        row["morse_ok"] = bool(crit.count >= 2 * comp.count)
        return row
    rep = trace_components_on_surface(p, geometry, grid, jitter_seed=jitter)
    return rep.csv_row(trial_index)


def _run_chunk(args):
    config, indices = args
    geometry = build_geometry(config)
    return [run_trial(config, geometry, i) for i in indices]


def _execute(config, geometry=None):
    """All trial rows, ordered by trial index, independent of the worker count."""
    indices = list(range(config.trials))
    if config.workers == 1:
        geometry = build_geometry(config) if geometry is None else geometry
        return [run_trial(config, geometry, i) for i in indices]
    chunks = [indices[w::config.workers] for w in range(config.workers)]
    with ProcessPoolExecutor(max_workers=config.workers) as ex:
        parts = list(ex.map(_run_chunk, [(config, c) for c in chunks]))
    rows = [r for part in parts for r in part]
    rows.sort(key=lambda r: r["trial_index"])
    return rows


# ---------------------------------------------------------------------------
# statistics

def summarize(counts, stable, config=None, gamma_volume=math.nan, prediction=math.nan):
    """Summary over stable trials; fails when fewer than 99% are stable."""
    counts = np.asarray(counts, dtype=np.float64)
    stable = np.asarray(stable, dtype=bool)
    frac = float(stable.mean())
    if frac < MIN_STABLE_FRACTION:
        raise ResolutionFailure(
            f"only {frac:.1%} of trials are resolution-stable; raise the resolution")
    x = counts[stable]
    mean = float(np.sum(x)) / x.size
    std = math.sqrt(float(np.sum((x - mean) ** 2)) / (x.size - 1)) if x.size > 1 else math.nan
    se = std / math.sqrt(x.size) if x.size > 1 else math.nan
    s = SummaryStats(mean, std, se, float(x.min()), float(x.max()), frac, int(counts.size),
                     int(x.size), gamma_volume=gamma_volume, prediction=prediction)
    if config is not None and config.t_list:
        s.survival, s.markov = empirical_tail_table(x, config)
    return s


def empirical_tail_table(counts, config):
    """Empirical survival ``P(count >= t d^{n-1})`` and the Markov bound per ``t``."""
    counts = np.asarray(counts, dtype=np.float64)
    mean = float(np.sum(counts)) / counts.size
    c_gamma = mean / config.d ** ((config.n - 1) / 2)
    survival, markov = {}, {}
    for t in sorted(config.t_list):
        threshold = t * config.d ** (config.n - 1)
        survival[t] = float(np.count_nonzero(counts >= threshold - 1e-9)) / counts.size
        markov[t] = markov_tail_bound(t, config.d, config.n, c_gamma) if c_gamma > 0 else 0.0
    return survival, markov


def _prediction(config, volume):
    if config.kind in ("curve_zero_count", "rotation_invariance") or (
            config.kind == "tail" and config.n == 2):
        return kac_rice_crit_expectation(2, config.d, volume).value
    if config.kind == "surface_crit":
        return kac_rice_crit_expectation(3, config.d, volume).value
    return betti_mean_bound(3, 0, config.d, volume).value


def run_campaign(config, geometry=None, volume=None):
    """Run every trial of ``config`` and summarize.

    Returns
    -------
    CampaignResult

    Raises
    ------
    ResolutionFailure
        If fewer than 99% of the trials are resolution-stable.
    """
    geometry = build_geometry(config) if geometry is None else geometry
    if volume is None:
        volume = geometry_volume(geometry, config.n)
    rows = _execute(config, geometry if config.workers == 1 else None)
    counts = np.array([r["count"] for r in rows], dtype=np.float64)
    stable = np.array([r["resolution_stable"] for r in rows], dtype=bool)
    summary = summarize(counts, stable, config, volume, _prediction(config, volume))
    log.info("campaign %s d=%d: mean %.4f (se %.4f) over %d stable trials",
             config.kind, config.d, summary.mean, summary.std_error, summary.stable_trials)
    return CampaignResult(config, summary, rows, counts, stable)


def empirical_tail(config, geometry=None, volume=None):
    """Tail campaign; returns the campaign result and the survival rows.

    Each row is ``{t, threshold, survival, markov, violation}``; a
    violation (survival above the Markov column) can only come from a bug,
    since the column uses the empirical mean of the same sample.
    """
    if config.kind != "tail":
        raise InvalidArgument("empirical_tail needs kind=tail")
    res = run_campaign(config, geometry, volume)
    rows = []
    for t in sorted(config.t_list):
        s, m = res.summary.survival[t], res.summary.markov[t]
        rows.append({"t": t, "threshold": t * config.d ** (config.n - 1), "survival": s,
                     "markov": m, "violation": bool(s > m + 1e-12)})
    return res, rows


@dataclass
class RotationResult:
    passed: bool
    original: CampaignResult
    rotated: CampaignResult
    rotation: np.ndarray
    length_original: float
    length_rotated: float
    difference: float
    combined_se: float


def rotation_invariance_test(config, rotation=None):
    """Compare a campaign on ``Γ`` with one on ``R Γ`` for a Haar ``R``.

    Passes when the two means differ by less than four combined standard
    errors.  A rotation carrying the curve off every chart is redrawn (at
    most ten times).
    """
    if config.kind != "rotation_invariance":
        raise InvalidArgument("rotation_invariance_test needs kind=rotation_invariance")
    base = build_geometry(config)
    if rotation is not None:
        R = np.asarray(rotation, dtype=np.float64)
        rotated = rotate(base, R)
    else:
        for attempt in range(MAX_ROTATION_RETRIES):
            R = haar_rotation(config.n, config.seed, attempt)
            try:
                rotated = rotate(base, R)
                break
            except ChartOverflow:
                log.info("rotation %d left every chart; drawing another", attempt)
        else:
            raise ChartOverflow("no admissible rotation after 10 attempts")
    L0, L1 = fs_length(base), fs_length(rotated)
    a = run_campaign(config, base, L0)
    b = run_campaign(config, rotated, L1)
    diff = abs(a.summary.mean - b.summary.mean)
    se = math.hypot(a.summary.std_error, b.summary.std_error)
    return RotationResult(bool(diff < 4 * se) or diff == 0.0, a, b, R, L0, L1, diff, se)


# ---------------------------------------------------------------------------
# files

def trial_fields(config):
    extra = ("components", "morse_ok") if config.kind == "surface_crit" else ()
    if config.kind == "rotation_invariance":
        return ("campaign",) + CSV_FIELDS
    return CSV_FIELDS + extra


def write_outputs(out_dir, config, results):
    """Write ``trials.csv``, ``summary.csv`` (and ``survival.csv`` for tails).

    ``results`` maps a campaign label to a :class:`CampaignResult`.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fields = trial_fields(config)
    rows = []
    for label, res in results.items():
        for r in res.rows:
            rows.append(dict(r, campaign=label) if "campaign" in fields else r)
    write_csv(out / "trials.csv", fields, rows)
    write_csv(out / "summary.csv", SUMMARY_FIELDS,
              [res.summary.csv_row(label, config) for label, res in results.items()])
    return out


def write_survival(out_dir, rows):
    write_csv(Path(out_dir) / "survival.csv", SURVIVAL_FIELDS, rows)


def run_config_file(path, out_dir=None):
    """Run the campaign described in ``path`` and write its CSV files.

    Returns a short human-readable report.
    """
    config = ExperimentConfig.from_file(path)
    out = Path(out_dir) if out_dir is not None else Path(path).parent
    lines = []
    if config.kind == "rotation_invariance":
        rr = rotation_invariance_test(config)
        write_outputs(out, config, {"original": rr.original, "rotated": rr.rotated})
        lines.append(f"original mean {rr.original.summary.mean:.6g}, rotated mean "
                     f"{rr.rotated.summary.mean:.6g}, |diff| {rr.difference:.3g} "
                     f"vs 4 SE {4 * rr.combined_se:.3g}: {'pass' if rr.passed else 'FAIL'}")
        lines.append(f"FS length {rr.length_original:.12g} -> {rr.length_rotated:.12g}")
    elif config.kind == "tail":
        res, rows = empirical_tail(config)
        write_outputs(out, config, {"main": res})
        write_survival(out, rows)
        for r in rows:
            lines.append(f"t={r['t']:g} threshold={r['threshold']:g} survival={r['survival']:.6g} "
                         f"markov={r['markov']:.6g}")
    else:
        res = run_campaign(config)
        write_outputs(out, config, {"main": res})
        s = res.summary
        lines.append(f"mean {s.mean:.6g} (std_error {s.std_error:.3g}), prediction "
                     f"{s.prediction:.6g}, stable {s.stable_fraction:.4f}")
    return "\n".join(lines)


def with_trials(config, trials):
    """Copy of ``config`` with a different trial count."""
    return replace(config, trials=int(trials))
