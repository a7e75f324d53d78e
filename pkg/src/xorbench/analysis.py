"""Scaling-law fits (power vs exponential), bootstrap CIs, and plot-data export.

Both fitters are ordinary least squares in log10 space — the convention for
TTS scaling plots — and the method is declared in all emitted metadata.
Infinite TTS points (unsolved sizes) are excluded from fits, with the
exclusion count recorded on the fit object.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientPoints,
    InsufficientResamples,
    NoData,
    NonPositiveValue,
)

#: Published scaling constants used as labeled reference lines.
LITERATURE_REFERENCES = (
    ("literature power k=2.31", "power", 2.31),
    ("literature exponential alpha=0.0171", "exponential", 0.0171),
    ("literature exponential alpha=0.08", "exponential", 0.08),
)


@dataclass(frozen=True)
class ScalingFit:
    model_kind: str          # "power" (tts ~ n^k) or "exponential" (tts ~ 10^(alpha n))
    exponent: float
    intercept: float         # log10 of the prefactor
    exponent_stderr: float
    r_squared: float
    n_points: int
    n_excluded: int = 0

    def __post_init__(self) -> None:
        if self.model_kind not in ("power", "exponential"):
            raise ValueError(f"unknown model kind '{self.model_kind}'")
        if self.n_points < 3:
            raise InsufficientPoints(
                f"a scaling fit needs >= 3 points, got {self.n_points}")
        if not -1e-9 <= self.r_squared <= 1 + 1e-9:
            raise ValueError(f"r_squared out of [0,1]: {self.r_squared}")

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        if self.model_kind == "power":
            return 10.0 ** (self.intercept + self.exponent * np.log10(n))
        return 10.0 ** (self.intercept + self.exponent * n)


def _clean_points(sizes, tts) -> tuple[np.ndarray, np.ndarray, int]:
    sizes = np.asarray(sizes, dtype=np.float64)
    tts = np.asarray(tts, dtype=np.float64)
    if sizes.shape != tts.shape or sizes.ndim != 1:
        raise ValueError("sizes and tts must be equal-length 1-d sequences")
    keep = np.isfinite(tts) & np.isfinite(sizes)
    excluded = int((~keep).sum())
    sizes, tts = sizes[keep], tts[keep]
    if sizes.size < 3:
        raise InsufficientPoints(
            f"a scaling fit needs >= 3 finite points, got {sizes.size}")
    if (tts <= 0).any() or (sizes <= 0).any():
        raise NonPositiveValue("scaling fits need positive sizes and TTS values")
    return sizes, tts, excluded


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Slope, intercept, slope stderr (residual-variance based), r^2."""
    m = x.size
    x_bar, y_bar = x.mean(), y.mean()
    sxx = float(((x - x_bar) ** 2).sum())
    if sxx == 0.0 or np.ptp(x) == 0.0:
        raise NonPositiveValue("all x values identical; slope undefined")
    slope = float(((x - x_bar) * (y - y_bar)).sum() / sxx)
    intercept = float(y_bar - slope * x_bar)
    residuals = y - (intercept + slope * x)
    ssr = float((residuals ** 2).sum())
    sst = float(((y - y_bar) ** 2).sum())
    if sst <= 1e-300:
        r2 = 1.0 if ssr <= 1e-20 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ssr / sst))
    stderr = math.sqrt(ssr / (m - 2) / sxx) if m > 2 else float("inf")
    return slope, intercept, stderr, r2


def fit_power_law(sizes, tts) -> ScalingFit:
    """OLS of log10(tts) on log10(n); exponent is k in tts ~ n^k."""
    sizes, tts, excluded = _clean_points(sizes, tts)
    k, b, se, r2 = _ols(np.log10(sizes), np.log10(tts))
    return ScalingFit("power", k, b, se, r2, sizes.size, excluded)


def fit_exponential(sizes, tts) -> ScalingFit:
    """OLS of log10(tts) on n; exponent is alpha in tts ~ 10^(alpha n)."""
    sizes, tts, excluded = _clean_points(sizes, tts)
    a, b, se, r2 = _ols(sizes, np.log10(tts))
    return ScalingFit("exponential", a, b, se, r2, sizes.size, excluded)


#: Below this r^2 gap the two model forms are statistically indistinguishable.
INDETERMINATE_BAND = 0.02


@dataclass(frozen=True)
class ModelComparison:
    power: ScalingFit
    exponential: ScalingFit
    preferred: str
    delta_r2: float
    indeterminate: bool


def compare_models(sizes, tts) -> ModelComparison:
    """Fit both forms; prefer the higher r^2, flagging gaps under 0.02."""
    power = fit_power_law(sizes, tts)
    expo = fit_exponential(sizes, tts)
    delta = abs(power.r_squared - expo.r_squared)
    preferred = "power" if power.r_squared >= expo.r_squared else "exponential"
    return ModelComparison(power, expo, preferred, delta,
                           indeterminate=delta < INDETERMINATE_BAND)


def bootstrap_ci(sizes, tts, resamples: int = 1000, seed: int = 0,
                 model_kind: str = "power") -> tuple[float, float]:
    """95% percentile interval for the exponent via point resampling.

    Degenerate resamples (all sizes identical) are skipped; the interval is
    widened, if necessary, to bracket the full-sample point estimate.
    """
    if resamples < 2:
        raise InsufficientResamples(f"need >= 2 resamples, got {resamples}")
    fitter = fit_power_law if model_kind == "power" else fit_exponential
    point = fitter(sizes, tts).exponent
    sizes = np.asarray(sizes, dtype=np.float64)
    tts = np.asarray(tts, dtype=np.float64)
    rng = np.random.default_rng(seed)
    slopes = []
    attempts = 0
    while len(slopes) < resamples and attempts < 10 * resamples:
        attempts += 1
        idx = rng.integers(0, sizes.size, size=sizes.size)
        try:
            slopes.append(fitter(sizes[idx], tts[idx]).exponent)
        except (NonPositiveValue, InsufficientPoints):
            continue
    if len(slopes) < 2:
        raise InsufficientResamples("too few non-degenerate resamples")
    lo, hi = np.percentile(slopes, [2.5, 97.5])
    return min(float(lo), point), max(float(hi), point)


# --- plot-data export -------------------------------------------------------------

def _float_cell(value: float) -> str:
    return repr(float(value))


def _series_name(solver: str, noise: float) -> str:
    return f"series_{solver}_eta{noise:g}.csv"


def _sample_grid(n_lo: float, n_hi: float, count: int = 50) -> np.ndarray:
    if n_lo == n_hi:
        return np.array([n_lo])
    return np.geomspace(n_lo, n_hi, count)


def emit_plot_data(summaries, fits: dict | None, outdir: str,
                   point_cis: dict | None = None) -> list[str]:
    """Write plot-ready series, fit curves, labeled literature reference lines,
    and a gnuplot companion script.

    ``summaries`` is a list of bench.SummaryRow; ``fits`` maps (solver, noise)
    to ScalingFit (or ModelComparison, whose preferred fit is used);
    ``point_cis`` optionally maps (solver, n, noise) to (lo, hi) TTS bounds.
    Returns the list of files written.
    """
    if not summaries:
        raise NoData("no summary rows to plot")
    os.makedirs(outdir, exist_ok=True)
    written = []

    series: dict[tuple, list] = {}
    for row in summaries:
        series.setdefault((row.solver, row.noise), []).append(row)

    all_n = [row.n for row in summaries]
    n_lo, n_hi = float(min(all_n)), float(max(all_n))
    finite_tts = [row.tts_steps for row in summaries if math.isfinite(row.tts_steps)]
    anchor_tts = min(finite_tts) if finite_tts else 1.0

    for (solver, noise), rows in sorted(series.items()):
        rows = sorted(rows, key=lambda r: r.n)
        path = os.path.join(outdir, _series_name(solver, noise))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("n,tts,ci_low,ci_high\n")
            for row in rows:
                lo, hi = (point_cis or {}).get(
                    (solver, row.n, noise), (row.tts_steps, row.tts_steps))
                fh.write(",".join([str(row.n), _float_cell(row.tts_steps),
                                   _float_cell(lo), _float_cell(hi)]) + "\n")
        written.append(path)

        fit = (fits or {}).get((solver, noise))
        if fit is None:
            continue
        if isinstance(fit, ModelComparison):
            fit = fit.power if fit.preferred == "power" else fit.exponential
        fit_path = os.path.join(outdir, f"fit_{solver}_eta{noise:g}.csv")
        grid = _sample_grid(min(r.n for r in rows), max(r.n for r in rows))
        with open(fit_path, "w", encoding="utf-8") as fh:
            fh.write(f"# model={fit.model_kind} exponent={fit.exponent!r} "
                     f"intercept={fit.intercept!r} stderr={fit.exponent_stderr!r} "
                     f"r_squared={fit.r_squared!r} n_points={fit.n_points} "
                     f"n_excluded={fit.n_excluded} method=ols-log10\n")
            fh.write("n,tts_fit\n")
            for n_val, t_val in zip(grid, fit.predict(grid)):
                fh.write(f"{_float_cell(n_val)},{_float_cell(t_val)}\n")
        written.append(fit_path)

    grid = _sample_grid(n_lo, n_hi)
    ref_files = []
    for label, kind, exponent in LITERATURE_REFERENCES:
        slug = label.split()[-1].replace("=", "")
        path = os.path.join(outdir, f"reference_{kind}_{slug}.csv")
        if kind == "power":
            curve = anchor_tts * (grid / n_lo) ** exponent
        else:
            curve = anchor_tts * 10.0 ** (exponent * (grid - n_lo))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {label} (anchored at n={n_lo:g}); not a fit to this data\n")
            fh.write("n,tts_ref\n")
            for n_val, t_val in zip(grid, curve):
                fh.write(f"{_float_cell(n_val)},{_float_cell(t_val)}\n")
        written.append(path)
        ref_files.append((path, label))

    script = os.path.join(outdir, "plot.gp")
    with open(script, "w", encoding="utf-8") as fh:
        fh.write("set logscale xy\n")
        fh.write("set xlabel 'problem size n'\n")
        fh.write("set ylabel 'optimal TTS (steps)'\n")
        fh.write("set datafile separator ','\n")
        fh.write("set key left top\n")
        parts = []
        for (solver, noise), _ in sorted(series.items()):
            name = _series_name(solver, noise)
            parts.append(
                f"'{name}' skip 1 using 1:2:3:4 with yerrorbars"
                f" title '{solver} eta={noise:g}'")
            fit_name = f"fit_{solver}_eta{noise:g}.csv"
            if os.path.exists(os.path.join(outdir, fit_name)):
                parts.append(f"'{fit_name}' skip 2 using 1:2 with lines"
                             f" title '{solver} eta={noise:g} fit'")
        for path, label in ref_files:
            parts.append(f"'{os.path.basename(path)}' skip 2 using 1:2 "
                         f"with lines dashtype 2 title '{label}'")
        fh.write("plot \\\n    " + ", \\\n    ".join(parts) + "\n")
    written.append(script)
    return written


def read_series(path: str) -> list[tuple[float, float, float, float]]:
    """Re-parse a series CSV written by emit_plot_data (exact round-trip)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("n,"):
            raise NoData(f"{path} is not a series file")
        for line in fh:
            if line.strip():
                n_s, t_s, lo_s, hi_s = line.strip().split(",")
                rows.append((float(n_s), float(t_s), float(lo_s), float(hi_s)))
    return rows
