"""Phase-difference metrics in waves, and Monte-Carlo repeatability studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .carrier import SpectralMask, demodulate_spatial
from .errors import DegeneracyError, RefusalError
from .fields import (
    TWO_PI,
    CarrierSpec,
    PhaseMap,
    generate_stack,
    make_error_schedule,
    wrap,
)
from .conjugate import conjugate_amplitudes
from .psa import PsaSpec, demodulate_temporal, field_phase

# a piston-removed residual spanning nearly the full cycle means the
# difference still contains wraps, which piston/tilt fitting cannot see past
_WRAP_SPAN_LIMIT = TWO_PI - 0.05


@dataclass(frozen=True)
class PhaseDiffReport:
    """Summary of a residual phase difference.  pv and rms are in waves."""

    pv: float
    rms: float
    piston_removed: float
    tilt_removed: tuple[float, float]
    crop: int

    def to_dict(self) -> dict:
        return {
            "pv_waves": self.pv,
            "rms_waves": self.rms,
            "piston_removed_rad": self.piston_removed,
            "tilt_removed_rad_per_px": list(self.tilt_removed),
            "crop": self.crop,
        }


def wrapped_diff(first: PhaseMap, second: PhaseMap) -> PhaseMap:
    """Pointwise wrapped difference first - second in [-pi, pi)."""
    if first.shape != second.shape:
        raise ValueError(f"phase maps differ in shape: {first.shape} vs {second.shape}")
    return PhaseMap(wrap(first.values - second.values), wrapped=True)


def _interior(shape, crop):
    crop = int(crop)
    if crop < 0:
        raise ValueError(f"crop must be >= 0, got {crop}")
    height, width = shape
    if 2 * crop > min(height, width) - 2:
        raise ValueError(f"crop {crop} px leaves under 2 interior pixels on a {height}x{width} map")
    return slice(crop, height - crop), slice(crop, width - crop)


def _circular_mean(values: np.ndarray) -> float:
    return float(np.angle(np.mean(np.exp(1j * values))))


def remove_piston_tilt(diff: PhaseMap, crop: int = 0, tilt: bool = True):
    """Remove the best-fit piston (and optionally tilt) from a phase difference.

    Piston is the circular mean, immune to wrap position; tilt is a plane
    fit by least squares on coordinates centered over the cropped interior,
    so the piston and tilt estimates decouple exactly and reapplying the
    function is the identity up to rounding.  All fitting and statistics
    use the interior only; the returned residual covers the full grid.

    Refuses when the piston-removed interior still spans nearly the full
    cycle: the difference then contains genuine wraps and a piston/tilt
    model cannot describe it.

    Returns
    -------
    (PhaseMap, PhaseDiffReport)
        Wrapped residual and the removed-term report with interior pv/rms.
    """
    rows, cols = _interior(diff.shape, crop)
    piston1 = _circular_mean(diff.values[rows, cols])
    leveled = wrap(diff.values - piston1)

    interior = leveled[rows, cols]
    span = float(interior.max() - interior.min())
    if span >= _WRAP_SPAN_LIMIT:
        raise RefusalError(
            f"piston-removed difference spans {span:.4f} rad, within rounding of a full "
            "cycle: the difference still wraps, so piston/tilt removal is ill-defined"
        )

    alpha = beta = 0.0
    if tilt:
        height, width = diff.shape
        x = np.arange(width, dtype=np.float64) - np.mean(np.arange(width)[cols])
        y = np.arange(height, dtype=np.float64) - np.mean(np.arange(height)[rows])
        x_in = x[cols]
        y_in = y[rows]
        alpha = float(np.sum(interior * x_in[None, :]) / (np.sum(x_in**2) * interior.shape[0]))
        beta = float(np.sum(interior * y_in[:, None]) / (np.sum(y_in**2) * interior.shape[1]))
        leveled = leveled - alpha * x[None, :] - beta * y[:, None]

    piston2 = _circular_mean(leveled[rows, cols])
    residual = wrap(leveled - piston2)
    piston = float(wrap(piston1 + piston2))

    res_in = residual[rows, cols]
    report = PhaseDiffReport(
        pv=float((res_in.max() - res_in.min()) / TWO_PI),
        rms=float(res_in.std() / TWO_PI),
        piston_removed=piston,
        tilt_removed=(alpha, beta),
        crop=int(crop),
    )
    return PhaseMap(residual, wrapped=True), report


def pv_rms(phase_map: PhaseMap, crop: int = 0):
    """Peak-to-valley and RMS of a phase map in waves, over the cropped interior."""
    rows, cols = _interior(phase_map.shape, crop)
    interior = phase_map.values[rows, cols]
    return float((interior.max() - interior.min()) / TWO_PI), float(interior.std() / TWO_PI)


@dataclass(frozen=True)
class MonteCarloSummary:
    """Per-trial residual peak-to-valley statistics for one demodulation method."""

    method: str
    trials: int
    seed: int
    error_kind: str
    error_magnitude: float
    pv_waves: tuple
    leak_ratios: tuple
    failures: tuple
    percentiles: dict

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "trials": self.trials,
            "seed": self.seed,
            "error_kind": self.error_kind,
            "error_magnitude": self.error_magnitude,
            "pv_waves": list(self.pv_waves),
            "leak_ratios": list(self.leak_ratios),
            "failures": [list(f) for f in self.failures],
            "percentiles": dict(self.percentiles),
        }


def montecarlo_repeatability(
    truth: PhaseMap,
    spec: PsaSpec,
    method: str = "temporal",
    carrier: CarrierSpec | None = None,
    mask: SpectralMask | None = None,
    error_kind: str = "uniform",
    error_magnitude: float = 0.3,
    trials: int = 50,
    seed: int = 0,
    background: float = 128.0,
    contrast: float = 100.0,
    noise_sigma: float = 0.0,
    crop: int | None = None,
) -> MonteCarloSummary:
    """Repeat synthesize-demodulate-compare over freshly drawn error schedules.

    Each trial draws its own step-error schedule (and noise when requested)
    from an independent child of ``seed``, demodulates with the chosen
    method, removes piston and tilt from the wrapped difference against the
    truth, and records the interior peak-to-valley in waves together with
    the closed-form leak ratio of that trial's schedule.  Trials whose
    demodulation or comparison refuses are counted and reported, not
    silently dropped.  Identical seeds reproduce identical statistics.

    ``method`` is ``temporal`` (phase of the temporal field, artifact
    included) or ``spatial`` (carrier removal plus low-pass; requires a
    carrier).  ``crop`` defaults to the mask border crop for spatial runs
    and 0 for temporal ones.
    """
    if method not in ("temporal", "spatial"):
        raise ValueError(f"unknown method {method!r}, expected 'temporal' or 'spatial'")
    trials = int(trials)
    if trials < 2:
        raise ValueError(f"need at least 2 trials for repeatability, got {trials}")

    if method == "spatial":
        if carrier is None:
            raise ValueError("spatial method requires a carrier")
        if mask is None:
            mask = SpectralMask.for_carrier(carrier)
        if crop is None:
            crop = mask.border_crop
    elif crop is None:
        crop = 0

    if carrier is not None:
        reference_values = truth.values + carrier.phase_field(truth.shape)
    else:
        reference_values = truth.values
    temporal_reference = PhaseMap(wrap(reference_values), wrapped=True)
    truth_wrapped = PhaseMap(wrap(truth.values), wrapped=True)

    children = np.random.SeedSequence(seed).spawn(trials)
    pvs, ratios, failures = [], [], []
    for index, child in enumerate(children):
        schedule_seed, noise_seed = child.spawn(2)
        schedule = make_error_schedule(
            error_kind,
            spec.n_steps,
            magnitude=error_magnitude,
            nominal_step=spec.nominal_step,
            seed=schedule_seed,
        )
        ratio = conjugate_amplitudes(spec, schedule, contrast).leak_ratio
        try:
            stack = generate_stack(
                truth,
                background,
                contrast,
                spec.nominal_step,
                spec.n_steps,
                errors=schedule,
                carrier=carrier,
                noise_sigma=noise_sigma,
                seed=noise_seed,
            )
            if method == "temporal":
                phase, _ = field_phase(demodulate_temporal(stack, spec))
                diff = wrapped_diff(phase, temporal_reference)
            else:
                phase, _, _ = demodulate_spatial(stack, spec, carrier=carrier, mask=mask)
                diff = wrapped_diff(phase, truth_wrapped)
            _, report = remove_piston_tilt(diff, crop=crop)
        except (RefusalError, DegeneracyError) as exc:
            failures.append((index, str(exc)))
            continue
        pvs.append(report.pv)
        ratios.append(ratio)

    if pvs:
        levels = (50, 90, 95, 99)
        values = np.percentile(pvs, levels)
        percentiles = {f"p{level}": float(v) for level, v in zip(levels, values)}
    else:
        percentiles = {}

    return MonteCarloSummary(
        method=method,
        trials=trials,
        seed=int(seed),
        error_kind=error_kind,
        error_magnitude=float(error_magnitude),
        pv_waves=tuple(pvs),
        leak_ratios=tuple(ratios),
        failures=tuple(failures),
        percentiles=percentiles,
    )
