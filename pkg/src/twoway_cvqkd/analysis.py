"""Parameter sweeps and root-finding on top of the key-rate engine.

Distance curves for comparison sets of amplifier configurations, maximal
secure distance, tolerable amplifier noise at a given distance, and the
tolerable-noise surface over a (gain, distance) grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from .keyrate import KeyRateResult, secret_key_rate
from .protocol import (
    HETERODYNE,
    HOMODYNE,
    AmplifierSpec,
    DetectorModel,
    ProtocolParams,
)

SWEEP_VARIABLES = ("distance", "gain", "inherent_noise")

MAX_DISTANCE_XTOL_KM = 1e-3
BISECTION_MAX_ITER = 60
DISTANCE_CAP_KM = 20000.0
NOISE_CAP = 1e6


class BracketError(RuntimeError):
    """Root bracketing failed; the message carries the endpoint values."""


@dataclass(frozen=True)
class AmplifierVariant:
    """One member of a comparison set: a label plus the receiver flavour."""

    label: str
    amplifier: AmplifierSpec
    perfect_detector: bool = False

    def applied_to(self, params: ProtocolParams) -> ProtocolParams:
        out = params.with_amplifier(self.amplifier)
        if self.perfect_detector:
            out = replace(
                out,
                detector=DetectorModel(
                    kind=out.detector.kind, efficiency=1.0, electronic_noise=0.0
                ),
            )
        return out


DEFAULT_HOMODYNE_VARIANTS = (
    AmplifierVariant("noamp", AmplifierSpec()),
    AmplifierVariant("psa_g2", AmplifierSpec("psa", 2.0)),
    AmplifierVariant("psa_g15", AmplifierSpec("psa", 15.0)),
    AmplifierVariant("perfect", AmplifierSpec(), perfect_detector=True),
)

DEFAULT_HETERODYNE_VARIANTS = (
    AmplifierVariant("noamp", AmplifierSpec()),
    AmplifierVariant("pia_g2_n1", AmplifierSpec("pia", 2.0, 1.0)),
    AmplifierVariant("pia_g2_n1p5", AmplifierSpec("pia", 2.0, 1.5)),
    AmplifierVariant("pia_g15_n1", AmplifierSpec("pia", 15.0, 1.0)),
    AmplifierVariant("pia_g15_n1p5", AmplifierSpec("pia", 15.0, 1.5)),
    AmplifierVariant("perfect", AmplifierSpec(), perfect_detector=True),
)


def default_variants(detector_kind: str) -> tuple[AmplifierVariant, ...]:
    if detector_kind == HOMODYNE:
        return DEFAULT_HOMODYNE_VARIANTS
    if detector_kind == HETERODYNE:
        return DEFAULT_HETERODYNE_VARIANTS
    raise ValueError(f"unknown detector kind {detector_kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    """A swept variable, its inclusive grid, and the comparison set.

    variants=None means the default set for the base detector kind.
    """

    base: ProtocolParams
    start: float
    stop: float
    step: float
    variable: str = "distance"
    variants: tuple[AmplifierVariant, ...] | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if self.step <= 0.0:
            raise ValueError(f"sweep step must be > 0, got {self.step}")
        if not self.start < self.stop:
            raise ValueError(f"sweep needs start < stop, got [{self.start}, {self.stop}]")

    def resolved_variants(self) -> tuple[AmplifierVariant, ...]:
        if self.variants is not None:
            return self.variants
        return default_variants(self.base.detector.kind)


@dataclass(frozen=True)
class SweepRow:
    """One grid point: the swept value and one result per variant label."""

    value: float
    results: Mapping[str, KeyRateResult]


def grid_values(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid: start + i*step, enough points to reach stop.

    The count is ceil((stop-start)/step) + 1 with a little slack so float
    noise cannot drop the endpoint; the last value may overshoot stop by
    less than one step.
    """
    if step <= 0.0 or not start < stop:
        raise ValueError(f"bad grid [{start}, {stop}] step {step}")
    count = math.ceil((stop - start) / step - 1e-9) + 1
    return [start + i * step for i in range(count)]


def _at_value(params: ProtocolParams, variable: str, value: float) -> ProtocolParams:
    if variable == "distance":
        return params.with_distance(value)
    if variable == "gain":
        return params.with_amplifier(replace(params.amplifier, gain=value))
    # inherent noise only exists on the phase-insensitive amplifier; other
    # variants ride along unchanged as constant reference curves.
    if params.amplifier.kind == "pia":
        return params.with_amplifier(replace(params.amplifier, inherent_noise=value))
    return params


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every variant at every grid value, in deterministic order."""
    variants = spec.resolved_variants()
    labels = [v.label for v in variants]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate variant labels {labels}")
    rows = []
    for value in grid_values(spec.start, spec.stop, spec.step):
        results = {}
        for variant in variants:
            params = _at_value(variant.applied_to(spec.base), spec.variable, value)
            results[variant.label] = secret_key_rate(params)
        rows.append(SweepRow(value=value, results=results))
    return rows


def sweep_distance(spec: SweepSpec) -> list[SweepRow]:
    """Distance sweep; the spec's variable must say so."""
    if spec.variable != "distance":
        raise ValueError(f"expected a distance sweep, got {spec.variable!r}")
    return run_sweep(spec)


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 0.0,
    max_iter: int = BISECTION_MAX_ITER,
) -> float:
    """Bisection on a verified sign change; runs to xtol or float exhaustion."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(
            f"no sign change on [{lo:g}, {hi:g}]: f(lo)={flo:.6e}, f(hi)={fhi:.6e}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not (min(lo, hi) < mid < max(lo, hi)):
            break  # interval is below float resolution
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if abs(hi - lo) <= xtol:
            break
    return 0.5 * (lo + hi)


def find_max_distance(params: ProtocolParams, *, xtol: float = MAX_DISTANCE_XTOL_KM) -> float:
    """Distance where the key rate crosses zero, by bracketed bisection.

    The bracket is grown geometrically from the first short distance with a
    positive rate; failure to find one, or a rate still positive at the
    distance cap, is a BracketError carrying the observed values.
    """

    def rate(d: float) -> float:
        return secret_key_rate(params.with_distance(d)).key_rate

    lo = None
    tried = []
    for candidate in (1.0, 0.5, 0.1, 0.01):
        value = rate(candidate)
        tried.append(f"K({candidate:g} km)={value:.6e}")
        if value > 0.0:
            lo = candidate
            break
    if lo is None:
        raise BracketError("no positive key rate at any starting distance: " + ", ".join(tried))
    hi = 2.0 * lo
    while rate(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > DISTANCE_CAP_KM:
            raise BracketError(
                f"key rate still positive at {lo:g} km; giving up at the {DISTANCE_CAP_KM:g} km cap"
            )
    return bisect_root(rate, lo, hi, xtol=xtol)


def find_tolerable_noise(
    params: ProtocolParams,
    *,
    noamp_max_distance: float | None = None,
    noamp_key_rate: float | None = None,
) -> float | None:
    """Largest amplifier inherent noise that keeps the amplifier worthwhile.

    Within the no-amplifier range the criterion is matching the no-amplifier
    key rate at the same distance; beyond it, staying at a positive rate.
    Returns None when even the quantum-limited amplifier (N=1) fails the
    criterion ("no improvement").  The root is refined to float resolution,
    far below the 1e-3 guarantee, so the key-rate residual at the returned
    N is at the key-rate evaluation noise floor.
    """
    if params.detector.kind != HETERODYNE:
        raise ValueError("tolerable noise is defined for the heterodyne receiver")
    if params.amplifier.kind != "pia":
        raise ValueError("tolerable noise is defined for the phase-insensitive amplifier")
    if params.amplifier.gain <= 1.0:
        raise ValueError(
            "tolerable noise needs gain > 1; a unit-gain amplifier decouples its "
            "ancilla and the key rate does not depend on the inherent noise"
        )
    bare = params.with_amplifier(AmplifierSpec())
    if noamp_max_distance is None:
        noamp_max_distance = find_max_distance(bare)
    distance = params.channel.distance_km
    if distance <= noamp_max_distance:
        target = (
            secret_key_rate(bare).key_rate if noamp_key_rate is None else noamp_key_rate
        )
    else:
        target = 0.0

    def excess(n: float) -> float:
        spec = AmplifierSpec("pia", params.amplifier.gain, n)
        return secret_key_rate(params.with_amplifier(spec)).key_rate - target

    at_limit = excess(1.0)
    if at_limit < 0.0:
        return None
    if at_limit == 0.0:
        return 1.0
    lo, hi = 1.0, 2.0
    while excess(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > NOISE_CAP:
            raise BracketError(
                f"amplifier still worthwhile at inherent noise {lo:g}; "
                f"giving up at the {NOISE_CAP:g} cap"
            )
    return bisect_root(excess, lo, hi)


@dataclass(frozen=True)
class SurfaceCell:
    """One (gain, distance) grid cell; n_tol is None where the criterion
    cannot be met at all (no improvement / beyond the amplified range)."""

    gain: float
    distance_km: float
    n_tol: float | None
    error: str | None = None


def tolerable_noise_surface(
    params: ProtocolParams,
    gain_range: tuple[float, float, float],
    distance_range: tuple[float, float, float],
) -> list[SurfaceCell]:
    """find_tolerable_noise over a (gain, distance) grid, ordered by (g, d).

    Cell-level failures are recorded on the cell instead of aborting the
    grid.  The no-amplifier maximal distance is shared across cells (it
    does not depend on the amplifier), and the no-amplifier rate is reused
    across gains at fixed distance.
    """
    if params.detector.kind != HETERODYNE:
        raise ValueError("the tolerable-noise surface is defined for the heterodyne receiver")
    gains = grid_values(*gain_range)
    distances = grid_values(*distance_range)
    bare = params.with_amplifier(AmplifierSpec())
    noamp_max = find_max_distance(bare)
    noamp_rate = {
        d: secret_key_rate(bare.with_distance(d)).key_rate
        for d in distances
        if d <= noamp_max
    }
    cells = []
    for g in gains:
        for d in distances:
            cell_params = params.with_distance(d).with_amplifier(
                AmplifierSpec("pia", g, 1.0)
            )
            try:
                n_tol = find_tolerable_noise(
                    cell_params,
                    noamp_max_distance=noamp_max,
                    noamp_key_rate=noamp_rate.get(d),
                )
                cells.append(SurfaceCell(g, d, n_tol))
            except (BracketError, ValueError) as exc:
                cells.append(SurfaceCell(g, d, None, error=str(exc)))
    return cells
