"""Monte Carlo oracle: sample the linear-optics chain, estimate moments.

Every source mode is drawn as Gaussian phase-space variables and pushed
through the same scalar linear relations the covariance machinery encodes,
independently of that machinery.  Covariances, the mutual information, and
the variance-minimising estimator gain can then be estimated from samples
and compared against the analytic engine.

Randomness: numpy's Philox counter-based generator (platform-independent,
jump-free).  A batch is split into a fixed number of sub-streams whose seeds
are spawned from SeedSequence(seed), so a batch is reproducible given
(seed, params, n_samples) alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import PHYSICALITY_TOL
from .keyrate import secret_key_rate
from .protocol import (
    HETERODYNE,
    HOMODYNE,
    DUAL_CONSTRUCTION_TOL,
    ProtocolParams,
    RETAINED_MODES,
    eve_parameters,
    joint_state_by_propagation,
    joint_state_closed_form,
    optimal_k,
)

N_STREAMS = 8

# Covariance-oracle rows: x and p of each retained mode, in mode order.
GAMMA_COLUMNS = tuple(
    f"{quad}_{mode}" for mode in RETAINED_MODES for quad in ("x", "p")
)


@dataclass(frozen=True)
class SampleBatch:
    """Per-sample quadrature records for the labelled output modes."""

    seed: int
    n_samples: int
    detection: str
    estimator_gain: float
    records: dict[str, np.ndarray]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.records[name]
        except KeyError:
            raise KeyError(f"no recorded column {name!r}; have {sorted(self.records)}") from None


def _epr_pair(rng: np.random.Generator, variance: float, n: int):
    """Draw (x1, p1, x2, p2) for a two-mode squeezed state of variance v.

    Lower-triangular factorization of the 2x2 marginals: conditional
    variance of the second mode given the first is exactly 1/v; the p pair
    anticorrelates.
    """
    v = variance
    c = math.sqrt(v * v - 1.0)
    cond = math.sqrt(1.0 / v)
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    x1 = math.sqrt(v) * z1
    x2 = (c / math.sqrt(v)) * z1 + cond * z2
    w1 = rng.standard_normal(n)
    w2 = rng.standard_normal(n)
    p1 = math.sqrt(v) * w1
    p2 = -(c / math.sqrt(v)) * w1 + cond * w2
    return x1, p1, x2, p2


def _sample_chunk(
    rng: np.random.Generator, params: ProtocolParams, n: int, k: float
) -> dict[str, np.ndarray]:
    ch = params.channel
    t = ch.transmittance
    ta = params.t_a
    t_eve, v_eve = eve_parameters(t, ta, ch.excess_noise)
    eta = params.detector.efficiency
    upsilon = params.detector.ancilla_variance
    gain = params.amplifier.effective_gain
    s2 = math.sqrt(0.5)

    # Draw order is part of the determinism contract: sources first
    # (A pair, B pair, cloner pair, cloner vacuum), then receiver ancillas.
    xa1, pa1, xa2, pa2 = _epr_pair(rng, params.v_a, n)
    xb1, pb1, xb2, pb2 = _epr_pair(rng, params.v_b, n)
    xe1, pe1, xe2, pe2 = _epr_pair(rng, v_eve, n)
    xe0 = rng.standard_normal(n)
    pe0 = rng.standard_normal(n)

    # Attack network (identical linear relations, scalar form).
    xe3 = math.sqrt(t_eve) * xe2 + math.sqrt(1.0 - t_eve) * xe0
    pe3 = math.sqrt(t_eve) * pe2 + math.sqrt(1.0 - t_eve) * pe0
    xe5 = -math.sqrt(1.0 - t_eve) * xe2 + math.sqrt(t_eve) * xe0
    pe5 = -math.sqrt(1.0 - t_eve) * pe2 + math.sqrt(t_eve) * pe0
    xain = math.sqrt(t) * xb2 + math.sqrt(1.0 - t) * xe3
    pain = math.sqrt(t) * pb2 + math.sqrt(1.0 - t) * pe3
    xaout = math.sqrt(ta) * xain + math.sqrt(1.0 - ta) * xa2
    paout = math.sqrt(ta) * pain + math.sqrt(1.0 - ta) * pa2
    xa3 = -math.sqrt(1.0 - ta) * xain + math.sqrt(ta) * xa2
    pa3 = -math.sqrt(1.0 - ta) * pain + math.sqrt(ta) * pa2
    xb3 = math.sqrt(t) * xaout + math.sqrt(1.0 - t) * xe5
    pb3 = math.sqrt(t) * paout + math.sqrt(1.0 - t) * pe5

    # Alice's heterodyne of her kept arm.
    xw = rng.standard_normal(n)
    pw = rng.standard_normal(n)
    x_ax = s2 * (xa1 + xw)
    p_ap = s2 * (-pa1 + pw)

    # Bob splits his kept arm into an x reference and a p reference.
    xv = rng.standard_normal(n)
    pv = rng.standard_normal(n)
    x_b1x = s2 * (xb1 + xv)
    p_b1p = s2 * (-pb1 + pv)

    records = {
        "x_A1": xa1, "p_A1": pa1, "x_A3": xa3, "p_A3": pa3,
        "x_B1": xb1, "p_B1": pb1, "x_B3": xb3, "p_B3": pb3,
        "x_Ax": x_ax, "p_Ap": p_ap, "x_B1x": x_b1x, "p_B1p": p_b1p,
    }

    if params.detector.kind == HOMODYNE:
        xf0, _, _, _ = _epr_pair(rng, upsilon, n)
        xb5 = math.sqrt(eta * gain) * xb3 + math.sqrt(1.0 - eta) * xf0
        records["x_B5"] = xb5
        records["x_Bx"] = xb5 - k * x_b1x
    else:
        xi0, pi0, _, _ = _epr_pair(rng, params.amplifier.inherent_noise, n)
        xb4 = math.sqrt(gain) * xb3 + math.sqrt(gain - 1.0) * xi0
        pb4 = math.sqrt(gain) * pb3 - math.sqrt(gain - 1.0) * pi0
        xf0, pf0, _, _ = _epr_pair(rng, upsilon, n)
        xb5 = math.sqrt(eta) * xb4 + math.sqrt(1.0 - eta) * xf0
        pb5 = math.sqrt(eta) * pb4 + math.sqrt(1.0 - eta) * pf0
        xu = rng.standard_normal(n)
        pu = rng.standard_normal(n)
        x_b5x = s2 * (xb5 + xu)
        p_b5p = s2 * (-pb5 + pu)
        records["x_B5x"] = x_b5x
        records["p_B5p"] = p_b5p
        records["x_Bx"] = x_b5x - k * x_b1x
        records["p_Bp"] = p_b5p + k * p_b1p
    return records


def sample_protocol(
    params: ProtocolParams, seed: int, n_samples: int, estimator_gain: float | None = None
) -> SampleBatch:
    """Draw n_samples of every recorded quadrature for the given protocol."""
    if n_samples < 1:
        raise ValueError(f"need n_samples >= 1, got {n_samples}")
    k = optimal_k(params) if estimator_gain is None else estimator_gain
    sizes = [
        n_samples // N_STREAMS + (1 if i < n_samples % N_STREAMS else 0)
        for i in range(N_STREAMS)
    ]
    chunks = []
    for child, size in zip(np.random.SeedSequence(seed).spawn(N_STREAMS), sizes):
        if size == 0:
            continue
        rng = np.random.Generator(np.random.Philox(child))
        chunks.append(_sample_chunk(rng, params, size, k))
    records = {
        name: np.concatenate([c[name] for c in chunks]) for name in chunks[0]
    }
    return SampleBatch(
        seed=seed,
        n_samples=n_samples,
        detection=params.detector.kind,
        estimator_gain=k,
        records=records,
    )


def empirical_joint_covariance(batch: SampleBatch) -> np.ndarray:
    """Sampled 8x8 covariance of the retained (A1, A3, B1, B3) quadratures."""
    stacked = np.vstack([batch.column(name) for name in GAMMA_COLUMNS])
    return np.cov(stacked, ddof=1)


def covariance_standard_errors(analytic: np.ndarray, n_samples: int) -> np.ndarray:
    """Delta-method standard error of each sampled covariance entry.

    For jointly Gaussian data, Var(C_ij) = (C_ii C_jj + C_ij^2) / n.
    """
    diag = np.diag(analytic)
    return np.sqrt((np.outer(diag, diag) + analytic**2) / n_samples)


def _info_term(x_a: np.ndarray, x_b: np.ndarray) -> tuple[float, float]:
    """One quadrature's plug-in information estimate and its standard error."""
    v_a = float(np.var(x_a, ddof=1))
    v_b = float(np.var(x_b, ddof=1))
    c = float(np.cov(x_a, x_b, ddof=1)[0, 1])
    if v_a <= 0.0 or v_b <= 0.0:
        raise ValueError("degenerate sample variance")
    rho2 = c * c / (v_a * v_b)
    if rho2 >= 1.0:
        raise ValueError("degenerate sample correlation")
    info = -0.5 * math.log2(1.0 - rho2)
    se = math.sqrt(rho2) / (math.log(2.0) * math.sqrt(len(x_a)))
    return info, se


def estimate_mutual_information(batch: SampleBatch) -> tuple[float, float]:
    """Plug-in Gaussian estimate of I(a:b) in bits, with its standard error."""
    info, se = _info_term(batch.column("x_Ax"), batch.column("x_Bx"))
    if batch.detection == HETERODYNE:
        info_p, se_p = _info_term(batch.column("p_Ap"), batch.column("p_Bp"))
        info += info_p
        se = math.hypot(se, se_p)
    return info, se


def scan_estimator_gain(batch: SampleBatch, k_values: np.ndarray) -> float:
    """Grid argmin over k of the sampled Var(signal - k * reference)."""
    signal = batch.column("x_B5" if batch.detection == HOMODYNE else "x_B5x")
    reference = batch.column("x_B1x")
    k_values = np.asarray(k_values, dtype=float)
    if k_values.ndim != 1 or k_values.size < 2:
        raise ValueError("need a one-dimensional grid of at least two k values")
    v_s = float(np.var(signal, ddof=1))
    v_r = float(np.var(reference, ddof=1))
    c = float(np.cov(signal, reference, ddof=1)[0, 1])
    variances = v_s - 2.0 * k_values * c + k_values**2 * v_r
    return float(k_values[int(np.argmin(variances))])


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str


def run_validation(params: ProtocolParams, seed: int, n_samples: int) -> list[ValidationCheck]:
    """The oracle suite behind the CLI's validate command.

    Statistical checks at 5 standard errors, plus the dual-construction
    agreement of the two covariance constructions.
    """
    checks: list[ValidationCheck] = []
    batch = sample_protocol(params, seed, n_samples)

    analytic = joint_state_closed_form(params).data
    means = np.array([float(np.mean(batch.column(c))) for c in GAMMA_COLUMNS])
    mean_bounds = 5.0 * np.sqrt(np.diag(analytic) / n_samples)
    worst_mean = float(np.max(np.abs(means) / mean_bounds))
    checks.append(
        ValidationCheck(
            "sample-means-zero",
            bool(worst_mean <= 1.0),
            f"worst |mean|/bound = {worst_mean:.3f} (bound = 5 sigma)",
        )
    )

    sampled = empirical_joint_covariance(batch)
    se = covariance_standard_errors(analytic, n_samples)
    worst_cov = float(np.max(np.abs(sampled - analytic) / (5.0 * se)))
    checks.append(
        ValidationCheck(
            "joint-covariance",
            bool(worst_cov <= 1.0),
            f"worst |sampled-analytic|/(5 SE) = {worst_cov:.3f}",
        )
    )

    analytic_rate = secret_key_rate(params)
    info_mc, info_se = estimate_mutual_information(batch)
    info_diff = abs(info_mc - analytic_rate.mutual_information)
    rel = info_diff / analytic_rate.mutual_information
    within = info_diff <= 5.0 * info_se and rel <= 0.01
    checks.append(
        ValidationCheck(
            "mutual-information",
            bool(within),
            f"sampled {info_mc:.6f} vs analytic {analytic_rate.mutual_information:.6f} "
            f"bits (diff {info_diff:.2e}, {rel:.2%} rel, 5 SE = {5.0 * info_se:.2e})",
        )
    )

    k_star = optimal_k(params)
    k_grid = np.linspace(0.5 * k_star, 1.5 * k_star, 4001)
    k_hat = scan_estimator_gain(batch, k_grid)
    k_rel = abs(k_hat - k_star) / k_star
    # 1% at the reference n = 1e6; the argmin error is statistical, so the
    # allowance grows as 1/sqrt(n) below that.
    k_tol = 0.01 * max(1.0, math.sqrt(1e6 / n_samples))
    checks.append(
        ValidationCheck(
            "estimator-gain-argmin",
            bool(k_rel <= k_tol),
            f"scanned argmin k = {k_hat:.6f} vs analytic {k_star:.6f} "
            f"({k_rel:.2%} rel, tol {k_tol:.2%})",
        )
    )

    dual = float(
        np.max(np.abs(analytic - joint_state_by_propagation(params).data))
    )
    checks.append(
        ValidationCheck(
            "dual-construction",
            bool(dual <= DUAL_CONSTRUCTION_TOL),
            f"max |closed-form - propagated| = {dual:.3e} (tol {DUAL_CONSTRUCTION_TOL:g})",
        )
    )

    spectrum_min = min(
        analytic_rate.spectrum_unconditional.minimum,
        analytic_rate.spectrum_conditional.minimum,
    )
    checks.append(
        ValidationCheck(
            "state-physicality",
            bool(spectrum_min >= 1.0 - PHYSICALITY_TOL),
            f"smallest symplectic eigenvalue = {spectrum_min:.12f}",
        )
    )
    return checks
