"""Two-way protocol state construction under a two-mode collective attack.

Alice and Bob each hold one arm of an EPR source.  Bob's outgoing arm makes a
round trip through the lossy channel; Alice taps it with a beam splitter and
injects her own EPR arm.  Eve wiretaps both line passes with a single
entangling cloner whose injection splitter is tuned so that her two ancilla
insertions interfere destructively at Bob's receiver, leaving the usual
one-pass noise statistics while she keeps purifying modes of everything.

Two independent constructions of the retained four-mode covariance matrix
(A1, A3, B1, B3) are provided: a closed form and an explicit propagation of
the seven-mode source state through the beam-splitter network.  They must
agree to high precision; the tests enforce it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gaussian import (
    SIGMA_Z,
    CovarianceMatrix,
    apply,
    beam_splitter,
    cnot_p,
    cnot_x,
    embed_transform,
    epr_state,
    pia,
    psa,
    tensor,
    vacuum_state,
)

DUAL_CONSTRUCTION_TOL = 1e-9

HOMODYNE = "homodyne"
HETERODYNE = "heterodyne"
DETECTOR_KINDS = (HOMODYNE, HETERODYNE)
AMPLIFIER_KINDS = ("none", "psa", "pia")

# Source modes in tensor order, and what each slot holds after the attack
# network has acted.
SOURCE_MODES = ("A1", "A2", "B1", "B2", "E1", "E2", "E0")
ATTACK_OUTPUT_MODES = ("A1", "A3", "B1", "B3", "E1", "E4", "E6")
RETAINED_MODES = ("A1", "A3", "B1", "B3")


class SingularChannelError(ValueError):
    """Excess noise requested on a lossless line; the cloner variance diverges."""


@dataclass(frozen=True)
class ChannelModel:
    """Symmetric fibre round trip: equal forward and backward transmittance.

    excess_noise is the channel-input-referred excess noise that Eve's cloner
    reproduces on average over the two passes.
    """

    distance_km: float
    excess_noise: float = 0.02
    loss_db_per_km: float = 0.2

    def __post_init__(self):
        if self.distance_km < 0.0:
            raise ValueError(f"distance must be >= 0 km, got {self.distance_km}")
        if self.excess_noise < 0.0:
            raise ValueError(f"excess noise must be >= 0, got {self.excess_noise}")
        if self.loss_db_per_km < 0.0:
            raise ValueError(f"loss must be >= 0 dB/km, got {self.loss_db_per_km}")
        if self.transmittance >= 1.0 and self.excess_noise > 0.0:
            raise SingularChannelError(
                "excess noise on a lossless line has no finite cloner variance; "
                "need distance > 0 (and loss > 0) whenever excess_noise > 0"
            )

    @property
    def transmittance(self) -> float:
        """One-pass transmittance 10^(-a d / 10)."""
        return 10.0 ** (-self.loss_db_per_km * self.distance_km / 10.0)

    @property
    def eve_variance(self) -> float:
        """Cloner EPR variance giving the stated excess noise on average."""
        t = self.transmittance
        if self.excess_noise == 0.0:
            return 1.0
        return 1.0 + 2.0 * t * self.excess_noise / (1.0 - t)


@dataclass(frozen=True)
class DetectorModel:
    """Inefficient detector: eta beam splitter mixing in one EPR arm.

    The ancilla EPR variance is chosen so the electronic-noise floor v_el is
    reproduced per measured quadrature; the heterodyne case needs twice the
    homodyne loading because the inefficiency splitter sits before the
    50/50 split.
    """

    kind: str = HOMODYNE
    efficiency: float = 0.552
    electronic_noise: float = 0.015

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"detector kind must be one of {DETECTOR_KINDS}, got {self.kind!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if self.electronic_noise < 0.0:
            raise ValueError(f"electronic noise must be >= 0, got {self.electronic_noise}")
        if self.efficiency == 1.0 and self.electronic_noise > 0.0:
            raise ValueError("a unit-efficiency detector cannot carry electronic noise")

    @property
    def ancilla_variance(self) -> float:
        if self.efficiency == 1.0:
            return 1.0
        scale = 1.0 if self.kind == HOMODYNE else 2.0
        return 1.0 + scale * self.electronic_noise / (1.0 - self.efficiency)


@dataclass(frozen=True)
class AmplifierSpec:
    """Receiver-side amplifier: none, phase-sensitive, or phase-insensitive.

    inherent_noise is the EPR variance of the phase-insensitive amplifier's
    internal ancilla pair; 1 is the quantum-limited case.  A phase-sensitive
    amplifier is noiseless by construction and carries no such knob.
    """

    kind: str = "none"
    gain: float = 1.0
    inherent_noise: float = 1.0

    def __post_init__(self):
        if self.kind not in AMPLIFIER_KINDS:
            raise ValueError(f"amplifier kind must be one of {AMPLIFIER_KINDS}, got {self.kind!r}")
        if self.gain < 1.0:
            raise ValueError(f"amplifier gain must be >= 1, got {self.gain}")
        if self.inherent_noise < 1.0:
            raise ValueError(f"inherent noise must be >= 1, got {self.inherent_noise}")
        if self.kind == "psa" and self.inherent_noise != 1.0:
            raise ValueError("a phase-sensitive amplifier has no inherent-noise parameter")

    @property
    def effective_gain(self) -> float:
        """Gain actually applied; kind 'none' behaves as unit gain."""
        return 1.0 if self.kind == "none" else self.gain


@dataclass(frozen=True)
class ProtocolParams:
    """Everything needed to evaluate the protocol at one operating point."""

    channel: ChannelModel
    detector: DetectorModel = field(default_factory=DetectorModel)
    amplifier: AmplifierSpec = field(default_factory=AmplifierSpec)
    v_a: float = 40.0
    v_b: float = 40.0
    t_a: float = 0.4
    beta: float = 0.948

    def __post_init__(self):
        if self.v_a < 1.0 or self.v_b < 1.0:
            raise ValueError("source EPR variances must be >= 1")
        if not 0.0 < self.t_a <= 1.0:
            raise ValueError(f"Alice's tap transmittance must lie in (0, 1], got {self.t_a}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"reconciliation efficiency must lie in [0, 1], got {self.beta}")

    def with_amplifier(self, amplifier: AmplifierSpec) -> "ProtocolParams":
        return replace(self, amplifier=amplifier)

    def with_distance(self, distance_km: float) -> "ProtocolParams":
        return replace(self, channel=replace(self.channel, distance_km=distance_km))


def channel_transmittance(loss_db_per_km: float, distance_km: float) -> float:
    """One-pass fibre transmittance for the given loss coefficient."""
    if loss_db_per_km < 0.0 or distance_km < 0.0:
        raise ValueError("loss and distance must be >= 0")
    return 10.0 ** (-loss_db_per_km * distance_km / 10.0)


def eve_parameters(
    transmittance: float, t_alice: float, excess_noise: float
) -> tuple[float, float]:
    """Eve's injection-splitter transmittance and cloner variance (T_E, V_E).

    T_E = 1 / (1 + T t_A) makes her two insertions interfere destructively in
    Bob's received mode; V_E = 1 + 2 T eps / (1 - T) sets the average
    excess noise over the forward and backward passes to eps.
    """
    if not 0.0 < transmittance <= 1.0:
        raise ValueError(f"transmittance must lie in (0, 1], got {transmittance}")
    if not 0.0 < t_alice <= 1.0:
        raise ValueError(f"tap transmittance must lie in (0, 1], got {t_alice}")
    if excess_noise < 0.0:
        raise ValueError(f"excess noise must be >= 0, got {excess_noise}")
    t_eve = 1.0 / (1.0 + transmittance * t_alice)
    if excess_noise == 0.0:
        v_eve = 1.0
    elif transmittance >= 1.0:
        raise SingularChannelError("excess noise on a lossless line is singular")
    else:
        v_eve = 1.0 + 2.0 * transmittance * excess_noise / (1.0 - transmittance)
    return t_eve, v_eve


def optimal_k(params: ProtocolParams) -> float:
    """Estimator-gate strength minimising Bob's conditional variance.

    Homodyne picks up a factor 2 relative to heterodyne because Bob's
    reference arm is halved by his 50/50 split while the signal arm is not.
    """
    t = params.channel.transmittance
    g = params.amplifier.effective_gain
    eta = params.detector.efficiency
    factor = 2.0 if params.detector.kind == HOMODYNE else 1.0
    return math.sqrt(
        factor * eta * g * params.t_a * t * t * (params.v_b - 1.0) / (params.v_b + 1.0)
    )


def source_state(params: ProtocolParams) -> CovarianceMatrix:
    """Pure seven-mode pre-attack state: three EPR pairs and one vacuum."""
    t_chan = params.channel.transmittance
    _, v_eve = eve_parameters(t_chan, params.t_a, params.channel.excess_noise)
    state = epr_state(params.v_a, ("A1", "A2"))
    state = tensor(state, epr_state(params.v_b, ("B1", "B2")))
    state = tensor(state, epr_state(v_eve, ("E1", "E2")))
    return tensor(state, vacuum_state(1, ("E0",)))


def attack_transform(params: ProtocolParams) -> np.ndarray:
    """Composed symplectic matrix of the full attack network.

    Acts on quadratures ordered by SOURCE_MODES; after it acts, the slots
    hold ATTACK_OUTPUT_MODES.  The chain is: Eve splits her cloner arm
    (T_E), the forward pass mixes Bob's outgoing arm with one Eve output
    (T1), Alice taps the line (t_A), the backward pass mixes in the other
    Eve output (T2).
    """
    t_chan = params.channel.transmittance
    t_eve, _ = eve_parameters(t_chan, params.t_a, params.channel.excess_noise)
    steps = (
        (beam_splitter(t_eve), ("E2", "E0")),  # -> (E3, E5)
        (beam_splitter(t_chan), ("B2", "E3")),  # -> (A_in, E4)
        (beam_splitter(params.t_a), ("A_in", "A2")),  # -> (A_out, A3)
        (beam_splitter(t_chan), ("A_out", "E5")),  # -> (B3, E6)
    )
    # Slot labels evolve as the network acts; track them so each step embeds
    # against the current occupancy.
    slots = list(SOURCE_MODES)
    renames = {"E2": "E3", "E0": "E5", "B2": "A_in", "E3": "E4", "A_in": "A_out",
               "A2": "A3", "A_out": "B3", "E5": "E6"}
    total = np.eye(2 * len(slots))
    for transform, targets in steps:
        total = embed_transform(transform, slots, targets) @ total
        slots = [renames.get(s, s) if s in targets else s for s in slots]
    assert tuple(slots) == ATTACK_OUTPUT_MODES
    return total


def global_attack_state(params: ProtocolParams) -> CovarianceMatrix:
    """All seven modes after the attack network; pure by construction."""
    s = attack_transform(params)
    src = source_state(params)
    return CovarianceMatrix(ATTACK_OUTPUT_MODES, s @ src.data @ s.T)


def joint_state_by_propagation(params: ProtocolParams) -> CovarianceMatrix:
    """Retained (A1, A3, B1, B3) covariance by explicit propagation."""
    return global_attack_state(params).restricted(RETAINED_MODES)


def joint_state_closed_form(params: ProtocolParams) -> CovarianceMatrix:
    """Retained (A1, A3, B1, B3) covariance, assembled entry by entry.

    The V_E coefficient in the A3 diagonal entry is (1-t_A)(1-T)/(1+T t_A),
    i.e. (1-t_A)(1-T1) T_E: the cloner reaches Alice's tap only through the
    forward-pass reflection and Eve's own splitter.
    """
    t = params.channel.transmittance
    ta = params.t_a
    va, vb = params.v_a, params.v_b
    t_eve, v_eve = eve_parameters(t, ta, params.channel.excess_noise)

    gamma_a3 = (
        ta * va
        + (1.0 - ta) * t * vb
        + (1.0 - ta) * (1.0 - t) * t_eve * v_eve
        + (1.0 - ta) * (1.0 - t) * t * ta * t_eve
    )
    gamma_b3 = (
        ta * t * t * vb
        + (1.0 - ta) * t * va
        + (1.0 - t) * (1.0 + t * ta)
    )

    eye = np.eye(2)
    a1_a3 = math.sqrt(ta * (va * va - 1.0)) * SIGMA_Z
    a1_b3 = math.sqrt(t * (1.0 - ta) * (va * va - 1.0)) * SIGMA_Z
    a3_b1 = -math.sqrt(t * (1.0 - ta) * (vb * vb - 1.0)) * SIGMA_Z
    a3_b3 = math.sqrt(t * ta * (1.0 - ta)) * (va - t * vb - 1.0 + t) * eye
    b1_b3 = t * math.sqrt(ta * (vb * vb - 1.0)) * SIGMA_Z
    zero = np.zeros((2, 2))

    gamma = np.block(
        [
            [va * eye, a1_a3, zero, a1_b3],
            [a1_a3.T, gamma_a3 * eye, a3_b1, a3_b3],
            [zero, a3_b1.T, vb * eye, b1_b3],
            [a1_b3.T, a3_b3.T, b1_b3.T, gamma_b3 * eye],
        ]
    )
    return CovarianceMatrix(RETAINED_MODES, gamma)


def _heterodyne_split(
    state: CovarianceMatrix, mode: str, x_label: str, p_label: str
) -> CovarianceMatrix:
    """50/50-split a mode against vacuum into an x arm and a p arm."""
    scratch = "_vac_" + mode
    state = tensor(state, vacuum_state(1, (scratch,)))
    state = apply(beam_splitter(0.5), state, (mode, scratch))
    return state.renamed({mode: x_label, scratch: p_label})


def _detector_stage(
    state: CovarianceMatrix, detector: DetectorModel, signal: str
) -> CovarianceMatrix:
    """Mix the signal with one arm of the detector's noise-loaded EPR pair.

    Kept uniform at unit efficiency (vacuum ancilla, transparent splitter)
    so every downstream matrix has the same shape.
    """
    state = tensor(state, epr_state(detector.ancilla_variance, ("F0", "G")))
    state = apply(beam_splitter(detector.efficiency), state, (signal, "F0"))
    return state.renamed({signal: "B5", "F0": "F"})


def receiver_chain_homodyne(
    params: ProtocolParams, estimator_gain: float | None = None
) -> CovarianceMatrix:
    """Bob's homodyne receiver on the retained state.

    Stages: split the kept arm B1 into x/p halves, phase-sensitive gain on
    the returned mode, inefficiency splitter, then the x-estimator gate.
    Returns modes (A1, A3, B1p, B6, Bx, F, G); Bob reads x of Bx.
    """
    if params.detector.kind != HOMODYNE:
        raise ValueError("homodyne chain needs a homodyne detector")
    if params.amplifier.kind not in ("none", "psa"):
        raise ValueError("homodyne chain takes amplifier kind 'none' or 'psa'")
    k = optimal_k(params) if estimator_gain is None else estimator_gain
    state = joint_state_closed_form(params)
    state = _heterodyne_split(state, "B1", "B1x", "B1p")
    state = state.reordered(("A1", "A3", "B1p", "B1x", "B3"))
    state = apply(psa(params.amplifier.effective_gain), state, ("B3",))
    state = _detector_stage(state, params.detector, "B3")
    state = apply(cnot_x(k), state, ("B5", "B1x"))
    return state.renamed({"B5": "Bx", "B1x": "B6"})


def receiver_chain_heterodyne(
    params: ProtocolParams, estimator_gain: float | None = None
) -> CovarianceMatrix:
    """Bob's heterodyne receiver on the retained state.

    Stages: split B1, phase-insensitive gain against an internal EPR(N)
    ancilla, inefficiency splitter, 50/50 split of the signal, then one
    estimator gate per quadrature.  Returns modes
    (A1, A3, B1p->B7, B1x->B6, Bx, I, J, F, G, Bp); Bob reads x of Bx and
    p of Bp.
    """
    if params.detector.kind != HETERODYNE:
        raise ValueError("heterodyne chain needs a heterodyne detector")
    if params.amplifier.kind not in ("none", "pia"):
        raise ValueError("heterodyne chain takes amplifier kind 'none' or 'pia'")
    k = optimal_k(params) if estimator_gain is None else estimator_gain
    amp = params.amplifier
    inherent = amp.inherent_noise if amp.kind == "pia" else 1.0
    state = joint_state_closed_form(params)
    state = _heterodyne_split(state, "B1", "B1x", "B1p")
    state = state.reordered(("A1", "A3", "B1p", "B1x", "B3"))
    state = tensor(state, epr_state(inherent, ("I0", "J")))
    state = apply(pia(amp.effective_gain), state, ("B3", "I0"))
    state = state.renamed({"B3": "B4", "I0": "I"})
    state = _detector_stage(state, params.detector, "B4")
    state = _heterodyne_split(state, "B5", "B5x", "B5p")
    state = apply(cnot_x(k), state, ("B5x", "B1x"))
    state = state.renamed({"B5x": "Bx", "B1x": "B6"})
    state = apply(cnot_p(k), state, ("B5p", "B1p"))
    return state.renamed({"B5p": "Bp", "B1p": "B7"})


def receiver_chain(
    params: ProtocolParams, estimator_gain: float | None = None
) -> CovarianceMatrix:
    """Dispatch to the chain matching the detector kind."""
    if params.detector.kind == HOMODYNE:
        return receiver_chain_homodyne(params, estimator_gain)
    return receiver_chain_heterodyne(params, estimator_gain)
