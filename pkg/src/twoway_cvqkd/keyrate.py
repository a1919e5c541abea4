"""Secret key rate against the two-mode collective attack.

K = beta * I(a:b) - chi(b:E).  The Holevo term uses the purity of the global
state: Eve's entropy equals the entropy of the retained (A1, A3, B1, B3)
block before Bob's receiver, and her conditional entropy is that of the
receiver-chain output with Bob's measured quadratures projected out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .gaussian import (
    CovarianceMatrix,
    SymplecticSpectrum,
    apply,
    beam_splitter,
    entropy_of_spectrum,
    homodyne_condition,
    symplectic_spectrum,
    tensor,
    vacuum_state,
)
from .protocol import (
    HETERODYNE,
    HOMODYNE,
    ProtocolParams,
    joint_state_closed_form,
    optimal_k,
    receiver_chain,
)


@dataclass(frozen=True)
class KeyRateResult:
    """One operating point: rate, its two terms, and the diagnostics."""

    key_rate: float
    mutual_information: float
    holevo_bound: float
    v_alice: float
    v_alice_given_bob: float
    estimator_gain: float
    spectrum_unconditional: SymplecticSpectrum
    spectrum_conditional: SymplecticSpectrum


def conditional_state(
    state: CovarianceMatrix, measurements: Sequence[tuple[str, str]]
) -> CovarianceMatrix:
    """Condition sequentially on (mode, quadrature) homodyne readouts."""
    for label, quadrature in measurements:
        state = homodyne_condition(state, label, quadrature)
    return state


def _split_alice(state: CovarianceMatrix) -> CovarianceMatrix:
    """Alice's heterodyne: 50/50-split A1 into an x arm Ax and a p arm Ap."""
    state = tensor(state, vacuum_state(1, ("_vac_A1",)))
    state = apply(beam_splitter(0.5), state, ("A1", "_vac_A1"))
    return state.renamed({"A1": "Ax", "_vac_A1": "Ap"})


def mutual_information(
    params: ProtocolParams, receiver_state: CovarianceMatrix
) -> tuple[float, float, float]:
    """Alice-Bob mutual information in bits per pulse.

    Returns (I, V_Ax, V_Ax|Bx).  Heterodyne counts both quadratures; by
    symmetry the p term equals the x term, but it is computed, not doubled.
    """
    state = _split_alice(receiver_state)
    v_ax = state.variance("Ax", "x")
    v_bx = state.variance("Bx", "x")
    if v_ax <= 0.0 or v_bx <= 0.0:
        raise ValueError("non-positive quadrature variance in the estimator")
    c_x = state.covariance("Ax", "x", "Bx", "x")
    v_ax_cond = v_ax - c_x * c_x / v_bx
    if v_ax_cond <= 0.0:
        raise ValueError("non-positive conditional variance in the estimator")
    info = 0.5 * math.log2(v_ax / v_ax_cond)
    if params.detector.kind == HETERODYNE:
        v_ap = state.variance("Ap", "p")
        v_bp = state.variance("Bp", "p")
        if v_ap <= 0.0 or v_bp <= 0.0:
            raise ValueError("non-positive quadrature variance in the estimator")
        c_p = state.covariance("Ap", "p", "Bp", "p")
        v_ap_cond = v_ap - c_p * c_p / v_bp
        if v_ap_cond <= 0.0:
            raise ValueError("non-positive conditional variance in the estimator")
        info += 0.5 * math.log2(v_ap / v_ap_cond)
    return info, v_ax, v_ax_cond


def holevo_bound(
    unconditional: CovarianceMatrix, conditional: CovarianceMatrix
) -> float:
    """chi(b:E) = S(E) - S(E|b) via purity: entropies of Alice-Bob blocks."""
    return entropy_of_spectrum(symplectic_spectrum(unconditional)) - entropy_of_spectrum(
        symplectic_spectrum(conditional)
    )


def secret_key_rate(
    params: ProtocolParams, estimator_gain: float | None = None
) -> KeyRateResult:
    """Asymptotic secret key rate at one operating point, unclamped.

    Negative values are reported as computed; callers decide what zero
    crossing means for them.
    """
    k = optimal_k(params) if estimator_gain is None else estimator_gain
    chain = receiver_chain(params, k)
    if params.detector.kind == HOMODYNE:
        measurements = (("Bx", "x"),)
    else:
        measurements = (("Bx", "x"), ("Bp", "p"))
    info, v_ax, v_ax_cond = mutual_information(params, chain)
    spectrum_unconditional = symplectic_spectrum(joint_state_closed_form(params))
    spectrum_conditional = symplectic_spectrum(conditional_state(chain, measurements))
    chi = entropy_of_spectrum(spectrum_unconditional) - entropy_of_spectrum(
        spectrum_conditional
    )
    return KeyRateResult(
        key_rate=params.beta * info - chi,
        mutual_information=info,
        holevo_bound=chi,
        v_alice=v_ax,
        v_alice_given_bob=v_ax_cond,
        estimator_gain=k,
        spectrum_unconditional=spectrum_unconditional,
        spectrum_conditional=spectrum_conditional,
    )
