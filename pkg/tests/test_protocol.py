"""Source, collective attack, retained state, and receiver chains."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoway_cvqkd.gaussian import symplectic_form, symplectic_spectrum
from twoway_cvqkd.protocol import (
    ATTACK_OUTPUT_MODES,
    DUAL_CONSTRUCTION_TOL,
    RETAINED_MODES,
    SOURCE_MODES,
    AmplifierSpec,
    ChannelModel,
    DetectorModel,
    ProtocolParams,
    SingularChannelError,
    attack_transform,
    channel_transmittance,
    eve_parameters,
    global_attack_state,
    joint_state_by_propagation,
    joint_state_closed_form,
    optimal_k,
    receiver_chain,
    receiver_chain_heterodyne,
    receiver_chain_homodyne,
    source_state,
)

HOMODYNE_MODES = ("A1", "A3", "B1p", "B6", "Bx", "F", "G")
HETERODYNE_MODES = ("A1", "A3", "B7", "B6", "Bx", "I", "J", "F", "G", "Bp")


def params_at(
    d: float,
    *,
    kind: str = "homodyne",
    eps: float = 0.02,
    t_a: float = 0.4,
    amp: AmplifierSpec | None = None,
) -> ProtocolParams:
    return ProtocolParams(
        channel=ChannelModel(distance_km=d, excess_noise=eps),
        detector=DetectorModel(kind=kind),
        amplifier=amp if amp is not None else AmplifierSpec(),
        t_a=t_a,
    )


class TestChannel:
    def test_transmittance_formula(self):
        assert channel_transmittance(0.2, 20.0) == pytest.approx(10.0 ** (-0.4))
        assert ChannelModel(distance_km=20.0).transmittance == pytest.approx(10.0 ** (-0.4))

    def test_eve_parameters(self):
        t_eve, v_eve = eve_parameters(0.5, 0.4, 0.02)
        assert t_eve == pytest.approx(1.0 / 1.2)
        assert v_eve == pytest.approx(1.0 + 2.0 * 0.5 * 0.02 / 0.5)

    def test_zero_excess_noise_gives_vacuum_cloner(self):
        _, v_eve = eve_parameters(0.5, 0.4, 0.0)
        assert v_eve == 1.0

    def test_excess_noise_on_lossless_line_is_singular(self):
        with pytest.raises(SingularChannelError):
            ChannelModel(distance_km=0.0, excess_noise=0.02)
        with pytest.raises(SingularChannelError):
            eve_parameters(1.0, 0.4, 0.1)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            ChannelModel(distance_km=-1.0)
        with pytest.raises(ValueError):
            ChannelModel(distance_km=10.0, excess_noise=-0.1)


class TestParameterValidation:
    def test_detector_bounds(self):
        with pytest.raises(ValueError):
            DetectorModel(kind="homodyne", efficiency=1.2)
        with pytest.raises(ValueError):
            DetectorModel(kind="homodyne", efficiency=0.0)
        with pytest.raises(ValueError):
            DetectorModel(kind="intensity")

    def test_unit_efficiency_needs_zero_electronic_noise(self):
        with pytest.raises(ValueError):
            DetectorModel(kind="homodyne", efficiency=1.0, electronic_noise=0.015)
        DetectorModel(kind="homodyne", efficiency=1.0, electronic_noise=0.0)

    def test_detector_ancilla_variance_scales(self):
        hom = DetectorModel(kind="homodyne", efficiency=0.552, electronic_noise=0.015)
        het = DetectorModel(kind="heterodyne", efficiency=0.552, electronic_noise=0.015)
        assert hom.ancilla_variance == pytest.approx(1.0 + 0.015 / (1.0 - 0.552))
        assert het.ancilla_variance == pytest.approx(1.0 + 2.0 * 0.015 / (1.0 - 0.552))

    def test_amplifier_bounds(self):
        with pytest.raises(ValueError):
            AmplifierSpec(kind="psa", gain=0.5)
        with pytest.raises(ValueError):
            AmplifierSpec(kind="pia", gain=2.0, inherent_noise=0.9)
        with pytest.raises(ValueError):
            AmplifierSpec(kind="psa", gain=2.0, inherent_noise=1.5)
        with pytest.raises(ValueError):
            AmplifierSpec(kind="edfa")

    def test_protocol_params_bounds(self):
        with pytest.raises(ValueError):
            params_at(20.0, t_a=0.0)
        with pytest.raises(ValueError):
            ProtocolParams(channel=ChannelModel(20.0), v_a=0.5)
        with pytest.raises(ValueError):
            ProtocolParams(channel=ChannelModel(20.0), beta=1.2)


class TestAttack:
    def test_source_modes_and_purity(self):
        state = source_state(params_at(20.0))
        assert state.modes == SOURCE_MODES
        assert list(symplectic_spectrum(state)) == pytest.approx([1.0] * 7, abs=1e-9)

    def test_attack_transform_symplectic(self):
        s = attack_transform(params_at(20.0))
        omega = symplectic_form(7)
        assert np.max(np.abs(s @ omega @ s.T - omega)) <= 1e-10

    def test_global_state_stays_pure(self):
        state = global_attack_state(params_at(35.0, eps=0.2))
        assert state.modes == ATTACK_OUTPUT_MODES
        assert list(symplectic_spectrum(state)) == pytest.approx([1.0] * 7, abs=1e-9)

    def test_retained_state_is_global_restriction(self):
        params = params_at(20.0)
        retained = joint_state_by_propagation(params)
        restriction = global_attack_state(params).restricted(RETAINED_MODES)
        assert retained.modes == RETAINED_MODES
        assert np.max(np.abs(retained.data - restriction.data)) <= 1e-12


class TestDualConstruction:
    @pytest.mark.parametrize("d", [0.5, 5.0, 20.0, 50.0, 90.0])
    @pytest.mark.parametrize("eps", [0.005, 0.02, 0.2])
    def test_closed_form_matches_propagation(self, d, eps):
        params = params_at(d, eps=eps)
        closed = joint_state_closed_form(params).data
        propagated = joint_state_by_propagation(params).data
        assert np.max(np.abs(closed - propagated)) <= DUAL_CONSTRUCTION_TOL

    @settings(deadline=None, max_examples=40)
    @given(
        d=st.floats(min_value=0.1, max_value=120.0),
        eps=st.floats(min_value=0.0, max_value=0.5),
        t_a=st.floats(min_value=0.05, max_value=1.0),
        v_a=st.floats(min_value=1.0, max_value=80.0),
        v_b=st.floats(min_value=1.0, max_value=80.0),
    )
    def test_agreement_over_parameter_space(self, d, eps, t_a, v_a, v_b):
        params = ProtocolParams(
            channel=ChannelModel(distance_km=d, excess_noise=eps),
            t_a=t_a,
            v_a=v_a,
            v_b=v_b,
        )
        closed = joint_state_closed_form(params).data
        propagated = joint_state_by_propagation(params).data
        assert np.max(np.abs(closed - propagated)) <= DUAL_CONSTRUCTION_TOL

    def test_lossless_noiseless_edge(self):
        params = ProtocolParams(channel=ChannelModel(distance_km=0.0, excess_noise=0.0))
        closed = joint_state_closed_form(params).data
        propagated = joint_state_by_propagation(params).data
        assert np.max(np.abs(closed - propagated)) <= DUAL_CONSTRUCTION_TOL

    def test_full_tap_decouples_alice(self):
        # at t_a = 1 nothing of the returning line reaches A3: the kept arm
        # pairs with A1 alone and all cross blocks to Bob vanish
        params = params_at(20.0, t_a=1.0)
        state = joint_state_closed_form(params)
        assert state.variance("A3", "x") == pytest.approx(params.v_a)
        assert state.covariance("A1", "x", "A3", "x") == pytest.approx(
            math.sqrt(params.v_a**2 - 1.0)
        )
        assert state.covariance("A3", "x", "B1", "x") == 0.0
        assert state.covariance("A3", "x", "B3", "x") == 0.0

    def test_retained_variances_match_construction(self):
        params = params_at(20.0)
        state = joint_state_closed_form(params)
        assert state.variance("A1", "x") == params.v_a
        assert state.variance("B1", "p") == params.v_b


class TestReceiverChains:
    def test_homodyne_output_modes(self):
        for amp in (AmplifierSpec(), AmplifierSpec("psa", 2.0)):
            state = receiver_chain_homodyne(params_at(20.0, amp=amp))
            assert state.modes == HOMODYNE_MODES

    def test_heterodyne_output_modes(self):
        for amp in (AmplifierSpec(), AmplifierSpec("pia", 15.0, 1.5)):
            state = receiver_chain_heterodyne(params_at(20.0, kind="heterodyne", amp=amp))
            assert state.modes == HETERODYNE_MODES

    def test_unit_efficiency_keeps_shape(self):
        params = ProtocolParams(
            channel=ChannelModel(20.0),
            detector=DetectorModel(kind="homodyne", efficiency=1.0, electronic_noise=0.0),
        )
        assert receiver_chain(params).modes == HOMODYNE_MODES

    def test_unit_gain_psa_is_transparent(self):
        bare = receiver_chain_homodyne(params_at(20.0))
        unit = receiver_chain_homodyne(params_at(20.0, amp=AmplifierSpec("psa", 1.0)))
        assert np.max(np.abs(bare.data - unit.data)) <= 1e-12

    def test_unit_gain_pia_decouples_its_ancilla(self):
        base = params_at(20.0, kind="heterodyne")
        bare = receiver_chain_heterodyne(base)
        unit = receiver_chain_heterodyne(
            params_at(20.0, kind="heterodyne", amp=AmplifierSpec("pia", 1.0, 3.0))
        )
        keep = [m for m in HETERODYNE_MODES if m not in ("I", "J")]
        assert np.max(
            np.abs(bare.restricted(keep).data - unit.restricted(keep).data)
        ) <= 1e-12

    def test_kind_mismatch_rejected(self):
        with pytest.raises(ValueError):
            receiver_chain_homodyne(params_at(20.0, kind="heterodyne"))
        with pytest.raises(ValueError):
            receiver_chain_heterodyne(params_at(20.0))
        with pytest.raises(ValueError):
            receiver_chain_homodyne(params_at(20.0, amp=AmplifierSpec("pia", 2.0)))
        with pytest.raises(ValueError):
            receiver_chain_heterodyne(
                params_at(20.0, kind="heterodyne", amp=AmplifierSpec("psa", 2.0))
            )

    def test_optimal_k_closed_form(self):
        params = params_at(20.0)
        t = params.channel.transmittance
        expected = math.sqrt(
            2.0
            * params.detector.efficiency
            * params.amplifier.effective_gain
            * params.t_a
            * t
            * t
            * (params.v_b - 1.0)
            / (params.v_b + 1.0)
        )
        assert optimal_k(params) == pytest.approx(expected)

        het = params_at(20.0, kind="heterodyne", amp=AmplifierSpec("pia", 15.0))
        expected_het = math.sqrt(
            params.detector.efficiency
            * 15.0
            * params.t_a
            * t
            * t
            * (params.v_b - 1.0)
            / (params.v_b + 1.0)
        )
        assert optimal_k(het) == pytest.approx(expected_het)

    def test_estimator_gate_cancels_source_correlation(self):
        # at the matched gain the published estimator minimises Var(Bx);
        # scanning around it must not find anything lower
        params = params_at(20.0)
        k_star = optimal_k(params)
        var_star = receiver_chain_homodyne(params, k_star).variance("Bx", "x")
        for scale in (0.9, 0.95, 1.05, 1.1):
            var = receiver_chain_homodyne(params, scale * k_star).variance("Bx", "x")
            assert var >= var_star - 1e-12
