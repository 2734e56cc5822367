import numpy as np
import pytest

from convgate.core import PureState, apply_choi_channel, apply_operator, partial_trace
from convgate.errors import InvalidArgumentError
from convgate.gate import (
    ConversionPreset,
    GateSettings,
    apply_gate,
    build_gate,
    cluster_state_c4,
    convert_cluster,
    converted_cluster_amplitudes,
    dicke_angles,
    discord_demo_input,
    gate_coefficients,
    ideal_choi,
    preset,
    table1_rows,
    target_state,
)
from convgate.metrics import concurrence, purity

from conftest import random_pure_state


def state_fidelity(a: PureState, b: PureState) -> float:
    return abs(a.overlap(b)) ** 2


class TestCoefficients:
    def test_zero_settings(self):
        c = gate_coefficients(GateSettings(0.0, 0.0))
        assert (c.alpha1, c.beta1, c.alpha2, c.beta2) == (1.0, 0.0, 1.0, 0.0)
        assert c.mu1 == 1.0 and c.mu2 == 0.0

    def test_ghz_settings(self):
        c = gate_coefficients(GateSettings(0.0, np.pi / 4))
        assert c.alpha2 - c.beta2 == pytest.approx(-1.0, abs=1e-15)
        assert c.mu1 == pytest.approx(0.0, abs=1e-15)
        assert c.mu2 == pytest.approx(0.0, abs=1e-15)

    def test_bell_settings(self):
        c = gate_coefficients(GateSettings(3 * np.pi / 8, np.pi / 8))
        assert c.alpha1 - c.beta1 == pytest.approx(0.0, abs=1e-15)
        assert c.alpha2 - c.beta2 == pytest.approx(0.0, abs=1e-15)
        assert c.mu1 == pytest.approx(-0.5, abs=1e-15)
        assert c.mu2 == pytest.approx(0.5, abs=1e-15)

    def test_trig_identities_over_grid(self):
        for t1 in np.linspace(0, np.pi, 13):
            for t2 in np.linspace(0, np.pi, 13):
                c = gate_coefficients(GateSettings(t1, t2))
                assert c.alpha1 + c.beta1 == pytest.approx(1.0, abs=1e-14)
                assert c.alpha2 + c.beta2 == pytest.approx(1.0, abs=1e-14)
                assert abs(c.mu1) <= 1.0 + 1e-15 and abs(c.mu2) <= 1.0 + 1e-15


class TestBuildGate:
    def test_identity_settings(self):
        assert np.abs(build_gate(GateSettings(0.0, 0.0)) - np.eye(4)).max() < 1e-15

    def test_ghz_settings(self):
        g = build_gate(GateSettings(0.0, np.pi / 4))
        assert np.abs(g - np.diag([1.0, 0.0, 0.0, -1.0])).max() < 1e-15

    def test_bell_settings_central_block(self):
        g = build_gate(GateSettings(3 * np.pi / 8, np.pi / 8))
        assert abs(g[0, 0]) < 1e-15 and abs(g[3, 3]) < 1e-15
        assert np.abs(g[1:3, 1:3] - np.full((2, 2), -0.5)).max() < 1e-15

    def test_operator_norm_bounded(self, rng):
        for _ in range(200):
            s = GateSettings(rng.uniform(0, np.pi), rng.uniform(0, np.pi))
            assert np.linalg.norm(build_gate(s), ord=2) <= 1.0 + 1e-12

    def test_period_pi(self, rng):
        for _ in range(20):
            t1, t2 = rng.uniform(0, np.pi, 2)
            a = build_gate(GateSettings(t1, t2))
            b = build_gate(GateSettings(t1 + np.pi, t2))
            assert np.abs(a - b).max() < 1e-12

    def test_angles_must_be_finite(self):
        with pytest.raises(InvalidArgumentError):
            GateSettings(np.nan, 0.0)


class TestApplyGate:
    def test_identity(self, rng):
        psi = random_pure_state(rng, 2)
        out, prob = apply_gate(GateSettings(0.0, 0.0), psi)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert state_fidelity(out, psi) == pytest.approx(1.0, abs=1e-12)

    def test_entangler_on_minus_minus(self):
        out, prob = apply_gate(GateSettings(3 * np.pi / 8, np.pi / 8),
                               PureState.from_labels("--"))
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert state_fidelity(out, target_state("psi_plus")) == pytest.approx(1.0, abs=1e-12)
        assert concurrence(out.density()) == pytest.approx(1.0, abs=1e-10)

    def test_discord_setting_on_h_plus(self):
        out, prob = apply_gate(GateSettings(np.pi / 3, 0.0), PureState.from_labels("H+"))
        assert prob == pytest.approx(0.25, abs=1e-12)
        assert state_fidelity(out, PureState.from_labels("H+")) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_wrong_qubit_count(self):
        with pytest.raises(InvalidArgumentError):
            apply_gate(GateSettings(0.0, 0.0), cluster_state_c4())


class TestClusterState:
    def test_normalized(self):
        assert cluster_state_c4().norm_squared == pytest.approx(1.0, abs=1e-14)

    def test_single_qubit_marginal(self):
        reduced = partial_trace(cluster_state_c4().density(), {0})
        assert np.abs(reduced.matrix - np.eye(2) / 2).max() < 1e-12

    def test_overlap_with_all_horizontal(self):
        amp = cluster_state_c4().overlap(PureState.from_labels("HHHH"))
        assert amp == pytest.approx(0.5)


class TestConvertCluster:
    @pytest.mark.parametrize("kind,settings,expected", [
        (k, s, p) for k, s, p in table1_rows()
    ], ids=lambda v: str(v)[:24])
    def test_all_rows_probability_and_closed_form(self, kind, settings, expected):
        out, prob = convert_cluster(settings)
        assert prob == pytest.approx(float(expected), abs=1e-12)
        closed = PureState(converted_cluster_amplitudes(settings), normalize=True)
        assert state_fidelity(out, closed) >= 1.0 - 1e-10

    def test_ghz_row(self):
        out, prob = convert_cluster(GateSettings(0.0, np.pi / 4))
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert state_fidelity(out, target_state("ghz4")) == pytest.approx(1.0, abs=1e-12)

    def test_dicke_row_amplitude_pattern(self):
        tp, tm = dicke_angles()
        out, prob = convert_cluster(GateSettings(tp, tm))
        assert prob == pytest.approx(0.3, abs=1e-12)
        # derived pattern: -HHHH - VVVV + HHVV + VVHH - HVHV - VHVH, all 1/sqrt(6)
        amps = out.amplitudes
        signs = {0b0000: -1, 0b1111: -1, 0b0011: 1, 0b1100: 1, 0b0101: -1, 0b1010: -1}
        phase = amps[0b0011] * np.sqrt(6)  # global phase reference
        for idx in range(16):
            expected = signs.get(idx, 0) / np.sqrt(6) * phase
            assert amps[idx] == pytest.approx(expected, abs=1e-12)
        for q in range(4):
            reduced = partial_trace(out.density(), {q})
            assert np.abs(reduced.matrix - np.eye(2) / 2).max() < 1e-12

    def test_bell_row_factorizes(self):
        out, prob = convert_cluster(GateSettings(3 * np.pi / 8, np.pi / 8))
        assert prob == pytest.approx(0.25, abs=1e-12)
        assert state_fidelity(out, target_state("bell_pair_product")) >= 1.0 - 1e-12

    def test_success_probability_closed_form(self, rng):
        # norm of the converted state: [(a1-b1)^2 + (a2-b2)^2 + 2 mu1^2 + 2 mu2^2] / 4
        for _ in range(50):
            s = GateSettings(rng.uniform(0, np.pi), rng.uniform(0, np.pi))
            c = gate_coefficients(s)
            expected = ((c.alpha1 - c.beta1) ** 2 + (c.alpha2 - c.beta2) ** 2
                        + 2 * c.mu1**2 + 2 * c.mu2**2) / 4.0
            _, prob = convert_cluster(s)
            assert prob == pytest.approx(expected, abs=1e-12)

    def test_alternate_rows_match_canonical_up_to_local_correction(self):
        rows = table1_rows()
        canonical = {}
        for kind, settings, _ in rows:
            if kind not in canonical:
                canonical[kind] = convert_cluster(settings)[0]
                continue
            out, prob = convert_cluster(settings)
            _, prob_canon = convert_cluster(
                next(s for k, s, _ in rows if k == kind))
            assert prob == pytest.approx(prob_canon, abs=1e-12)
            base = canonical[kind]
            if kind == "dicke":
                # documented local correction: diag(1, i) on every qubit
                s_gate = np.diag([1.0, 1.0j])
                base = apply_operator(base, np.kron(np.kron(s_gate, s_gate),
                                                    np.kron(s_gate, s_gate)))
            assert state_fidelity(out, base) == pytest.approx(1.0, abs=1e-10)

    def test_consistency_operator_vs_closed_form_grid(self, rng):
        for _ in range(30):
            s = GateSettings(rng.uniform(0, np.pi), rng.uniform(0, np.pi))
            raw = apply_operator(cluster_state_c4(), build_gate(s), (1, 2))
            assert np.abs(raw.amplitudes - converted_cluster_amplitudes(s)).max() < 1e-13


class TestDickeAngles:
    def test_sine_relations(self):
        tp, tm = dicke_angles()
        assert np.sin(2 * tp) ** 2 == pytest.approx((5 + np.sqrt(5)) / 10, abs=1e-15)
        assert np.sin(2 * tm) ** 2 == pytest.approx((5 - np.sqrt(5)) / 10, abs=1e-15)

    def test_first_quadrant(self):
        tp, tm = dicke_angles()
        assert 0 < 2 * tm < 2 * tp < np.pi / 2


class TestPresets:
    def test_expected_success_values(self):
        assert float(preset("ghz").expected_success) == 0.5
        assert float(preset("dicke").expected_success) == 0.3
        assert float(preset("bell-pair").expected_success) == 0.25
        assert float(preset("cluster-identity").expected_success) == 1.0

    def test_demo_presets_have_no_success_column(self):
        assert preset("entangler").expected_success is None
        assert preset("discord-demo").expected_success is None

    def test_canonical_settings(self):
        s = preset("cluster-identity").settings
        assert (s.theta1, s.theta2) == (0.0, 0.0)
        s = preset("discord-demo").settings
        assert s.theta1 == pytest.approx(np.pi / 3)
        assert s.theta2 == 0.0

    def test_unknown_name(self):
        with pytest.raises(InvalidArgumentError):
            preset("w-state")

    def test_preset_type(self):
        assert isinstance(preset("ghz"), ConversionPreset)


class TestIdealChoi:
    def test_identity_preset(self, rng):
        chi = ideal_choi(GateSettings(0.0, 0.0))
        assert purity(chi) == pytest.approx(1.0, abs=1e-12)
        assert chi.success_scale == pytest.approx(1.0, abs=1e-12)

    def test_purity_one_for_all_presets(self):
        for kind, settings, _ in table1_rows():
            assert purity(ideal_choi(settings)) == pytest.approx(1.0, abs=1e-12)

    def test_rank_one(self):
        for name in ("ghz", "dicke", "bell-pair", "discord-demo"):
            vals = np.linalg.eigvalsh(ideal_choi(preset(name).settings).choi)
            assert vals[-2] < 1e-10

    def test_success_scale_equals_table_probability(self):
        for kind, settings, expected in table1_rows():
            assert ideal_choi(settings).success_scale == pytest.approx(
                float(expected), abs=1e-12)

    def test_agrees_with_apply_gate_on_random_inputs(self, rng):
        for name in ("ghz", "entangler", "discord-demo"):
            settings = preset(name).settings
            chi = ideal_choi(settings)
            for _ in range(30):
                psi = random_pure_state(rng, 2)
                out_chi, prob_chi = apply_choi_channel(psi.density(), chi)
                out_gate, prob_gate = apply_gate(settings, psi)
                assert prob_chi == pytest.approx(prob_gate, abs=1e-10)
                expected = np.outer(out_gate.amplitudes, out_gate.amplitudes.conj())
                assert np.abs(out_chi.matrix - expected).max() < 1e-10


class TestTargetStates:
    def test_normalization(self):
        for kind in ("cluster", "ghz4", "dicke4_2", "bell_pair_product",
                     "psi_plus", "phi_plus"):
            assert target_state(kind).norm_squared == pytest.approx(1.0, abs=1e-14)

    def test_dicke_marginals_maximally_mixed(self):
        rho = target_state("dicke4_2").density()
        for q in range(4):
            reduced = partial_trace(rho, {q})
            assert np.abs(reduced.matrix - np.eye(2) / 2).max() < 1e-12

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            target_state("w4")


def test_discord_demo_input_structure():
    rho = discord_demo_input()
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    reduced = partial_trace(rho, {0})
    assert np.abs(reduced.matrix - np.eye(2) / 2).max() < 1e-14
