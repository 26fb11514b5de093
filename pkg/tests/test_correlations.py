import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavnet import correlations as corr
from cavnet import model, qla

from conftest import haar_unitary, random_density, random_pure

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def bell_phi_plus():
    v = (qla.ket("GG").amplitudes + qla.ket("EE").amplitudes) / math.sqrt(2)
    return qla.PureState(v, (2, 2)).density()


def two_qubit_state(theta):
    v = math.sin(theta) * qla.ket("GE").amplitudes + math.cos(theta) * qla.ket("EG").amplitudes
    return qla.PureState(v, (2, 2)).density()


def werner_discord_oracle(p):
    """Closed-form discord of the Werner family (Bell-diagonal states)."""
    eig = np.array([(1 + 3 * p) / 4] + [(1 - p) / 4] * 3)
    eig = eig[eig > 1e-15]
    s_ab = float(-(eig * np.log2(eig)).sum())
    cc = 0.0
    for sign in (1.0, -1.0):
        if 1 + sign * p > 1e-15:
            cc += (1 + sign * p) / 2 * math.log2(1 + sign * p)
    return (2.0 - s_ab) - cc


def ghz_state():
    v = (qla.ket("GGG").amplitudes + qla.ket("EEE").amplitudes) / math.sqrt(2)
    return qla.PureState(v, (2, 2, 2)).density()


def w_state():
    v = (
        qla.ket("EGG").amplitudes + qla.ket("GEG").amplitudes + qla.ket("GGE").amplitudes
    ) / math.sqrt(3)
    return qla.PureState(v, (2, 2, 2)).density()


class TestConcurrence:
    def test_bell_state(self):
        assert corr.concurrence(bell_phi_plus()) == pytest.approx(1.0, abs=1e-12)

    def test_product_state(self):
        assert corr.concurrence(qla.ket("GE").density()) == pytest.approx(0.0, abs=1e-12)

    def test_partially_entangled_pure(self):
        # C = sin(2 theta) for sin(theta)|GE> + cos(theta)|EG>.
        got = corr.concurrence(two_qubit_state(math.pi / 8))
        assert got == pytest.approx(math.sin(math.pi / 4), abs=1e-12)

    def test_werner_family_closed_form(self):
        for p in (0.0, 1 / 3, 0.5, 0.9, 1.0):
            want = max(0.0, (3 * p - 1) / 2)
            assert corr.concurrence(model.werner_state(p)) == pytest.approx(want, abs=1e-10)

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ValueError):
            corr.concurrence(qla.ket("GGG").density())

    @given(seed=seeds)
    def test_range_and_local_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, (2, 2))
        c = corr.concurrence(rho)
        assert -1e-12 <= c <= 1.0 + 1e-12
        u = np.kron(haar_unitary(rng, 2), haar_unitary(rng, 2))
        rotated = qla.density(u @ rho.matrix @ u.conj().T, (2, 2))
        assert corr.concurrence(rotated) == pytest.approx(c, abs=1e-9)


class TestEof:
    def test_endpoints(self):
        assert corr.eof_from_concurrence(0.0) == 0.0
        assert corr.eof_from_concurrence(1.0) == pytest.approx(1.0)

    def test_half_concurrence(self):
        # Direct evaluation of the binary-entropy formula.
        x = (1 + math.sqrt(1 - 0.25)) / 2
        oracle = -x * math.log2(x) - (1 - x) * math.log2(1 - x)
        assert corr.eof_from_concurrence(0.5) == pytest.approx(oracle, abs=1e-12)
        assert corr.eof_from_concurrence(0.5) == pytest.approx(0.354579, abs=1e-6)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            corr.eof_from_concurrence(1.5)

    def test_monotone(self):
        grid = np.linspace(0, 1, 21)
        vals = [corr.eof_from_concurrence(c) for c in grid]
        assert np.all(np.diff(vals) > 0)


class TestMutualInformation:
    def test_product_state(self):
        rho = qla.density(np.kron(np.diag([0.7, 0.3]), np.diag([0.2, 0.8])), (2, 2))
        assert corr.mutual_information(rho) == pytest.approx(0.0, abs=1e-12)

    def test_bell_state(self):
        assert corr.mutual_information(bell_phi_plus()) == pytest.approx(2.0, abs=1e-12)

    def test_classical_mixture(self):
        m = (qla.ket("GG").density().matrix + qla.ket("EE").density().matrix) / 2
        assert corr.mutual_information(qla.density(m, (2, 2))) == pytest.approx(1.0, abs=1e-12)


class TestClassicalCorrelationAndDiscord:
    def test_bell_state(self):
        cc, basis = corr.classical_correlation(bell_phi_plus())
        assert cc == pytest.approx(1.0, abs=1e-9)
        assert isinstance(basis, corr.MeasurementBasis)
        assert corr.quantum_discord(bell_phi_plus()) == pytest.approx(1.0, abs=1e-9)

    def test_product_state(self):
        rho = qla.density(np.kron(np.diag([0.7, 0.3]), np.diag([0.2, 0.8])), (2, 2))
        cc, _ = corr.classical_correlation(rho)
        assert cc == pytest.approx(0.0, abs=1e-9)
        assert corr.quantum_discord(rho) == pytest.approx(0.0, abs=1e-9)

    def test_maximally_mixed(self):
        rho = qla.density(np.eye(4) / 4, (2, 2))
        cc, _ = corr.classical_correlation(rho)
        assert cc == pytest.approx(0.0, abs=1e-9)

    def test_werner_matches_closed_form(self):
        for p in (0.2, 0.5, 0.8):
            got = corr.quantum_discord(model.werner_state(p))
            assert got == pytest.approx(werner_discord_oracle(p), abs=1e-6)

    def test_invalid_side(self):
        with pytest.raises(ValueError):
            corr.classical_correlation(bell_phi_plus(), measured="C")

    @given(p=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=200, deadline=None)
    def test_measured_side_symmetry_on_werner(self, p):
        rho = model.werner_state(p)
        cc_b, _ = corr.classical_correlation(rho, "B")
        cc_a, _ = corr.classical_correlation(rho, "A")
        assert cc_a == pytest.approx(cc_b, abs=1e-6)
        assert corr.quantum_discord(rho, "A") == pytest.approx(
            corr.quantum_discord(rho, "B"), abs=1e-6
        )

    @given(seed=seeds)
    def test_discord_nonnegative_and_consistent(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, (2, 2))
        mi = corr.mutual_information(rho)
        cc, _ = corr.classical_correlation(rho)
        q = corr.quantum_discord(rho)
        assert q >= 0.0
        assert q == pytest.approx(mi - cc, abs=1e-9)


class TestOneTangle:
    def test_bell_site(self):
        assert corr.one_tangle(bell_phi_plus(), 0) == pytest.approx(1.0, abs=1e-12)

    def test_product_pure(self):
        assert corr.one_tangle(qla.ket("GEG").density(), 1) == pytest.approx(0.0, abs=1e-12)

    @given(seed=seeds)
    def test_modes_agree_on_pure_states(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_pure(rng, (2,) * 6).density()
        site = int(rng.integers(0, 6))
        det_form = corr.one_tangle(rho, site, "det")
        purity_form = corr.one_tangle(rho, site, "purity")
        assert abs(det_form - purity_form) < 1e-12

    def test_site_out_of_range(self):
        with pytest.raises(ValueError):
            corr.one_tangle(bell_phi_plus(), 2)


class TestTangle:
    def test_ghz_reference(self):
        assert corr.tangle_pure(ghz_state(), 0) == pytest.approx(1.0, abs=1e-9)

    def test_w_state_monogamy_saturation(self):
        # Pairwise concurrences 2/3 each, one-tangle 8/9: zero residual.
        assert corr.monogamy_residual(w_state(), 0) == pytest.approx(0.0, abs=1e-9)
        assert corr.tangle_pure(w_state(), 0) == pytest.approx(0.0, abs=1e-9)

    def test_ghz_monogamy_residual(self):
        assert corr.monogamy_residual(ghz_state(), 0) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_mixed_input(self):
        mixed = qla.density(np.eye(8) / 8, (2, 2, 2))
        with pytest.raises(ValueError):
            corr.tangle_pure(mixed, 0)
        with pytest.raises(ValueError):
            corr.monogamy_residual(mixed, 0)

    @given(seed=seeds)
    def test_monogamy_holds_on_random_pure_states(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_pure(rng, (2, 2, 2, 2))
        assert corr.monogamy_residual(psi, 0) >= -1e-9


class TestTangleBounds:
    def test_pure_state_bounds_collapse(self):
        psi = ghz_state()
        b = corr.tangle_bounds(psi, 0)
        tau = corr.tangle_pure(psi, 0)
        assert b.lower == pytest.approx(b.upper, abs=1e-9)
        assert b.upper == pytest.approx(tau, abs=1e-9)

    def test_maximally_mixed_two_qubit_terms(self):
        rho = qla.density(np.eye(4) / 4, (2, 2))
        b = corr.tangle_bounds(rho, 0)
        # Upper-bound squared-correlation term 2(1 - 1/2) = 1; lower raw
        # term 2(1/4 - 1/2) = -0.5; no pairwise concurrence to subtract.
        assert b.upper_raw == pytest.approx(1.0, abs=1e-12)
        assert b.lower_raw == pytest.approx(-0.5, abs=1e-12)
        assert b.lower == 0.0

    @given(seed=seeds)
    def test_lower_never_exceeds_upper(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, (2, 2, 2), rank=int(rng.integers(1, 9)))
        b = corr.tangle_bounds(rho, int(rng.integers(0, 3)))
        assert b.lower_raw <= b.upper_raw + 1e-12
        purity = qla.purity(rho)
        if abs(b.upper_raw - b.lower_raw) < 1e-9:
            assert purity > 1.0 - 1e-8


class TestEntanglementSum:
    def test_initial_bell_pair(self, default_cfg):
        rho = model.build_initial_state(model.InitialStateSpec("psi_b", math.pi / 4), default_cfg)
        assert corr.entanglement_sum(rho) == pytest.approx(1.0, abs=1e-10)

    def test_product_state(self, default_cfg):
        rho = model.build_initial_state(model.InitialStateSpec("psi_a", 0.0), default_cfg)
        assert corr.entanglement_sum(rho) == pytest.approx(0.0, abs=1e-10)


class TestDelta:
    def test_single_excitation_product_state(self):
        res = corr.delta_fanchini(qla.ket("EGG").density())
        assert res.delta == pytest.approx(0.0, abs=1e-12)
        assert res.ssa_slack == pytest.approx(0.0, abs=1e-12)

    def test_vanishes_on_pure_tripartite_states(self):
        rng = np.random.default_rng(123)
        for _ in range(10):
            psi = random_pure(rng, (2, 2, 2))
            res = corr.delta_fanchini(psi.density())
            assert abs(res.delta) < 1e-5
            assert abs(res.ssa_slack) < 1e-5

    def test_orientation_flag_changes_result(self):
        rng = np.random.default_rng(9)
        psi = random_pure(rng, (2, 2, 2))
        partner = corr.delta_fanchini(psi.density(), "partner").delta
        reference = corr.delta_fanchini(psi.density(), "reference").delta
        assert abs(partner) < 1e-5
        assert abs(reference) > 1e-3

    def test_wrong_register_rejected(self):
        with pytest.raises(ValueError):
            corr.delta_fanchini(bell_phi_plus())


class TestPairSelector:
    def test_label_parsing(self):
        assert corr.PairSelector.from_label("33'") == corr.PairSelector(2, 5)
        assert corr.PairSelector.from_label("21'") == corr.PairSelector(1, 3)
        assert corr.PairSelector.from_label("1'2") == corr.PairSelector(3, 1)
        assert corr.PairSelector.from_label("12") == corr.PairSelector(0, 1)

    def test_malformed_labels(self):
        for bad in ("", "1", "123", "4'1", "x2"):
            with pytest.raises(ValueError):
                corr.PairSelector.from_label(bad)

    def test_identical_members_rejected(self):
        with pytest.raises(ValueError):
            corr.PairSelector(1, 1)

    def test_pair_state_order(self, default_cfg):
        # Reversing the pair order swaps the qubits of the reduction.
        rho = model.build_initial_state(model.InitialStateSpec("psi_a", 0.3), default_cfg)
        fwd = corr.pair_state(rho, corr.PairSelector(0, 3)).matrix
        rev = corr.pair_state(rho, corr.PairSelector(3, 0)).matrix
        swap = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                swap[j * 2 + i, i * 2 + j] = 1.0
        assert np.max(np.abs(rev - swap @ fwd @ swap.T)) < 1e-12


class TestReport:
    def test_report_consistency(self, default_cfg):
        rho = model.build_initial_state(model.InitialStateSpec("psi_b", math.pi / 3), default_cfg)
        report = corr.correlation_report(rho, ["11'", "33'"])
        assert report.pairs == ("11'", "33'")
        assert report.concurrence["11'"] == pytest.approx(math.sin(2 * math.pi / 3), abs=1e-9)
        assert report.discord["11'"] == pytest.approx(
            report.mutual_info["11'"] - report.classical_corr["11'"], abs=1e-12
        )
        assert report.tangle == pytest.approx(0.0, abs=1e-9)
        assert len(report.one_tangles) == 6
        assert report.delta is None
        assert report.tangle_bounds.lower <= report.tangle_bounds.upper

    def test_report_on_chain_state_includes_delta(self, default_cfg):
        rho = model.build_initial_state(model.InitialStateSpec("psi1_chain"), default_cfg)
        report = corr.correlation_report(rho, [corr.PairSelector(0, 1)])
        assert report.delta == pytest.approx(0.0, abs=1e-5)
