import math

import numpy as np
import pytest

from catport.catport_error import (
    CutoffTooSmallError,
    DegenerateStateError,
    DimensionMismatchError,
    ModeMismatchError,
)
from catport.fock_state import (
    PHOTON_CLASSES,
    AtomState,
    TruncationPolicy,
    beamsplitter,
    beamsplitter_block,
    cat_state,
    coherent_state,
    fidelity,
    fock_state,
    measure_level,
    measure_photon_class,
    nze_state,
    poisson_tail,
    project,
    tensor,
    vacuum,
)


@pytest.fixture
def policy():
    return TruncationPolicy.for_mean(3.0)


class TestTruncationPolicy:
    def test_for_mean_meets_the_tail_bound(self):
        policy = TruncationPolicy.for_mean(10.0)
        assert poisson_tail(10.0, policy.dim) < 1e-12
        assert policy.covers(math.sqrt(10.0))

    def test_small_cutoff_is_rejected(self):
        with pytest.raises(CutoffTooSmallError):
            TruncationPolicy(10.0, 5)

    def test_coherent_state_beyond_cutoff_is_rejected(self):
        with pytest.raises(CutoffTooSmallError):
            coherent_state(6.0, TruncationPolicy.for_mean(1.0))


class TestSingleModeStates:
    def test_coherent_state_norm_and_mean(self, policy):
        state = coherent_state(1.5 + 0.5j, policy)
        assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)
        assert state.mean_photons("0") == pytest.approx(2.5, rel=1e-9)
        assert state.residual < 1e-12

    def test_cat_parity(self, policy):
        even = cat_state(1.2, "even", policy)
        odd = cat_state(1.2, "odd", policy)
        np.testing.assert_allclose(even.amps[1::2], 0.0)
        np.testing.assert_allclose(odd.amps[0::2], 0.0)
        assert abs(even.inner(odd)) < 1e-15

    def test_odd_cat_at_zero_amplitude(self, policy):
        with pytest.raises(DegenerateStateError):
            cat_state(0.0, "odd", policy)

    def test_nze_has_no_vacuum_or_odd_levels(self, policy):
        state = nze_state(1.0, policy)
        assert state.amps[0] == 0
        np.testing.assert_allclose(state.amps[1::2], 0.0)
        assert state.norm_squared() == pytest.approx(1.0)

    def test_fock_state_outside_cutoff(self):
        with pytest.raises(CutoffTooSmallError):
            fock_state(6, 6)

    def test_tail_bound_only_moves_the_cutoff(self):
        loose = coherent_state(1.5, TruncationPolicy(2.25, 16, 1e-6))
        tight = coherent_state(1.5, TruncationPolicy.for_mean(2.25, 1e-14))
        assert loose.dims[0] < tight.dims[0]
        assert loose.residual < 1e-6
        np.testing.assert_allclose(loose.amps, tight.amps[:16], atol=1e-9)

    def test_opposite_coherent_states(self):
        alpha = 0.8
        policy = TruncationPolicy.for_mean(alpha**2)
        value = fidelity(coherent_state(alpha, policy), coherent_state(-alpha, policy))
        assert value == pytest.approx(math.exp(-4.0 * alpha**2), rel=1e-9)


class TestBeamSplitter:
    def test_blocks_are_unitary(self):
        for total in range(31):
            block = beamsplitter_block(total)
            np.testing.assert_allclose(block.conj().T @ block, np.eye(total + 1), atol=1e-12)

    def test_single_photon_splits_evenly(self):
        state = tensor([fock_state(1, 4, "a"), vacuum(4, "b")])
        out = beamsplitter(state, "a", "b")
        assert out.amps[1, 0] == pytest.approx(1.0 / math.sqrt(2.0))
        assert out.amps[0, 1] == pytest.approx(1.0 / math.sqrt(2.0))

    def test_second_input_picks_up_the_minus_sign(self):
        state = tensor([vacuum(4, "a"), fock_state(1, 4, "b")])
        out = beamsplitter(state, "a", "b")
        assert out.amps[1, 0] == pytest.approx(1.0 / math.sqrt(2.0))
        assert out.amps[0, 1] == pytest.approx(-1.0 / math.sqrt(2.0))

    def test_photon_bunching(self):
        state = tensor([fock_state(1, 4, "a"), fock_state(1, 4, "b")])
        out = beamsplitter(state, "a", "b", out_a="c", out_b="d")
        assert out.labels == ("c", "d")
        assert abs(out.amps[1, 1]) < 1e-12
        assert abs(out.amps[2, 0]) ** 2 == pytest.approx(0.5)
        assert abs(out.amps[0, 2]) ** 2 == pytest.approx(0.5)

    def test_applying_twice_restores_the_state(self):
        state = tensor([fock_state(2, 6, "a"), fock_state(1, 6, "b")])
        twice = beamsplitter(beamsplitter(state, "a", "b"), "a", "b")
        np.testing.assert_allclose(twice.amps, state.amps, atol=1e-12)

    def test_mismatched_cutoffs(self):
        state = tensor([vacuum(4, "a"), vacuum(5, "b")])
        with pytest.raises(DimensionMismatchError):
            beamsplitter(state, "a", "b")

    def test_total_photon_number_is_conserved(self):
        policy = TruncationPolicy.for_mean(9.0)
        state = tensor([coherent_state(1.0, policy, "a"), fock_state(2, policy.dim, "b")])
        out = beamsplitter(state, "a", "b")
        assert out.mean_photons("a") + out.mean_photons("b") == pytest.approx(3.0, rel=1e-9)

    def test_equal_coherent_inputs_leave_one_port_dark(self):
        alpha = 1.2
        policy = TruncationPolicy.for_mean(2.0 * alpha**2)
        state = tensor([coherent_state(alpha, policy, "a"), coherent_state(alpha, policy, "b")])
        expected = tensor([coherent_state(math.sqrt(2.0) * alpha, policy, "a"), vacuum(policy.dim, "b")])
        assert fidelity(beamsplitter(state, "a", "b"), expected) >= 1.0 - 1e-9


class TestMeasurement:
    def test_photon_classes_are_complete(self, policy):
        state = coherent_state(1.5 + 0.5j, policy)
        total = sum(measure_photon_class(state, "0", cls)[0] for cls in PHOTON_CLASSES)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_probability_of_a_coherent_state(self, policy):
        state = coherent_state(1.5 + 0.5j, policy)
        probability, collapsed = measure_photon_class(state, "0", "zero")
        assert probability == pytest.approx(math.exp(-2.5), rel=1e-9)
        assert abs(collapsed.amps[0]) == pytest.approx(1.0)

    def test_impossible_outcome_returns_no_state(self, policy):
        probability, collapsed = measure_photon_class(cat_state(1.0, "even", policy), "0", "odd")
        assert probability < 1e-14
        assert collapsed is None

    def test_measure_level_drops_the_mode(self, policy):
        state = tensor([fock_state(2, 5, "a"), coherent_state(0.7, policy, "b")])
        probability, rest = measure_level(state, "a", 2)
        assert probability == pytest.approx(1.0)
        assert rest.labels == ("b",)

    def test_measure_level_needs_another_mode(self):
        with pytest.raises(ModeMismatchError):
            measure_level(vacuum(3), "0", 0)

    def test_atom_levels(self):
        assert AtomState.excited().to_fock("C").amps.tolist() == [0, 1]
        with pytest.raises(DegenerateStateError):
            AtomState(1.0, 1.0)


class TestStateAlgebra:
    def test_tensor_rejects_label_clash(self):
        with pytest.raises(ModeMismatchError):
            tensor([vacuum(3, "a"), vacuum(3, "a")])

    def test_fidelity_requires_equal_dims(self):
        with pytest.raises(DimensionMismatchError):
            fidelity(vacuum(3), vacuum(4))

    def test_fidelity_ignores_global_phase(self, policy):
        state = coherent_state(0.9, policy)
        assert fidelity(state, state.scaled(-1j)) == pytest.approx(1.0)

    def test_zero_state_is_degenerate(self):
        empty = project(fock_state(2, 4, "a"), "a", [True, False, False, False])
        with pytest.raises(DegenerateStateError):
            fidelity(empty, vacuum(4, "a"))
        with pytest.raises(DegenerateStateError):
            empty.mean_photons("a")

    def test_reordered_transposes(self):
        state = tensor([fock_state(1, 3, "a"), fock_state(2, 4, "b")])
        swapped = state.reordered(["b", "a"])
        assert swapped.dims == [4, 3]
        assert swapped.amps[2, 1] == 1
