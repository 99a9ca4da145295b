import math

import pytest

from catport import analytic_formulas
from catport.catport_error import DegenerateStateError, InvalidInformationError
from catport.coherent_superposition import overlap
from catport.fock_state import TruncationPolicy, fidelity
from catport.teleport_protocol import (
    CASE_IDS,
    MIN_MEAN_PHOTON,
    _after_first_splitter,
    alice_stage,
    bob_stage,
    build_channel,
    case_i_fidelity,
    detector_distribution,
    detector_distribution_fock,
    make_information,
    two_mode_target,
)

FIVE_PATTERNS = {("zero", "zero"), ("nze", "zero"), ("zero", "nze"), ("odd", "zero"), ("zero", "odd")}


@pytest.fixture(scope="module")
def info():
    return make_information(math.sqrt(2.0), theta=math.pi / 3.0, phi=0.4)


@pytest.fixture(scope="module")
def branches(info):
    return {branch.case_id: branch for branch in alice_stage(info, build_channel(info.alpha))}


class TestInformation:
    def test_bloch_input_is_normalized(self, info):
        assert info.norm_squared() == pytest.approx(1.0, abs=1e-12)
        assert abs(info.A_plus) ** 2 + abs(info.A_minus) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_bloch_angles_round_trip(self):
        info = make_information(1.2, theta=math.pi / 3.0, phi=0.7)
        assert info.theta == pytest.approx(math.pi / 3.0, abs=1e-12)
        assert info.phi == pytest.approx(0.7, abs=1e-12)

    def test_coefficients_are_rescaled(self):
        info = make_information(1.0, 1.0, 1.0)
        assert info.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_fock_sum_matches_normalization(self):
        info = make_information(math.sqrt(5.0), 0.3 + 0.4j, -0.8 + 0.1j)
        assert analytic_formulas.normalization_by_summation(info) == pytest.approx(1.0, abs=1e-10)

    def test_odd_information_has_no_vacuum(self):
        info = make_information(1.5, theta=0.0)
        assert info.P_I0 == pytest.approx(0.0, abs=1e-15)

    def test_resolvable_minimum_amplitude(self):
        info = make_information(math.sqrt(MIN_MEAN_PHOTON), theta=math.pi / 2.0, phi=0.3)
        assert info.norm_squared() == pytest.approx(1.0, abs=1e-12)
        assert abs(info.A_plus) ** 2 + abs(info.A_minus) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert abs(info.A_minus) ** 2 == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize(
        "args, kwargs",
        [
            ((1.0,), {}),
            ((1.0, 0.0, 0.0), {}),
            ((1.0, 1.0), {"theta": 1.0}),
            ((0.0,), {"theta": 0.5}),
            ((1e-9,), {"theta": math.pi / 2.0}),
            ((0.09,), {"theta": 1.0}),
            ((0.05j, 1.0, 1.0), {}),
        ],
    )
    def test_invalid_input(self, args, kwargs):
        with pytest.raises(InvalidInformationError):
            make_information(*args, **kwargs)


class TestChannel:
    def test_normalized(self):
        channel = build_channel(1.0)
        assert overlap(channel, channel).real == pytest.approx(1.0, abs=1e-12)

    def test_vanishes_at_zero(self):
        with pytest.raises(DegenerateStateError):
            build_channel(0.0)


class TestAliceStage:
    def test_probabilities_are_complete(self, branches):
        assert sum(b.probability for b in branches.values()) == pytest.approx(1.0, abs=1e-9)

    def test_probabilities_match_closed_forms(self, info, branches):
        assert branches["i"].probability == pytest.approx(analytic_formulas.case_i_probability(info), abs=1e-9)
        for case_id, sign in (("ii", "minus"), ("iii", "minus"), ("iv", "plus"), ("v", "plus")):
            assert branches[case_id].probability == pytest.approx(analytic_formulas.branch_probability(info, sign), abs=1e-9)

    def test_paired_cases_are_degenerate(self, branches):
        assert branches["ii"].probability == pytest.approx(branches["iii"].probability, abs=1e-10)
        assert branches["iv"].probability == pytest.approx(branches["v"].probability, abs=1e-10)

    def test_first_splitter_leaves_four_terms(self, info):
        state = _after_first_splitter(info, build_channel(info.alpha))
        a, r = info.alpha, info.alpha / math.sqrt(2.0)
        expected = [
            (math.sqrt(2.0) * a, 0.0, r),
            (0.0, math.sqrt(2.0) * a, -r),
            (0.0, -math.sqrt(2.0) * a, r),
            (-math.sqrt(2.0) * a, 0.0, -r),
        ]
        assert state.modes == ("3", "4", "2")
        assert len(state.simplify()) == 4
        for (_, labels), want in zip(state.terms, expected):
            assert labels == pytest.approx(want, abs=1e-12)

    def test_only_five_patterns_occur(self, info):
        distribution = detector_distribution(info, build_channel(info.alpha))
        assert len(distribution) == 9
        for pattern, probability in distribution.items():
            if pattern not in FIVE_PATTERNS:
                assert probability < 1e-10

    def test_fock_oracle_agrees(self):
        info = make_information(1.0, theta=2.0, phi=1.1)
        channel = build_channel(info.alpha)
        exact = detector_distribution(info, channel)
        fock = detector_distribution_fock(info, channel)
        for pattern in exact:
            assert exact[pattern] == pytest.approx(fock[pattern], abs=1e-9)

    def test_branches_near_one_quarter(self):
        info = make_information(math.sqrt(10.0), theta=math.pi / 2.0)
        for branch in alice_stage(info, build_channel(info.alpha)):
            if branch.case_id != "i":
                assert 0.249 <= branch.probability <= 0.251
        assert [b.case_id for b in alice_stage(info, build_channel(info.alpha))] == list(CASE_IDS)


class TestCaseI:
    def test_closed_form_matches_overlap(self, info):
        result = case_i_fidelity(info)
        assert result.simulated == pytest.approx(result.closed_form, abs=1e-10)

    def test_equal_coefficients_give_zero(self):
        result = case_i_fidelity(make_information(1.5, 1.0, 1.0))
        assert result.closed_form == pytest.approx(0.0, abs=1e-15)
        assert result.simulated == pytest.approx(0.0, abs=1e-15)


class TestBobStage:
    @pytest.mark.parametrize("case_id", ["ii", "iii", "iv", "v"])
    def test_output_matches_two_mode_target(self, info, branches, case_id):
        policy = TruncationPolicy.for_mean(info.mean_photon)
        branch = branches[case_id]
        state = bob_stage(branch, policy)
        assert fidelity(state, two_mode_target(info, branch.sign, policy)) >= 1.0 - 1e-9

    def test_paired_cases_agree_up_to_sign(self, info, branches):
        policy = TruncationPolicy.for_mean(info.mean_photon)
        assert fidelity(bob_stage(branches["ii"], policy), bob_stage(branches["iii"], policy)) == pytest.approx(1.0, abs=1e-9)
        assert fidelity(bob_stage(branches["iv"], policy), bob_stage(branches["v"], policy)) == pytest.approx(1.0, abs=1e-9)

    def test_output_is_antisymmetric_for_minus(self, info, branches):
        policy = TruncationPolicy.for_mean(info.mean_photon)
        state = bob_stage(branches["ii"], policy)
        swapped = state.amps.T
        assert abs(complex((state.amps.conj() * swapped).sum()) + 1.0) < 1e-9

    def test_case_i_has_no_recovery(self, branches):
        with pytest.raises(InvalidInformationError):
            bob_stage(branches["i"])
