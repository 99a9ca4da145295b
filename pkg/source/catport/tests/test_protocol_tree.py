import math

import pytest

from catport import analytic_formulas
from catport.catport_error import IncompleteTreeError
from catport.protocol_tree import OutcomeTree, evaluate_protocol
from catport.teleport_protocol import make_information


@pytest.fixture(scope="module")
def tree():
    return evaluate_protocol(make_information(math.sqrt(5.0), theta=2.0, phi=0.6))


class TestOutcomeTree:
    def test_leaves_cover_every_outcome(self, tree):
        assert tree.check_complete() == pytest.approx(1.0, abs=1e-9)

    def test_case_i_is_a_single_stuck_leaf(self, tree):
        stuck = [leaf for leaf in tree.leaves if leaf.case_id == "i"]
        assert len(stuck) == 1
        assert stuck[0].situation == "stuck"
        assert stuck[0].fidelity == tree.case_i.simulated

    def test_every_recoverable_branch_has_a_cavity_stage(self, tree):
        assert set(tree.cavity) == {"ii", "iii", "iv", "v"}
        for case_id in tree.cavity:
            p_l, p_u = tree.vnm_probabilities(case_id)
            assert p_l + p_u == pytest.approx(1.0, abs=1e-9)
            assert tree.branch(case_id).post_b2_state is not None

    def test_count_outcomes_are_summed(self, tree):
        terms = analytic_formulas.exact_sums(tree.info, tree.params, tree.policy)
        assert tree.situation_probability("ii", "B") == pytest.approx(
            analytic_formulas.situation_B_probability(terms, "minus"), abs=1e-9
        )
        assert tree.situation_probability("ii", "B1") <= tree.situation_probability("ii", "B")

    def test_count_outcomes_decay(self):
        at_5 = evaluate_protocol(make_information(math.sqrt(5.0), theta=math.pi / 2.0))
        at_10 = evaluate_protocol(make_information(math.sqrt(10.0), theta=math.pi / 2.0))
        b_5, b_10 = at_5.situation_probability("ii", "B"), at_10.situation_probability("ii", "B")
        assert b_5 == pytest.approx(0.056, abs=2e-3)
        assert b_10 == pytest.approx(0.030, abs=2e-3)

    def test_paired_branches_agree(self, tree):
        for situation in ("A", "B", "C_l", "C_u"):
            assert tree.situation_probability("ii", situation) == pytest.approx(tree.situation_probability("iii", situation), abs=1e-9)
            assert tree.situation_probability("iv", situation) == pytest.approx(tree.situation_probability("v", situation), abs=1e-9)

    def test_missing_leaf_is_detected(self, tree):
        pruned = OutcomeTree(**{**tree.__dict__, "leaves": tree.leaves[1:]})
        with pytest.raises(IncompleteTreeError):
            pruned.check_complete()

    def test_unknown_branch(self, tree):
        with pytest.raises(KeyError):
            tree.branch("vi")


class TestAverageFidelityLimits:
    def test_recovery_fidelity_at_ten(self):
        for theta in (math.pi / 4.0, math.pi / 2.0, 3.0 * math.pi / 4.0):
            tree = evaluate_protocol(make_information(math.sqrt(10.0), theta=theta))
            assert tree.situation_fidelity("ii", "C_l") >= 0.99

    def test_weak_phase_dependence(self):
        fidelities = [
            analytic_formulas.avg_fidelity_exact(evaluate_protocol(make_information(math.sqrt(20.0), theta=math.pi / 2.0, phi=phi)))
            for phi in (0.0, math.pi / 2.0, math.pi)
        ]
        assert max(abs(f - fidelities[0]) for f in fidelities) < 1e-3

    def test_grows_with_amplitude(self):
        fidelities = [
            analytic_formulas.avg_fidelity_exact(evaluate_protocol(make_information(math.sqrt(mu), theta=math.pi / 2.0)))
            for mu in (5.0, 10.0, 15.0, 20.0)
        ]
        assert fidelities == sorted(fidelities)
        assert fidelities[0] == pytest.approx(0.8893, abs=2e-3)
