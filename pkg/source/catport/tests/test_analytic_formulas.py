import math
import warnings
from dataclasses import replace

import pytest

from catport import analytic_formulas as af
from catport.catport_error import DegenerateStateError, IncompleteTreeError
from catport.protocol_tree import evaluate_protocol
from catport.teleport_protocol import InformationSpec, make_information


def information(mean_photon, theta=math.pi / 2.0, phi=0.0):
    return make_information(math.sqrt(mean_photon), theta=theta, phi=phi)


@pytest.fixture(scope="module")
def tree_at_10():
    return evaluate_protocol(information(10.0))


class TestChannelFormulas:
    def test_concurrence_limits(self):
        assert af.channel_concurrence(0.0) == 1.0
        assert af.channel_concurrence(1.0) == pytest.approx(2.0 * math.sqrt(2.0) / 3.0)

    def test_concurrence_at_three(self):
        assert af.channel_concurrence(math.exp(-3.0)) == pytest.approx(0.99888, abs=1e-5)

    def test_branch_probabilities_add_up(self):
        info = information(1.3, theta=1.1, phi=0.3)
        total = af.case_i_probability(info) + 2.0 * af.branch_probability(info, "minus") + 2.0 * af.branch_probability(info, "plus")
        assert total == pytest.approx(1.0, abs=1e-14)

    def test_unknown_sign(self):
        with pytest.raises(ValueError):
            af.branch_probability(information(2.0), "both")


class TestInformationFormulas:
    def test_printed_factorial_loses_weight(self):
        info = information(5.0, theta=1.0)
        dim = 60
        printed = sum(abs(c) ** 2 for c in af.printed_fock_coefficients(info, dim))
        assert printed < 0.5
        assert af.normalization_by_summation(info, dim) == pytest.approx(1.0, abs=1e-10)

    def test_printed_odd_amplitude_uses_the_sum(self):
        info = information(0.8, theta=math.pi / 3.0)
        _, printed_minus = af.printed_cat_amplitudes(info)
        assert abs(printed_minus) ** 2 != pytest.approx(abs(info.A_minus) ** 2, rel=1e-6)


class TestMoments:
    @pytest.mark.parametrize("mean_photon", [0.5, 3.0, 12.0])
    def test_identities_hold(self, mean_photon):
        report = af.moment_identities_check(information(mean_photon, theta=math.pi / 3.0, phi=0.5))
        assert report.passed, report.worst

    def test_first_y_moment_sign(self):
        info = information(2.0, theta=math.pi / 4.0)
        numeric = af.y_moments(info)[0]
        assert numeric == pytest.approx(-af.moment_parameter(info), abs=1e-10)
        assert af.printed_y_moments(info)[0] == pytest.approx(-numeric, abs=1e-10)

    def test_factorial_moment_even_order(self):
        info = information(4.0, theta=1.0, phi=2.0)
        assert af.factorial_moment(info, 2) == pytest.approx(16.0, rel=1e-10)


class TestSums:
    def test_sum_identity(self):
        info = information(6.0, theta=2.0, phi=1.0)
        terms = af.exact_sums(info)
        assert terms.S1 + terms.S2 == pytest.approx(1.0 - info.P_I0, abs=1e-10)

    def test_expansion_close_at_ten(self):
        info = information(10.0)
        s1, s2, _ = af.approx_S(info)
        terms = af.exact_sums(info)
        assert s1 == pytest.approx(terms.S1, abs=5e-3)
        assert s2 == pytest.approx(terms.S2, abs=5e-3)

    def test_expansion_warns_at_small_amplitude(self):
        with pytest.warns(af.DomainWarning):
            af.approx_S(information(2.0))

    def test_expansion_is_quiet_in_range(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            af.approx_S(information(10.0))

    def test_expansion_is_undefined_at_zero_amplitude(self):
        with pytest.raises(DegenerateStateError):
            af.approx_S(InformationSpec(0j, 1.0, 0.0))


class TestCavityFormulas:
    def test_minus_situation_a(self):
        terms = af.exact_sums(information(4.0, theta=2.5))
        assert af.situation_A_probability(terms, "minus") == 0.5
        assert af.situation_A_fidelity(terms, "minus") == pytest.approx(1.0 - terms.P_I0)

    def test_vnm_probabilities_add_up(self):
        terms = af.exact_sums(information(3.0, theta=2.0))
        for sign in ("minus", "plus"):
            total = af.ground_probability(terms, sign) + af.excited_probability(terms, sign)
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_printed_bracket_exceeds_one(self):
        terms = af.exact_sums(information(3.0, theta=2.0))
        assert af.printed_ground_probability(terms, "plus") > 1.0


class TestAverageFidelity:
    def test_asymptotic_value(self):
        assert af.average_fidelity_asymptotic(10.0) == pytest.approx(0.945204, abs=1e-6)

    def test_exact_at_ten(self, tree_at_10):
        assert af.avg_fidelity_exact(tree_at_10) == pytest.approx(0.94146, abs=2e-4)

    def test_exact_matches_rearranged_sums(self, tree_at_10):
        terms = af.exact_sums(tree_at_10.info, tree_at_10.params, tree_at_10.policy)
        assert af.avg_fidelity_exact(tree_at_10) == pytest.approx(af.average_fidelity_rearranged(tree_at_10.info, terms), abs=1e-9)

    def test_incomplete_tree(self, tree_at_10):
        pruned = replace(tree_at_10, leaves=tree_at_10.leaves[:-1])
        with pytest.raises(IncompleteTreeError):
            af.avg_fidelity_exact(pruned)

    def test_closed_form_triple(self, tree_at_10):
        sums, expansion, asymptotic = af.avg_fidelity_closed_form(tree_at_10.info)
        assert asymptotic == af.average_fidelity_asymptotic(10.0)
        assert math.isfinite(sums) and math.isfinite(expansion)
