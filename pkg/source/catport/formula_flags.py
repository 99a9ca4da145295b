"""
Compare printed closed forms and quoted numbers against the simulation.

A FormulaFlag is raised whenever a printed value departs from the simulated
one by more than RELATIVE_TOLERANCE. Flags are findings, not failures.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import analytic_formulas
from .coherent_superposition import cat_superposition, overlap

logger = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-6
ABSOLUTE_FLOOR = 1e-9

STATED_AVERAGE_FIDELITY = {10.0: 0.947, 20.0: 0.971, 30.0: 0.980}
STATED_ORIGIN_CONCURRENCE = 0.936
STATED_OVERLAP_BOUND = 1e-3
STATED_COUNT_OUTCOME_BOUND = 1e-3
STATED_CONCURRENCE_PLATEAU = 0.999


@dataclass(frozen=True)
class FormulaFlag:
    key: str
    description: str
    printed: Optional[float]
    oracle: float
    deviation: Optional[float]
    context: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def relative_deviation(printed, oracle):
    if printed is None:
        return None
    return abs(printed - oracle) / max(abs(oracle), ABSOLUTE_FLOOR)


class FlagCollector:
    def __init__(self, context):
        self.context = context
        self.flags = []

    def compare(self, key, description, printed, oracle, **extra):
        if oracle is None:
            return None
        deviation = relative_deviation(printed, oracle)
        if deviation is not None and deviation <= RELATIVE_TOLERANCE:
            return None
        flag = FormulaFlag(key, description, _real(printed), float(oracle), deviation, {**self.context, **extra})
        self.flags.append(flag)
        logger.warning(f"formula flag {key}: printed {flag.printed} vs simulated {flag.oracle:.12g} ({description})")
        return flag

    def claim(self, key, description, stated, actual, holds, **extra):
        if holds:
            return None
        flag = FormulaFlag(key, description, float(stated), float(actual), relative_deviation(stated, actual), {**self.context, **extra})
        self.flags.append(flag)
        logger.warning(f"formula flag {key}: stated {stated} but simulation gives {actual:.12g}")
        return flag


def _real(value):
    if value is None:
        return None
    if isinstance(value, complex):
        return abs(value)
    return float(value)


def _constant_claims(collector):
    origin = analytic_formulas.channel_concurrence(1.0)
    collector.claim(
        "concurrence_origin",
        "channel concurrence quoted at the origin",
        STATED_ORIGIN_CONCURRENCE,
        origin,
        abs(origin - STATED_ORIGIN_CONCURRENCE) <= 5e-4,
    )
    overlap_at_3 = analytic_formulas.overlap_modulus_sq(math.sqrt(3.0), -math.sqrt(3.0))
    collector.claim(
        "coherent_overlap_bound",
        "|<alpha|-alpha>|^2 quoted below the bound for |alpha|^2 >= 3",
        STATED_OVERLAP_BOUND,
        overlap_at_3,
        overlap_at_3 < STATED_OVERLAP_BOUND,
    )
    plateau = analytic_formulas.channel_concurrence(math.exp(-3.0))
    collector.claim(
        "concurrence_plateau",
        "channel concurrence quoted above the plateau at |alpha|^2 = 3",
        STATED_CONCURRENCE_PLATEAU,
        plateau,
        plateau >= STATED_CONCURRENCE_PLATEAU,
    )


def _information_flags(collector, tree):
    info = tree.info
    dim = tree.policy.dim
    printed = analytic_formulas.printed_fock_coefficients(info, dim)
    collector.compare(
        "fock_coefficient_factorial",
        "Fock coefficients with n! in place of sqrt(n!), total weight",
        float(np.sum(np.abs(printed) ** 2)),
        analytic_formulas.normalization_by_summation(info, dim),
    )
    collector.compare(
        "normalization_cross_term",
        "normalization with x instead of x^2 on the cross term",
        analytic_formulas.printed_normalization(info),
        analytic_formulas.normalization_by_summation(info, dim),
    )
    _, printed_minus = analytic_formulas.printed_cat_amplitudes(info)
    collector.compare(
        "bloch_odd_amplitude",
        "odd-cat weight |A_-|^2 built from eps+ + eps-",
        abs(printed_minus) ** 2,
        abs(info.A_minus) ** 2,
    )


def _branch_flags(collector, tree):
    info = tree.info
    collector.compare(
        "case_i_probability",
        "probability of no click on either detector",
        analytic_formulas.case_i_probability(info),
        tree.branch("i").probability,
    )
    for case_id, sign in (("ii", "minus"), ("iii", "minus"), ("iv", "plus"), ("v", "plus")):
        collector.compare(
            f"branch_probability_{sign}",
            f"probability of case {case_id}",
            analytic_formulas.branch_probability(info, sign),
            tree.branch(case_id).probability,
            case=case_id,
        )
    collector.compare(
        "case_i_fidelity",
        "fidelity of the state left with Bob when neither detector clicks",
        analytic_formulas.case_i_fidelity(info),
        tree.case_i.simulated,
    )
    bob = tree.branch("i").bob_mode2_state
    if bob is not None:
        amplitude = info.alpha / math.sqrt(2.0)
        odd = abs(overlap(cat_superposition(amplitude, "odd", "2"), bob)) ** 2
        even = abs(overlap(cat_superposition(amplitude, "even", "2"), bob)) ** 2
        collector.compare(
            "case_i_state_parity",
            "no-click state written as the even cat, overlap with the simulated state",
            even,
            odd,
        )


def _cavity_flags(collector, tree, terms):
    for case_id, sign in (("ii", "minus"), ("iv", "plus")):
        if case_id not in tree.cavity:
            continue
        p_l, _ = tree.vnm_probabilities(case_id)
        collector.compare(
            "ground_probability_bracket",
            "atom-in-l probability with the constant outside the bracket",
            analytic_formulas.printed_ground_probability(terms, sign),
            p_l,
            sign=sign,
        )
        collector.compare(
            "ground_probability",
            "atom-in-l probability",
            analytic_formulas.ground_probability(terms, sign),
            p_l,
            sign=sign,
        )
        p_a = tree.situation_probability(case_id, "A")
        collector.compare(
            "situation_a_probability",
            "no photons on mode 9 after an l result",
            analytic_formulas.situation_A_probability(terms, sign),
            p_a,
            sign=sign,
        )
        collector.compare(
            "situation_a_fidelity",
            "fidelity when mode 9 is empty",
            analytic_formulas.situation_A_fidelity(terms, sign),
            tree.situation_fidelity(case_id, "A"),
            sign=sign,
        )
        if sign == "plus":
            collector.compare(
                "plus_vacuum_normalization",
                "norm^2 of |I> + p_I0|0> written as 1 + P_I0",
                analytic_formulas.printed_situation_A_norm_sq(terms, sign),
                p_a * 2.0 * (1.0 + terms.P_I0),
                sign=sign,
            )
        p_b = tree.situation_probability(case_id, "B")
        collector.compare(
            "situation_b_probability",
            "photons on mode 9 after an l result, summed over n",
            analytic_formulas.situation_B_probability(terms, sign),
            p_b,
            sign=sign,
        )
        f_b = tree.situation_fidelity(case_id, "B")
        if f_b is not None:
            collector.compare(
                "situation_b_fidelity", "fidelity of the vacuum left on mode 7", analytic_formulas.situation_B_fidelity(terms), f_b, sign=sign
            )
        if terms.mean_photon >= 5.0:
            collector.claim(
                "count_outcome_bound",
                "photons on mode 9 after an l result quoted as negligible for |alpha|^2 >= 5",
                STATED_COUNT_OUTCOME_BOUND,
                p_b,
                p_b <= STATED_COUNT_OUTCOME_BOUND,
                sign=sign,
            )
        for situation, prob_fn, fid_fn in (
            ("C_l", analytic_formulas.situation_Cl_probability, analytic_formulas.situation_Cl_fidelity),
            ("C_u", analytic_formulas.situation_Cu_probability, analytic_formulas.situation_Cu_fidelity),
        ):
            key = situation.lower()
            collector.compare(
                f"situation_{key}_probability", f"second-cavity result {situation}", prob_fn(terms, sign), tree.situation_probability(case_id, situation), sign=sign
            )
            simulated = tree.situation_fidelity(case_id, situation)
            if simulated is not None:
                collector.compare(f"situation_{key}_fidelity", f"fidelity after {situation}", fid_fn(terms), simulated, sign=sign)
                if situation == "C_u":
                    collector.compare(
                        "revival_excited_norm",
                        "C_u fidelity with the extra phi_n in the normalization",
                        analytic_formulas.printed_situation_Cu_fidelity(terms),
                        simulated,
                        sign=sign,
                    )


def _average_flags(collector, tree, terms, f_avg):
    info = tree.info
    sums, expansion, asymptotic = analytic_formulas.avg_fidelity_closed_form(info, terms)
    collector.compare("average_fidelity_sums", "average fidelity in closed form with exact sums", sums, f_avg)
    collector.compare("average_fidelity_expansion", "average fidelity with expanded sums", expansion, f_avg)
    collector.compare("average_fidelity_asymptotic", "leading large-amplitude average fidelity", asymptotic, f_avg)
    for mean_photon, stated in STATED_AVERAGE_FIDELITY.items():
        if abs(info.mean_photon - mean_photon) < 1e-9:
            collector.compare(
                "stated_average_fidelity",
                f"quoted average fidelity at |alpha|^2 = {mean_photon:g} against the leading formula",
                stated,
                asymptotic,
            )


def _expansion_flags(collector, tree, terms):
    info = tree.info
    if info.mean_photon < analytic_formulas.EXPANSION_MIN_MEAN_PHOTON:
        return
    s1, s2, s3 = analytic_formulas.approx_S(info)
    collector.compare("s1_approximation", "large-amplitude S1", s1, terms.S1)
    collector.compare("s2_approximation", "large-amplitude S2", s2, terms.S2)
    collector.compare("s3_approximation", "large-amplitude |S3|", abs(s3), abs(terms.S3))
    printed_first = analytic_formulas.printed_y_moments(info)[0]
    numeric_first = analytic_formulas.y_moments(info, tree.policy.dim)[0]
    collector.compare("y_moment_first", "first relative photon-number moment", printed_first, numeric_first)


def collect_formula_flags(tree, terms=None, f_avg=None):
    """Every printed-versus-simulated disagreement at one protocol point."""
    info = tree.info
    terms = terms or analytic_formulas.exact_sums(info, tree.params, tree.policy)
    f_avg = f_avg if f_avg is not None else analytic_formulas.avg_fidelity_exact(tree)
    collector = FlagCollector({"alpha_sq": info.mean_photon, "theta": info.theta, "phi": info.phi})
    _constant_claims(collector)
    _information_flags(collector, tree)
    _branch_flags(collector, tree)
    _cavity_flags(collector, tree, terms)
    _average_flags(collector, tree, terms, f_avg)
    _expansion_flags(collector, tree, terms)
    return collector.flags


class FlagLedger:
    """Flags aggregated by key over a sweep."""

    def __init__(self):
        self.entries = {}

    def add(self, flags):
        for flag in flags:
            entry = self.entries.get(flag.key)
            if entry is None:
                self.entries[flag.key] = {"flag": flag, "count": 1, "worst": flag.deviation}
                continue
            entry["count"] += 1
            if flag.deviation is not None and (entry["worst"] is None or flag.deviation > entry["worst"]):
                entry["worst"] = flag.deviation
                entry["flag"] = flag

    def keys(self):
        return sorted(self.entries)

    def to_records(self):
        records = []
        for key in self.keys():
            entry = self.entries[key]
            flag = entry["flag"]
            records.append(
                {
                    "key": key,
                    "description": flag.description,
                    "occurrences": entry["count"],
                    "worst_deviation": entry["worst"],
                    "printed": flag.printed,
                    "simulated": flag.oracle,
                    "context": flag.context,
                }
            )
        return records
