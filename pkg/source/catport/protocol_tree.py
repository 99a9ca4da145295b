import logging
from dataclasses import dataclass, replace
from typing import Optional

from .catport_error import IncompleteTreeError
from .coherent_superposition import EcsPair, ecs_concurrence
from .fock_state import TruncationPolicy
from .jaynes_cummings import JcParams, stage_cavity_C, vnm_probabilities
from .teleport_protocol import (
    CaseIFidelity,
    InformationSpec,
    alice_stage,
    bob_stage,
    build_channel,
    case_i_fidelity,
    information_fock,
)

logger = logging.getLogger(__name__)

RECOVERY_RANGE = (5.0, 30.0)


@dataclass(frozen=True)
class Leaf:
    case_id: str
    situation: str
    branch_probability: float
    conditional_probability: float
    fidelity: Optional[float]

    @property
    def joint_probability(self):
        return self.branch_probability * self.conditional_probability


@dataclass(frozen=True)
class OutcomeTree:
    """Every measurement record of one protocol run with its probability and fidelity."""

    info: InformationSpec
    policy: TruncationPolicy
    params: JcParams
    concurrence: float
    branches: tuple
    cavity: dict
    case_i: CaseIFidelity
    leaves: tuple

    def branch(self, case_id):
        for branch in self.branches:
            if branch.case_id == case_id:
                return branch
        raise KeyError(case_id)

    def total_probability(self):
        return sum(leaf.joint_probability for leaf in self.leaves)

    def check_complete(self, tolerance=1e-9):
        total = self.total_probability()
        if abs(total - 1.0) > tolerance:
            raise IncompleteTreeError(f"leaf probabilities sum to {total:.12g} for {self.info.describe()}")
        return total

    def situation_probability(self, case_id, situation):
        """Probability of a situation given the branch; "B" sums every B_n."""
        return sum(
            outcome.probability for outcome in self.cavity.get(case_id, ()) if _matches(outcome, situation)
        )

    def situation_fidelity(self, case_id, situation):
        """Probability-weighted fidelity of a situation given the branch."""
        matching = [o for o in self.cavity.get(case_id, ()) if _matches(o, situation) and o.fidelity is not None]
        weight = sum(o.probability for o in matching)
        if weight <= 0.0:
            return None
        return sum(o.probability * o.fidelity for o in matching) / weight

    def vnm_probabilities(self, case_id):
        return vnm_probabilities(self.cavity.get(case_id, ()))


def _matches(outcome, situation):
    return outcome.situation == situation or outcome.label == situation


def evaluate_protocol(info, policy=None, params=None):
    """Run Alice, Bob and both cavities for one information state."""
    policy = policy or TruncationPolicy.for_mean(info.mean_photon)
    params = params or JcParams.for_information(info)
    channel = build_channel(info.alpha)
    information = information_fock(info, policy)
    case_i = case_i_fidelity(info)

    branches, cavity, leaves = [], {}, []
    for branch in alice_stage(info, channel):
        if branch.case_id == "i":
            leaves.append(Leaf("i", "stuck", branch.probability, 1.0, case_i.simulated))
        elif branch.bob_mode2_state is not None:
            post_b2 = bob_stage(branch, policy)
            branch = replace(branch, post_b2_state=post_b2)
            outcomes = tuple(stage_cavity_C(post_b2, branch.sign, params, information))
            cavity[branch.case_id] = outcomes
            leaves.extend(
                Leaf(branch.case_id, outcome.label, branch.probability, outcome.probability, outcome.fidelity)
                for outcome in outcomes
            )
        branches.append(branch)

    tree = OutcomeTree(
        info=info,
        policy=policy,
        params=params,
        concurrence=ecs_concurrence(EcsPair.from_superposition(channel)),
        branches=tuple(branches),
        cavity=cavity,
        case_i=case_i,
        leaves=tuple(leaves),
    )
    logger.debug(f"{info.describe()}: {len(leaves)} leaves, total probability {tree.total_probability():.15f}")
    if RECOVERY_RANGE[0] <= info.mean_photon <= RECOVERY_RANGE[1]:
        _log_recovery_order(tree)
    return tree


def _log_recovery_order(tree):
    """The second cavity's lower-level record should recover better than the upper one."""
    for case_id in tree.cavity:
        lower = tree.situation_fidelity(case_id, "C_l")
        upper = tree.situation_fidelity(case_id, "C_u")
        if lower is not None and upper is not None and lower < upper:
            logger.warning(f"{tree.info.describe()}: case {case_id} C_l fidelity {lower:.6f} below C_u {upper:.6f}")
