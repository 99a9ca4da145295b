import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic_formulas
from .catport_error import (
    CutoffTooSmallError,
    DegenerateStateError,
    InvalidInformationError,
    InvariantViolation,
)
from .coherent_superposition import (
    CoherentSuperposition,
    apply_beamsplitter,
    cat_superposition,
    nze_superposition,
    overlap,
    partial_overlap,
    phase_shift,
    project_photon_class,
    superposition,
    tensor,
    to_fock,
)
from .fock_state import (
    MultiModeFockState,
    PHOTON_CLASSES,
    TruncationPolicy,
    beamsplitter,
    coherent_amplitudes,
    measure_photon_class,
)
from .fock_state import tensor as fock_tensor

logger = logging.getLogger(__name__)

# case id -> (detector pattern on modes 3, 4; Bob's phase shift; cat mixed in at the second splitter)
CASES = {
    "i": (("zero", "zero"), "identity", "none"),
    "ii": (("nze", "zero"), "identity", "odd"),
    "iii": (("zero", "nze"), "pi_shift", "odd"),
    "iv": (("odd", "zero"), "identity", "even"),
    "v": (("zero", "odd"), "pi_shift", "even"),
}
CASE_IDS = tuple(CASES)

# the two-mode output of the second splitter, |I,0> - |0,I> or |I,0> + |0,I>
CASE_SIGNS = {"ii": "minus", "iii": "minus", "iv": "plus", "v": "plus"}

# below this the |alpha> and |-alpha> labels are too close for the overlap algebra to stay complete to 1e-9
MIN_MEAN_PHOTON = 1e-2


def _one_minus_cat_overlap(mean_photon):
    """1 - <alpha|-alpha> = 1 - e^{-2|alpha|^2} without cancellation."""
    return -math.expm1(-2.0 * mean_photon)


@dataclass(frozen=True)
class InformationSpec:
    """Cat qubit eps_plus|alpha> + eps_minus|-alpha>, kept normalized."""

    alpha: complex
    eps_plus: complex
    eps_minus: complex

    @property
    def mean_photon(self):
        return abs(self.alpha) ** 2

    @property
    def x(self):
        return math.exp(-self.mean_photon)

    @property
    def cat_overlap(self):
        """<alpha|-alpha> = x^2."""
        return self.x**2

    @property
    def A_plus(self):
        return math.sqrt((1.0 + self.x**2) / 2.0) * (self.eps_plus + self.eps_minus)

    @property
    def A_minus(self):
        return math.sqrt(_one_minus_cat_overlap(self.mean_photon) / 2.0) * (self.eps_plus - self.eps_minus)

    @property
    def theta(self):
        return 2.0 * math.atan2(abs(self.A_plus), abs(self.A_minus))

    @property
    def phi(self):
        if abs(self.A_plus) < 1e-15 or abs(self.A_minus) < 1e-15:
            return 0.0
        return cmath.phase(self.A_plus / self.A_minus) % (2.0 * math.pi)

    @property
    def p_I0(self):
        return math.sqrt(self.x) * (self.eps_plus + self.eps_minus)

    @property
    def P_I0(self):
        return abs(self.p_I0) ** 2

    def norm_squared(self):
        """|eps+|^2 + |eps-|^2 + x^2 (eps+* eps- + c.c.)."""
        cross = 2.0 * (np.conj(self.eps_plus) * self.eps_minus).real
        return abs(self.eps_plus) ** 2 + abs(self.eps_minus) ** 2 + self.cat_overlap * cross

    def fock_coefficients(self, dim):
        """p_In = sqrt(x) (eps+ + (-1)^n eps-) alpha^n / sqrt(n!) for n < dim."""
        raw = coherent_amplitudes(self.alpha, dim)
        signs = (-1.0) ** np.arange(dim)
        return (self.eps_plus + signs * self.eps_minus) * raw

    def fock_probabilities(self, dim):
        return np.abs(self.fock_coefficients(dim)) ** 2

    def superposition(self, mode="0"):
        return superposition([(self.eps_plus, self.alpha), (self.eps_minus, -self.alpha)], mode)

    def describe(self):
        return (
            f"|alpha|^2={self.mean_photon:.4g} theta={self.theta:.4g} phi={self.phi:.4g} "
            f"eps+={self.eps_plus:.6g} eps-={self.eps_minus:.6g}"
        )


def make_information(alpha, eps_plus=None, eps_minus=None, *, theta=None, phi=0.0):
    """
    Build the information state from (eps_plus, eps_minus) or from Bloch angles.

    Bloch input sets A_+ = e^{i phi} sin(theta/2), A_- = cos(theta/2) on the
    even/odd cat basis and solves for the coherent-basis coefficients.
    """
    alpha = complex(alpha)
    bloch = theta is not None
    if bloch == (eps_plus is not None or eps_minus is not None):
        raise InvalidInformationError("give either eps_plus/eps_minus or theta/phi")

    mean_photon = abs(alpha) ** 2
    if not mean_photon >= MIN_MEAN_PHOTON:
        raise InvalidInformationError(
            f"|alpha|^2 = {mean_photon:.3g} is below the resolvable minimum {MIN_MEAN_PHOTON:g} (alpha = {alpha})"
        )
    if bloch:
        a_plus = cmath.exp(1j * phi) * math.sin(theta / 2.0)
        a_minus = complex(math.cos(theta / 2.0))
        even_part = a_plus / math.sqrt(2.0 * (1.0 + math.exp(-2.0 * mean_photon)))
        odd_part = a_minus / math.sqrt(2.0 * _one_minus_cat_overlap(mean_photon)) if abs(a_minus) > 1e-15 else 0j
        eps_plus, eps_minus = even_part + odd_part, even_part - odd_part
    else:
        eps_plus = complex(eps_plus if eps_plus is not None else 0.0)
        eps_minus = complex(eps_minus if eps_minus is not None else 0.0)

    info = InformationSpec(alpha, complex(eps_plus), complex(eps_minus))
    norm_sq = info.norm_squared()
    if not norm_sq > 1e-300:
        raise InvalidInformationError(f"information state is not normalizable (eps+={eps_plus}, eps-={eps_minus})")
    if abs(norm_sq - 1.0) > 1e-12:
        logger.debug(f"rescaling information coefficients by 1/sqrt({norm_sq:.12g})")
        scale = 1.0 / math.sqrt(norm_sq)
        info = InformationSpec(alpha, info.eps_plus * scale, info.eps_minus * scale)
    return info


def information_fock(info, policy, label="I"):
    if not policy.covers(info.alpha):
        raise CutoffTooSmallError(f"|alpha|^2 = {info.mean_photon:.4g} beyond cutoff {policy.dim}")
    coeffs = info.fock_coefficients(policy.dim)
    norm_sq = float(np.vdot(coeffs, coeffs).real)
    return MultiModeFockState(coeffs / math.sqrt(norm_sq), (label,), residual=max(0.0, 1.0 - norm_sq))


def build_channel(alpha):
    """Unequal-amplitude channel over modes 1, 2: (|alpha, alpha/sqrt2> - |-alpha, -alpha/sqrt2>) / sqrt(2(1-x^3))."""
    alpha = complex(alpha)
    if alpha == 0:
        raise DegenerateStateError("channel vanishes at alpha = 0")
    x = math.exp(-abs(alpha) ** 2)
    norm = math.sqrt(2.0 * (1.0 - x**3))
    first = (alpha, alpha / math.sqrt(2.0))
    second = (-first[0], -first[1])
    return CoherentSuperposition(("1", "2"), ((1.0 / norm, first), (-1.0 / norm, second)))


@dataclass(frozen=True)
class BranchRecord:
    """One detector outcome of Alice's photon counting and what Bob does with it."""

    case_id: str
    detector_outcome: tuple
    probability: float
    bob_mode2_state: Optional[CoherentSuperposition]
    cps_applied: str
    mixing_cat: str
    info: InformationSpec = field(repr=False)
    post_b2_state: Optional[MultiModeFockState] = field(default=None, repr=False)

    @property
    def sign(self):
        return CASE_SIGNS.get(self.case_id)


def _after_first_splitter(info, channel):
    state = tensor(info.superposition("0"), channel)
    return apply_beamsplitter(state, "0", "1", out_a="3", out_b="4")


def _detector_projection(state, outcome):
    return project_photon_class(project_photon_class(state, "3", outcome[0]), "4", outcome[1])


def detector_distribution(info, channel):
    """Probability of every (mode 3, mode 4) photon-class pair after the first splitter."""
    state = _after_first_splitter(info, channel)
    return {
        (c3, c4): max(0.0, overlap(projected, projected).real)
        for c3 in PHOTON_CLASSES
        for c4 in PHOTON_CLASSES
        for projected in [_detector_projection(state, (c3, c4))]
    }


def detector_distribution_fock(info, channel, policy=None):
    """The same distribution in truncated Fock space."""
    policy = policy or TruncationPolicy.for_mean(2.0 * info.mean_photon)
    state = fock_tensor([information_fock(info, policy, "0"), to_fock(channel, policy)])
    state = beamsplitter(state, "0", "1", out_a="3", out_b="4")
    distribution = {}
    for c3 in PHOTON_CLASSES:
        p3, collapsed = measure_photon_class(state, "3", c3)
        for c4 in PHOTON_CLASSES:
            p4 = measure_photon_class(collapsed, "4", c4)[0] if collapsed is not None else 0.0
            distribution[(c3, c4)] = p3 * p4
    return distribution


def _class_state(cls, amplitude, mode):
    if cls == "zero":
        return superposition([(1.0, 0.0)], mode)
    if cls == "nze":
        return nze_superposition(amplitude, mode)
    return cat_superposition(amplitude, "odd", mode)


def alice_stage(info, channel):
    """Mix modes 0 and 1, count photons on 3 and 4, return the five Table-style branches."""
    state = _after_first_splitter(info, channel)
    logger.debug(f"after first splitter: {len(state)} coherent terms, norm {state.norm_squared():.15f}")
    amplitude = math.sqrt(2.0) * info.alpha

    branches = []
    for case_id, (outcome, cps, mixing) in CASES.items():
        projected = _detector_projection(state, outcome)
        probability = max(0.0, overlap(projected, projected).real)
        bob = None
        if probability >= 1e-14:
            bra = tensor(_class_state(outcome[0], amplitude, "3"), _class_state(outcome[1], amplitude, "4"))
            bob = partial_overlap(bra, projected)
            bob_norm = bob.norm_squared()
            # the detector modes must factor out of the collapsed state
            if abs(bob_norm - probability) > 1e-9 * max(1.0, probability):
                raise InvariantViolation(
                    "bob-state-purity",
                    f"case {case_id}: conditional state weight {bob_norm:.3e} vs branch probability {probability:.3e}",
                )
            bob = bob.normalize()
        logger.debug(f"case {case_id} {outcome}: probability {probability:.12g}")
        branches.append(BranchRecord(case_id, outcome, probability, bob, cps, mixing, info))
    return branches


def case_i_target(info):
    """Bob's stuck state in case i, the odd cat at alpha/sqrt2."""
    return cat_superposition(info.alpha / math.sqrt(2.0), "odd", "0")


@dataclass(frozen=True)
class CaseIFidelity:
    simulated: float
    closed_form: float


def case_i_fidelity(info):
    """Fidelity of the case i state with the information, simulated and by closed form."""
    target = case_i_target(info)
    simulated = abs(overlap(info.superposition("0"), target)) ** 2
    return CaseIFidelity(float(simulated), analytic_formulas.case_i_fidelity(info))


def bob_stage(branch, policy=None):
    """Phase shift and cat mixing for cases ii-v; the result lives on modes 7, 8."""
    if branch.case_id not in CASE_SIGNS:
        raise InvalidInformationError(f"no recovery for case {branch.case_id!r}")
    if branch.bob_mode2_state is None:
        raise DegenerateStateError(f"case {branch.case_id} has zero probability")
    info = branch.info
    policy = policy or TruncationPolicy.for_mean(info.mean_photon)

    received = branch.bob_mode2_state.relabel({"2": "5"})
    if branch.cps_applied == "pi_shift":
        received = phase_shift(received, "5")
    cat = cat_superposition(info.alpha / math.sqrt(2.0), branch.mixing_cat, "6")
    mixed = apply_beamsplitter(tensor(received, cat), "5", "6", out_a="7", out_b="8").simplify()
    state = to_fock(mixed, policy).normalize()
    logger.debug(f"case {branch.case_id}: modes 7,8 mean photons {state.mean_photons('7'):.6g}, {state.mean_photons('8'):.6g}")
    return state


def two_mode_target(info, sign, policy):
    """Normalized |I,0> -/+ |0,I> on modes 7, 8 built from the Fock coefficients."""
    coeffs = info.fock_coefficients(policy.dim)
    vacuum = np.zeros(policy.dim, dtype=complex)
    vacuum[0] = 1.0
    factor = -1.0 if sign == "minus" else 1.0
    amps = np.multiply.outer(coeffs, vacuum) + factor * np.multiply.outer(vacuum, coeffs)
    return MultiModeFockState(amps, ("7", "8")).normalize()
