"""
Closed-form probabilities, fidelities and large-amplitude expansions of the
cat-state teleportation protocol, written the way they are printed in the
literature so they can be compared against the simulation.

Functions named printed_* reproduce an expression as published where it
disagrees with the exact value; everything else is exact unless its
docstring says otherwise. Sign arguments are "minus" for the
|I,0> - |0,I> branches and "plus" for |I,0> + |0,I>.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, perm

from .catport_error import DegenerateStateError, IncompleteTreeError
from .fock_state import TruncationPolicy
from .jaynes_cummings import JcParams

logger = logging.getLogger(__name__)

PI2 = math.pi**2
SQRT2 = math.sqrt(2.0)

# below this mean photon number the large-amplitude expansions are not trusted
EXPANSION_MIN_MEAN_PHOTON = 5.0


class DomainWarning(UserWarning):
    pass


def _sign(sign):
    if sign not in ("minus", "plus"):
        raise ValueError(f"sign must be 'minus' or 'plus', got {sign!r}")
    return -1.0 if sign == "minus" else 1.0


def _branch_norm(P_I0, sign):
    return 2.0 * (1.0 + _sign(sign) * P_I0)


# coherent states and the channel


def overlap_modulus_sq(alpha, beta):
    return math.exp(-abs(alpha - beta) ** 2)


def channel_norm_sq(x):
    return 2.0 * (1.0 - x**3)


def channel_concurrence(x):
    return (1.0 + x) * math.sqrt(1.0 + x**2) / (1.0 + x + x**2)


# information state


def printed_fock_coefficients(info, dim):
    """sqrt(x) (eps+ + (-1)^n eps-) alpha^n / n!, with n! where sqrt(n!) belongs."""
    n = np.arange(dim)
    power = np.exp(n * np.log(abs(info.alpha)) - gammaln(n + 1)) if info.alpha != 0 else (n == 0).astype(float)
    phase = np.exp(1j * n * np.angle(info.alpha))
    return math.sqrt(info.x) * (info.eps_plus + (-1.0) ** n * info.eps_minus) * power * phase


def printed_normalization(info):
    """|eps+|^2 + |eps-|^2 + x (eps+* eps- + c.c.), a single power of x on the cross term."""
    cross = 2.0 * (np.conj(info.eps_plus) * info.eps_minus).real
    return abs(info.eps_plus) ** 2 + abs(info.eps_minus) ** 2 + info.x * cross


def printed_cat_amplitudes(info):
    """A_+/- = sqrt((1 +/- x^2)/2) (eps+ + eps-), the same sum in both."""
    total = info.eps_plus + info.eps_minus
    return math.sqrt((1.0 + info.x**2) / 2.0) * total, math.sqrt((1.0 - info.x**2) / 2.0) * total


def normalization_by_summation(info, dim=None):
    dim = dim or TruncationPolicy.for_mean(info.mean_photon).dim
    return float(np.sum(info.fock_probabilities(dim)))


# photon counting after the first splitter


def case_i_probability(info):
    x = info.x
    return x * info.P_I0 / (1.0 + x + x**2)


def branch_probability(info, sign):
    """Probability of each of the two cases that leave |I,0> -/+ |0,I>."""
    x = info.x
    if sign == "minus":
        return (1.0 + x) ** 2 * (1.0 - info.P_I0) / (4.0 * (1.0 + x + x**2))
    _sign(sign)
    return (1.0 + x**2) * (1.0 + info.P_I0) / (4.0 * (1.0 + x + x**2))


def case_i_fidelity(info):
    x = info.x
    if x >= 1.0:
        return None
    return x ** (1.5 - SQRT2) * (1.0 - x**SQRT2) ** 2 * abs(info.eps_plus - info.eps_minus) ** 2 / (2.0 * (1.0 - x))


# cavity stage


@dataclass(frozen=True)
class AvgFidelityTerms:
    """
    The Fock sums behind the cavity-stage probabilities, all over n >= 1:
    S1 = sum P_n cos^2, S2 = sum P_n sin^2, S3 = sum p*_{n-1} p_n sin cos,
    S4 = sum P_n sin^4, Scs = sum P_n sin^2 cos^2, Scs_phi = sum P_n sin^2 cos^2 phi_n.
    """

    S1: float
    S2: float
    S3: complex
    S4: float
    Scs: float
    Scs_phi: float
    X: float
    k1: float
    k2: complex
    P_I0: float
    x: float
    mean_photon: float
    residual: float = field(default=0.0, compare=False)


def moment_parameter(info):
    """X = 2 x^2 (|eps+ + eps-|^2 - 1) / (1 - x^2)."""
    x = info.x
    if x >= 1.0:
        return None
    return 2.0 * x**2 * (abs(info.eps_plus + info.eps_minus) ** 2 - 1.0) / (1.0 - x**2)


def exact_sums(info, params=None, policy=None):
    params = params or JcParams.for_information(info)
    policy = policy or TruncationPolicy.for_mean(info.mean_photon)
    p = info.fock_coefficients(policy.dim)
    P = np.abs(p) ** 2
    phi = params.phi_n(np.arange(1, policy.dim))
    cos_sq, sin_sq = np.cos(phi) ** 2, np.sin(phi) ** 2
    sin_cos = np.sin(phi) * np.cos(phi)
    terms = AvgFidelityTerms(
        S1=float(np.sum(P[1:] * cos_sq)),
        S2=float(np.sum(P[1:] * sin_sq)),
        S3=complex(np.sum(np.conj(p[:-1]) * p[1:] * sin_cos)),
        S4=float(np.sum(P[1:] * sin_sq**2)),
        Scs=float(np.sum(P[1:] * sin_cos**2)),
        Scs_phi=float(np.sum(P[1:] * sin_cos**2 * phi)),
        X=moment_parameter(info),
        k1=abs(info.eps_plus) ** 2 - abs(info.eps_minus) ** 2,
        k2=info.x**2 * (np.conj(info.eps_plus) * info.eps_minus - info.eps_plus * np.conj(info.eps_minus)),
        P_I0=info.P_I0,
        x=info.x,
        mean_photon=info.mean_photon,
        residual=max(0.0, 1.0 - float(np.sum(P))),
    )
    logger.debug(f"exact sums at |alpha|^2={info.mean_photon:.4g}: S1={terms.S1:.12g} S2={terms.S2:.12g} S3={terms.S3:.12g}")
    return terms


def ground_probability(terms, sign):
    """Atom found in l after cavity C: [1 -/+ 2 P_I0 + sum_{n>=0} P_n cos^2] / (2 (1 -/+ P_I0))."""
    s = _sign(sign)
    return (1.0 + 2.0 * s * terms.P_I0 + terms.P_I0 + terms.S1) / _branch_norm(terms.P_I0, sign)


def printed_ground_probability(terms, sign):
    """The same with 1 -/+ 2 P_I0 added outside the bracket."""
    s = _sign(sign)
    return (terms.P_I0 + terms.S1) / _branch_norm(terms.P_I0, sign) + 1.0 + 2.0 * s * terms.P_I0


def excited_probability(terms, sign):
    return terms.S2 / _branch_norm(terms.P_I0, sign)


def situation_A_probability(terms, sign):
    if sign == "minus":
        return 0.5
    _sign(sign)
    return (1.0 + 3.0 * terms.P_I0) / (2.0 * (1.0 + terms.P_I0))


def situation_A_fidelity(terms, sign):
    P = terms.P_I0
    if sign == "minus":
        return 1.0 - P
    _sign(sign)
    return (1.0 + 2.0 * P + P**2) / (1.0 + 3.0 * P)


def printed_situation_A_norm_sq(terms, sign):
    """Squared norm of |I> -/+ p_I0|0> as printed, 1 -/+ P_I0."""
    return 1.0 + _sign(sign) * terms.P_I0


def situation_B_probability(terms, sign):
    """Summed over n >= 1."""
    return terms.S1 / _branch_norm(terms.P_I0, sign)


def situation_B_fidelity(terms):
    return terms.P_I0


def situation_Cl_probability(terms, sign):
    return terms.S4 / _branch_norm(terms.P_I0, sign)


def situation_Cl_fidelity(terms):
    if terms.S4 <= 0.0:
        return None
    return terms.S2**2 / terms.S4


def situation_Cu_probability(terms, sign):
    return terms.Scs / _branch_norm(terms.P_I0, sign)


def situation_Cu_fidelity(terms):
    if terms.Scs <= 0.0:
        return None
    return abs(terms.S3) ** 2 / terms.Scs


def printed_situation_Cu_fidelity(terms):
    """The denominator carries an extra factor phi_n inside the sum."""
    if terms.Scs_phi <= 0.0:
        return None
    return abs(terms.S3) ** 2 / terms.Scs_phi


# average fidelity


def _case_i_numerator(info, exponent):
    x = info.x
    return x**exponent * (1.0 - x**SQRT2) ** 2 * abs(info.eps_plus**2 - info.eps_minus**2) ** 2


def _sum_terms(terms):
    return 1.0 + terms.P_I0**2 + terms.P_I0 * terms.S1 + terms.S2**2 + abs(terms.S3) ** 2


def average_fidelity_rearranged(info, terms):
    """
    Exact average fidelity in terms of the sums:
    P_i F_i - x P_I0 / (1 + x + x^2) + [1 + P_I0^2 + P_I0 S1 + S2^2 + |S3|^2] / 2.
    """
    x = info.x
    if x >= 1.0:
        return None
    return _case_i_numerator(info, 3.5 - SQRT2) / (2.0 * (1.0 - x**3)) - x * info.P_I0 / (1.0 + x + x**2) + 0.5 * _sum_terms(terms)


def average_fidelity_sums(info, terms):
    """Average fidelity in closed form with the exact sums substituted, as printed."""
    x = info.x
    if x >= 1.0:
        return None
    bracket = _case_i_numerator(info, 0.5 - SQRT2) - x * (1.0 - x) * info.P_I0
    return bracket / (2.0 * (1.0 - x**3)) + 0.5 * _sum_terms(terms)


def average_fidelity_expansion(info):
    """Average fidelity with the large-amplitude sums substituted, as printed."""
    x = info.x
    if x >= 1.0:
        return None
    mu = info.mean_photon
    P = info.P_I0
    X = moment_parameter(info)
    k1 = abs(info.eps_plus) ** 2 - abs(info.eps_minus) ** 2
    k2 = x**2 * (np.conj(info.eps_plus) * info.eps_minus - info.eps_plus * np.conj(info.eps_minus))

    head = (_case_i_numerator(info, 0.5 - SQRT2) - x * (1.0 - x) * P) / (2.0 * (1.0 - x**3))
    braces = (
        P**2
        + P * PI2 / 32.0 * (2.0 / mu - 1.0 / mu**2 + (8.0 - 5.0 / mu + 1.0 / mu**2) * X)
        - P
        - PI2 / (8.0 * mu)
        + PI2 * (PI2 + 8.0) / (128.0 * mu**2)
        - PI2 / 2.0 * (1.0 - (10.0 + PI2) / (16.0 * mu) - (16.0 + 9.0 * PI2) / (16.0 * mu**2)) * X
        + PI2 * (2.0 - 1.0 / (4.0 * mu) + 41.0 / (32.0 * mu**2)) * X**2
    )
    k1_term = x**2 * PI2 * abs(k1) ** 2 / (256.0 * mu**2)
    k2_term = (
        x**2
        * PI2
        * abs(k2) ** 2
        / (144.0 * mu)
        * ((PI2 + 3.0) ** 2 - 2.0 * (PI2**2 + 10.0 * PI2 + 21.0) / mu + (PI2**2 + 9.0 * PI2 + 18.0) / (4.0 * mu**2))
    )
    mixed = (
        x**2
        * PI2
        * 2.0
        * (np.conj(k1) * k2).real
        / (192.0 * mu)
        * ((PI2 + 3.0) - (PI2**2 + 15.0 * PI2 + 60.0) / (6.0 * mu))
    )
    return float(1.0 + head + 0.5 * braces + k1_term - k2_term + mixed)


def average_fidelity_asymptotic(mean_photon):
    """1 - pi^2 / (16 |alpha|^2) + pi^2 (pi^2 + 8) / (256 |alpha|^4)."""
    mu = mean_photon
    return 1.0 - PI2 / (16.0 * mu) + PI2 * (PI2 + 8.0) / (256.0 * mu**2)


def avg_fidelity_closed_form(info, terms=None):
    """(sums, expansion, asymptotic) average fidelities for one information state."""
    terms = terms or exact_sums(info)
    return (
        average_fidelity_sums(info, terms),
        average_fidelity_expansion(info),
        average_fidelity_asymptotic(info.mean_photon),
    )


def avg_fidelity_exact(tree, tolerance=1e-9):
    """Sum of joint probability times fidelity over every leaf of the outcome tree."""
    total = sum(leaf.joint_probability for leaf in tree.leaves)
    if abs(total - 1.0) > tolerance:
        raise IncompleteTreeError(f"leaf probabilities sum to {total:.12g}")
    value = sum(leaf.joint_probability * leaf.fidelity for leaf in tree.leaves if leaf.fidelity is not None)
    return min(1.0, max(0.0, value))


# large-amplitude expansion of the sums


def _warn_outside_expansion(mean_photon):
    if mean_photon < EXPANSION_MIN_MEAN_PHOTON:
        warnings.warn(
            f"large-amplitude expansion used at |alpha|^2 = {mean_photon:.4g} < {EXPANSION_MIN_MEAN_PHOTON}",
            DomainWarning,
            stacklevel=3,
        )


def _s1_bracket(mu, X):
    return PI2 / 32.0 * (2.0 / mu - 1.0 / mu**2 + (8.0 - 5.0 / mu + 1.0 / mu**2) * X)


def approx_S(info):
    """(S1, S2, S3) from the large-amplitude expansion; S2 reads its undefined T1 as the S1 bracket."""
    mu = info.mean_photon
    X = moment_parameter(info)
    if X is None or mu <= 0.0:
        raise DegenerateStateError(f"large-amplitude expansion is undefined at |alpha|^2 = {mu:g}")
    _warn_outside_expansion(mu)
    P = info.P_I0
    bracket = _s1_bracket(mu, X)
    s1 = bracket - P
    s2 = 1.0 - (bracket + P)
    k1 = abs(info.eps_plus) ** 2 - abs(info.eps_minus) ** 2
    k2 = info.x**2 * (np.conj(info.eps_plus) * info.eps_minus - info.eps_plus * np.conj(info.eps_minus))
    unit = info.alpha / abs(info.alpha)
    s3 = unit * (
        math.pi * k1 / (16.0 * mu) * (-1.0 + (PI2 + 6.0) / (6.0 * mu))
        - math.pi * k2 / 12.0 * (PI2 + 3.0 - 3.0 * (PI2 + 7.0) / (4.0 * mu) + (PI2 + 6.0) / (8.0 * mu**2))
    )
    return s1, s2, complex(s3)


@dataclass(frozen=True)
class MomentCheck:
    quantity: str
    numeric: float
    identity: float

    @property
    def deviation(self):
        return abs(self.numeric - self.identity) / max(1.0, abs(self.identity))


@dataclass(frozen=True)
class MomentReport:
    checks: tuple
    tolerance: float = 1e-8

    @property
    def passed(self):
        return all(check.deviation <= self.tolerance for check in self.checks)

    @property
    def worst(self):
        return max(check.deviation for check in self.checks)


def factorial_moment(info, order, dim=None):
    """<I| a+^m a^m |I> by summing n!/(n-m)! P_n."""
    dim = dim or TruncationPolicy.for_mean(info.mean_photon).dim
    n = np.arange(dim)
    return float(np.sum(perm(n, order) * info.fock_probabilities(dim)))


def factorial_moment_identity(info, order):
    """|alpha|^(2m) for even m, |alpha|^(2m) (1 - X) for odd m."""
    value = info.mean_photon**order
    return value if order % 2 == 0 else value * (1.0 - moment_parameter(info))


def y_moments(info, dim=None):
    """sum y^m P_n for m = 1, 2, 3 with y = (n - |alpha|^2) / |alpha|^2, by summation."""
    mu = info.mean_photon
    dim = dim or TruncationPolicy.for_mean(mu).dim
    y = (np.arange(dim) - mu) / mu
    P = info.fock_probabilities(dim)
    return tuple(float(np.sum(y**m * P)) for m in (1, 2, 3))


def y_moments_identity(info):
    mu = info.mean_photon
    X = moment_parameter(info)
    return (
        -X,
        1.0 / mu + (2.0 - 1.0 / mu) * X,
        1.0 / mu**2 + (-4.0 + 3.0 / mu - 1.0 / mu**2) * X,
    )


def printed_y_moments(info):
    """As published: the first moment carries the opposite sign."""
    first, second, third = y_moments_identity(info)
    return -first, second, third


def moment_identities_check(info, max_order=6, dim=None):
    checks = [
        MomentCheck(f"factorial_moment_{m}", factorial_moment(info, m, dim), factorial_moment_identity(info, m))
        for m in range(1, max_order + 1)
    ]
    checks += [
        MomentCheck(f"y_moment_{m}", numeric, identity)
        for m, numeric, identity in zip((1, 2, 3), y_moments(info, dim), y_moments_identity(info))
    ]
    report = MomentReport(tuple(checks))
    logger.debug(f"moment identities at |alpha|^2={info.mean_photon:.4g}: worst deviation {report.worst:.3e}")
    return report
