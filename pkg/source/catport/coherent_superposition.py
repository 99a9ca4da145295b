"""
Finite superpositions of multimode coherent states.

A term is a complex coefficient times a product of coherent states, one
label per mode. The representation is exact: beam splitters and phase
shifts act on labels, inner products use the coherent-state Gram matrix.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .catport_error import (
    CutoffTooSmallError,
    DegenerateStateError,
    DimensionMismatchError,
    ModeMismatchError,
)
from .fock_state import MultiModeFockState, PHOTON_CLASSES, coherent_amplitudes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoherentSuperposition:
    modes: tuple
    terms: tuple

    def __post_init__(self):
        modes = tuple(str(mode) for mode in self.modes)
        if len(set(modes)) != len(modes):
            raise ModeMismatchError(f"duplicate mode labels {modes}")
        terms = []
        for coeff, labels in self.terms:
            labels = tuple(complex(label) for label in labels)
            if len(labels) != len(modes):
                raise DimensionMismatchError(f"term has {len(labels)} labels for modes {modes}")
            terms.append((complex(coeff), labels))
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "terms", tuple(terms))

    def __len__(self):
        return len(self.terms)

    def axis(self, mode):
        try:
            return self.modes.index(str(mode))
        except ValueError:
            raise ModeMismatchError(f"mode {mode} not in {self.modes}") from None

    @property
    def coefficients(self):
        return np.array([coeff for coeff, _ in self.terms], dtype=complex)

    @property
    def label_matrix(self):
        return np.array([labels for _, labels in self.terms], dtype=complex).reshape(len(self.terms), len(self.modes))

    @property
    def max_mean_photon(self):
        if not self.terms:
            return 0.0
        return float(np.max(np.abs(self.label_matrix) ** 2))

    def norm_squared(self):
        return overlap(self, self).real

    def normalize(self):
        norm_sq = self.norm_squared()
        if norm_sq <= 0.0:
            raise DegenerateStateError(f"zero-norm superposition over modes {self.modes}")
        return self.scaled(1.0 / math.sqrt(norm_sq))

    def scaled(self, factor):
        return replace(self, terms=tuple((coeff * factor, labels) for coeff, labels in self.terms))

    def relabel(self, mapping):
        return replace(self, modes=tuple(mapping.get(mode, mode) for mode in self.modes))

    def reordered(self, modes):
        order = [self.axis(mode) for mode in modes]
        terms = tuple((coeff, tuple(labels[i] for i in order)) for coeff, labels in self.terms)
        return CoherentSuperposition(tuple(modes), terms)

    def simplify(self):
        """Merge terms with identical labels and drop exact zeros."""
        merged = {}
        for coeff, labels in self.terms:
            merged[labels] = merged.get(labels, 0j) + coeff
        return replace(self, terms=tuple((coeff, labels) for labels, coeff in merged.items() if coeff != 0))


@dataclass(frozen=True)
class EcsPair:
    """Two-term two-mode entangled coherent state c1|b1,g1> + c2|b2,g2>."""

    c1: complex
    c2: complex
    first: tuple
    second: tuple

    @classmethod
    def from_superposition(cls, s):
        if len(s.modes) != 2:
            raise ModeMismatchError(f"entangled pair needs two modes, got {s.modes}")
        if len(s.terms) != 2:
            raise DimensionMismatchError(f"entangled pair needs two terms, got {len(s.terms)}")
        (c1, first), (c2, second) = s.terms
        return cls(c1, c2, first, second)

    def to_superposition(self, modes=("1", "2")):
        return CoherentSuperposition(modes, ((self.c1, self.first), (self.c2, self.second)))


def coherent_overlap(alpha, beta):
    """<alpha|beta> with its phase, exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta)."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    return np.exp(-np.abs(alpha) ** 2 / 2.0 - np.abs(beta) ** 2 / 2.0 + np.conj(alpha) * beta)


def _gram(bra_labels, ket_labels):
    # (T_bra, M) x (T_ket, M) -> (T_bra, T_ket), product over modes taken in the exponent
    a = bra_labels[:, None, :]
    b = ket_labels[None, :, :]
    exponent = -np.abs(a) ** 2 / 2.0 - np.abs(b) ** 2 / 2.0 + np.conj(a) * b
    return np.exp(exponent.sum(axis=2))


def overlap(a, b):
    """<a|b> by Gram expansion."""
    if set(a.modes) != set(b.modes):
        raise ModeMismatchError(f"overlap between modes {a.modes} and {b.modes}")
    if not a.terms or not b.terms:
        return 0j
    b = b.reordered(a.modes)
    gram = _gram(a.label_matrix, b.label_matrix)
    return complex(np.conj(a.coefficients) @ gram @ b.coefficients)


def superposition(terms, mode="0"):
    """Single-mode superposition from (coefficient, amplitude) pairs."""
    return CoherentSuperposition((mode,), tuple((coeff, (amplitude,)) for coeff, amplitude in terms))


def coherent_superposition(amplitude, mode="0"):
    return superposition([(1.0, amplitude)], mode)


def cat_superposition(amplitude, parity, mode="0"):
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if parity == "odd" and amplitude == 0:
        raise DegenerateStateError("odd cat state at amplitude 0")
    sign = 1.0 if parity == "even" else -1.0
    return superposition([(1.0, amplitude), (sign, -amplitude)], mode).normalize()


def nze_superposition(amplitude, mode="0"):
    if amplitude == 0:
        raise DegenerateStateError("NZE state at amplitude 0")
    vacuum_weight = 2.0 * math.exp(-abs(amplitude) ** 2 / 2.0)
    return superposition([(1.0, amplitude), (1.0, -amplitude), (-vacuum_weight, 0.0)], mode).normalize()


def tensor(*states):
    modes = [mode for state in states for mode in state.modes]
    if len(set(modes)) != len(modes):
        raise ModeMismatchError(f"label clash in tensor product {modes}")

    def pair(a, b):
        terms = tuple((ca * cb, la + lb) for ca, la in a.terms for cb, lb in b.terms)
        return CoherentSuperposition(a.modes + b.modes, terms)

    return reduce(pair, states)


def apply_beamsplitter(s, mode_a, mode_b, out_a=None, out_b=None):
    """Per-term label map (a, b) -> ((a + b)/sqrt2, (a - b)/sqrt2)."""
    ia, ib = s.axis(mode_a), s.axis(mode_b)
    if ia == ib:
        raise ModeMismatchError(f"beam splitter needs two distinct modes, got {mode_a} twice")
    root2 = math.sqrt(2.0)
    terms = []
    for coeff, labels in s.terms:
        labels = list(labels)
        a, b = labels[ia], labels[ib]
        labels[ia], labels[ib] = (a + b) / root2, (a - b) / root2
        terms.append((coeff, tuple(labels)))
    modes = list(s.modes)
    modes[ia] = str(out_a if out_a is not None else mode_a)
    modes[ib] = str(out_b if out_b is not None else mode_b)
    return CoherentSuperposition(tuple(modes), tuple(terms))


def phase_shift(s, mode, out_mode=None):
    """pi phase shift a -> -a on one mode."""
    ax = s.axis(mode)
    terms = tuple(
        (coeff, labels[:ax] + (-labels[ax],) + labels[ax + 1 :]) for coeff, labels in s.terms
    )
    modes = s.modes[:ax] + (str(out_mode if out_mode is not None else mode),) + s.modes[ax + 1 :]
    return CoherentSuperposition(modes, terms)


def _class_image(cls, beta):
    """Projector image of |beta> as (coefficient, label) pairs."""
    vacuum_amp = math.exp(-abs(beta) ** 2 / 2.0)
    if cls == "zero":
        return [(vacuum_amp, 0j)]
    if cls == "odd":
        return [(0.5, beta), (-0.5, -beta)]
    if cls == "nze":
        return [(0.5, beta), (0.5, -beta), (-vacuum_amp, 0j)]
    raise ValueError(f"photon class must be one of {PHOTON_CLASSES}, got {cls!r}")


def project_photon_class(s, mode, cls):
    """Unnormalized zero / non-zero-even / odd projection of one mode, exact on labels."""
    ax = s.axis(mode)
    terms = []
    for coeff, labels in s.terms:
        for weight, label in _class_image(cls, labels[ax]):
            terms.append((coeff * weight, labels[:ax] + (label,) + labels[ax + 1 :]))
    return CoherentSuperposition(s.modes, tuple(terms)).simplify()


def partial_overlap(bra, ket):
    """Contract bra over its modes with ket, leaving a superposition over the remaining modes."""
    missing = [mode for mode in bra.modes if mode not in ket.modes]
    if missing:
        raise ModeMismatchError(f"modes {missing} not in {ket.modes}")
    rest = tuple(mode for mode in ket.modes if mode not in bra.modes)
    if not rest:
        raise ModeMismatchError("partial overlap over every mode, use overlap instead")
    ket = ket.reordered(bra.modes + rest)
    k = len(bra.modes)
    if not bra.terms or not ket.terms:
        return CoherentSuperposition(rest, ())
    labels = ket.label_matrix
    weights = np.conj(bra.coefficients) @ _gram(bra.label_matrix, labels[:, :k])
    terms = tuple(
        (weight * coeff, tuple(row[k:])) for weight, (coeff, _), row in zip(weights, ket.terms, labels)
    )
    return CoherentSuperposition(rest, terms).simplify()


def ecs_concurrence(e):
    """Concurrence of the two-qubit state spanned by each mode's two coherent components."""
    overlap_1 = complex(coherent_overlap(e.first[0], e.second[0]))
    overlap_2 = complex(coherent_overlap(e.first[1], e.second[1]))
    norm_sq = abs(e.c1) ** 2 + abs(e.c2) ** 2 + 2.0 * (np.conj(e.c1) * e.c2 * overlap_1 * overlap_2).real
    if norm_sq <= 0.0:
        raise DegenerateStateError("entangled pair has zero norm")
    value = 2.0 * abs(e.c1 * e.c2) * math.sqrt((1.0 - abs(overlap_1) ** 2) * (1.0 - abs(overlap_2) ** 2)) / norm_sq
    return min(1.0, max(0.0, value))


def to_fock(s, policy):
    """Truncated Fock tensor of the superposition; not renormalized."""
    if s.max_mean_photon > 0 and not policy.covers(math.sqrt(s.max_mean_photon)):
        raise CutoffTooSmallError(
            f"superposition has |label|^2 up to {s.max_mean_photon:.4g}, beyond cutoff {policy.dim}"
        )
    dim = policy.dim
    amps = np.zeros((dim,) * len(s.modes), dtype=complex)
    cache = {}
    for coeff, labels in s.terms:
        factors = []
        for label in labels:
            if label not in cache:
                cache[label] = coherent_amplitudes(label, dim)
            factors.append(cache[label])
        amps += coeff * reduce(np.multiply.outer, factors)
    state = MultiModeFockState(amps, s.modes)
    residual = abs(s.norm_squared() - state.norm_squared())
    logger.debug(f"to_fock over modes {s.modes}: {len(s.terms)} terms, dim {dim}, residual {residual:.3e}")
    return MultiModeFockState(amps, s.modes, residual)
