import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache, reduce

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from .catport_error import (
    CutoffTooSmallError,
    DegenerateStateError,
    DimensionMismatchError,
    ModeMismatchError,
)

logger = logging.getLogger(__name__)

PHOTON_CLASSES = ("zero", "nze", "odd")
ATOM_LEVELS = {"l": 0, "u": 1}

# below this a measurement outcome is reported but never renormalized
ZERO_PROBABILITY = 1e-14


def poisson_tail(mean_photon, dim):
    """Weight a coherent state of the given mean photon number puts on levels >= dim."""
    if mean_photon <= 0:
        return 0.0
    return float(poisson.sf(dim - 1, mean_photon))


@dataclass(frozen=True)
class TruncationPolicy:
    """
    Per-mode Fock cutoff: levels 0..dim-1 are kept.

    The policy is only valid when every coherent state with
    |amplitude|^2 <= max_mean_photon loses less than tail_bound of its
    probability above the cutoff.
    """

    max_mean_photon: float
    dim: int
    tail_bound: float = 1e-12

    def __post_init__(self):
        if self.dim < 2:
            raise CutoffTooSmallError(f"dim must be at least 2, got {self.dim}")
        if self.max_mean_photon < 0:
            raise CutoffTooSmallError(f"negative mean photon number {self.max_mean_photon}")
        tail = poisson_tail(self.max_mean_photon, self.dim)
        if tail >= self.tail_bound:
            raise CutoffTooSmallError(
                f"dim {self.dim} leaves {tail:.3e} above the cutoff for mean {self.max_mean_photon}, "
                f"bound is {self.tail_bound:.1e}"
            )

    @classmethod
    def for_mean(cls, mean_photon, tail_bound=1e-12):
        dim = math.ceil(mean_photon + 12.0 * math.sqrt(mean_photon + 1.0) + 20.0)
        while poisson_tail(mean_photon, dim) >= tail_bound:
            dim += 8
        return cls(float(mean_photon), dim, tail_bound)

    def covers(self, amplitude):
        return poisson_tail(abs(amplitude) ** 2, self.dim) < self.tail_bound


@dataclass(frozen=True, eq=False)
class MultiModeFockState:
    """
    Dense amplitude tensor over truncated per-mode Fock bases.

    Axis i of amps belongs to the mode named labels[i]. residual is the
    probability that truncation cut away before renormalization.
    """

    amps: np.ndarray
    labels: tuple
    residual: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        labels = tuple(str(label) for label in self.labels)
        if amps.ndim != len(labels):
            raise DimensionMismatchError(f"{amps.ndim} axes but {len(labels)} mode labels")
        if len(set(labels)) != len(labels):
            raise ModeMismatchError(f"duplicate mode labels {labels}")
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self):
        return list(self.amps.shape)

    @property
    def vector(self):
        return self.amps.reshape(-1)

    def axis(self, mode):
        try:
            return self.labels.index(str(mode))
        except ValueError:
            raise ModeMismatchError(f"mode {mode} not in {self.labels}") from None

    def dim(self, mode):
        return self.amps.shape[self.axis(mode)]

    def norm_squared(self):
        return float(np.vdot(self.amps, self.amps).real)

    def normalize(self):
        norm_sq = self.norm_squared()
        if norm_sq <= 0.0:
            raise DegenerateStateError(f"cannot normalize zero state over modes {self.labels}")
        return replace(self, amps=self.amps / math.sqrt(norm_sq))

    def scaled(self, factor):
        return replace(self, amps=self.amps * factor)

    def relabel(self, mapping):
        return replace(self, labels=tuple(mapping.get(label, label) for label in self.labels))

    def reordered(self, labels):
        order = [self.axis(label) for label in labels]
        return MultiModeFockState(np.transpose(self.amps, order), tuple(str(label) for label in labels), self.residual)

    def inner(self, other):
        """<self|other>, positional over axes."""
        if self.dims != other.dims:
            raise DimensionMismatchError(f"{self.dims} vs {other.dims}")
        return complex(np.vdot(self.amps, other.amps))

    def mean_photons(self, mode):
        ax = self.axis(mode)
        weights = np.abs(self.amps) ** 2
        per_level = weights.sum(axis=tuple(i for i in range(weights.ndim) if i != ax))
        if not per_level.sum() > 0.0:
            raise DegenerateStateError(f"mean photon number of a zero state over modes {self.labels}")
        return float(np.dot(np.arange(per_level.size), per_level) / per_level.sum())


@dataclass(frozen=True)
class AtomState:
    """Two-level atom, amp_l on ground |l> and amp_u on excited |u>."""

    amp_l: complex = 1.0
    amp_u: complex = 0.0

    def __post_init__(self):
        norm_sq = abs(self.amp_l) ** 2 + abs(self.amp_u) ** 2
        if abs(norm_sq - 1.0) > 1e-12:
            raise DegenerateStateError(f"atom amplitudes have squared norm {norm_sq}")

    @classmethod
    def ground(cls):
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls):
        return cls(0.0, 1.0)

    def to_fock(self, label="C"):
        return MultiModeFockState(np.array([self.amp_l, self.amp_u], dtype=complex), (label,))


def coherent_amplitudes(amplitude, dim):
    """Untruncated-normalization amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < dim."""
    ratios = np.empty(dim, dtype=complex)
    ratios[0] = 1.0
    ratios[1:] = amplitude / np.sqrt(np.arange(1, dim))
    return math.exp(-abs(amplitude) ** 2 / 2.0) * np.cumprod(ratios)


def _require_cover(amplitude, policy):
    if not policy.covers(amplitude):
        raise CutoffTooSmallError(
            f"|amplitude|^2 = {abs(amplitude) ** 2:.4g} needs more than {policy.dim} Fock levels "
            f"for tail bound {policy.tail_bound:.1e}"
        )


def _normalized_single_mode(raw, label):
    norm_sq = float(np.vdot(raw, raw).real)
    return MultiModeFockState(raw / math.sqrt(norm_sq), (label,))


def fock_state(n, dim, label="0"):
    if not 0 <= n < dim:
        raise CutoffTooSmallError(f"level {n} outside cutoff {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return MultiModeFockState(amps, (label,))


def vacuum(dim, label="0"):
    return fock_state(0, dim, label)


def coherent_state(amplitude, policy, label="0"):
    _require_cover(amplitude, policy)
    raw = coherent_amplitudes(amplitude, policy.dim)
    norm_sq = float(np.vdot(raw, raw).real)
    return MultiModeFockState(raw / math.sqrt(norm_sq), (label,), residual=max(0.0, 1.0 - norm_sq))


def cat_state(amplitude, parity, policy, label="0"):
    """Normalized |amplitude> + |-amplitude> (even) or |amplitude> - |-amplitude> (odd)."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if parity == "odd" and amplitude == 0:
        raise DegenerateStateError("odd cat state at amplitude 0")
    _require_cover(amplitude, policy)
    raw = coherent_amplitudes(amplitude, policy.dim)
    raw[(0 if parity == "odd" else 1)::2] = 0.0
    return _normalized_single_mode(raw, label)


def nze_state(amplitude, policy, label="0"):
    """Even cat with the vacuum component removed, normalized."""
    if amplitude == 0:
        raise DegenerateStateError("NZE state at amplitude 0")
    _require_cover(amplitude, policy)
    raw = coherent_amplitudes(amplitude, policy.dim)
    raw[1::2] = 0.0
    raw[0] = 0.0
    return _normalized_single_mode(raw, label)


def tensor(states):
    states = list(states)
    labels = [label for state in states for label in state.labels]
    if len(set(labels)) != len(labels):
        raise ModeMismatchError(f"label clash in tensor product {labels}")
    amps = reduce(np.multiply.outer, [state.amps for state in states])
    residual = 1.0 - math.prod(1.0 - state.residual for state in states)
    return MultiModeFockState(amps, tuple(labels), residual)


@lru_cache(maxsize=None)
def beamsplitter_block(total):
    """
    Beam splitter restricted to the states |k, total-k>, k = photons in the first mode.

    Realizes a+ -> (a+ + b+)/sqrt2, b+ -> (a+ - b+)/sqrt2: a pi phase on the
    second input followed by exp(-pi/4 (a+ b - a b+)).
    """
    k = np.arange(total)
    coupling = np.sqrt((k + 1.0) * (total - k))
    generator = np.diag(coupling, -1) - np.diag(coupling, 1)
    parity = (-1.0) ** (total - np.arange(total + 1))
    block = expm(-np.pi / 4.0 * generator) * parity
    block.setflags(write=False)
    return block


def beamsplitter(state, mode_a, mode_b, out_a=None, out_b=None):
    ia, ib = state.axis(mode_a), state.axis(mode_b)
    if ia == ib:
        raise ModeMismatchError(f"beam splitter needs two distinct modes, got {mode_a} twice")
    dim = state.amps.shape[ia]
    if state.amps.shape[ib] != dim:
        raise DimensionMismatchError(f"modes {mode_a} and {mode_b} have cutoffs {dim} and {state.amps.shape[ib]}")

    moved = np.moveaxis(state.amps, (ia, ib), (-2, -1))
    rest = moved.shape[:-2]
    flat = moved.reshape((-1, dim, dim))
    out = np.zeros_like(flat)
    # photon number is conserved, so the splitter is block diagonal in a+b
    for total in range(2 * dim - 1):
        k = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        block = beamsplitter_block(total)[np.ix_(k, k)]
        out[:, k, total - k] = flat[:, k, total - k] @ block.T
    out = np.moveaxis(out.reshape(rest + (dim, dim)), (-2, -1), (ia, ib))

    labels = list(state.labels)
    labels[ia] = str(out_a if out_a is not None else mode_a)
    labels[ib] = str(out_b if out_b is not None else mode_b)
    return MultiModeFockState(out, tuple(labels), state.residual)


def _class_mask(cls, dim):
    n = np.arange(dim)
    if cls == "zero":
        return n == 0
    if cls == "nze":
        return (n % 2 == 0) & (n >= 2)
    if cls == "odd":
        return n % 2 == 1
    raise ValueError(f"photon class must be one of {PHOTON_CLASSES}, got {cls!r}")


def project(state, mode, levels):
    """Unnormalized projection of one mode onto the Fock levels where levels is True."""
    ax = state.axis(mode)
    mask = np.asarray(levels, dtype=bool)
    shape = [1] * state.amps.ndim
    shape[ax] = mask.size
    return replace(state, amps=state.amps * mask.reshape(shape))


def _collapse(state, projected):
    total = state.norm_squared()
    probability = projected.norm_squared() / total if total > 0 else 0.0
    if probability < ZERO_PROBABILITY:
        return probability, None
    return probability, projected.normalize()


def measure_photon_class(state, mode, cls):
    """Zero / non-zero-even / odd photon-count outcome on one mode."""
    projected = project(state, mode, _class_mask(cls, state.dim(mode)))
    return _collapse(state, projected)


def measure_level(state, mode, level):
    """
    Projective measurement of one mode onto a single level; the measured mode
    is discarded from the returned state.
    """
    ax = state.axis(mode)
    if len(state.labels) < 2:
        raise ModeMismatchError("cannot discard the only mode of a state")
    remaining = np.take(state.amps, level, axis=ax)
    labels = state.labels[:ax] + state.labels[ax + 1 :]
    projected = MultiModeFockState(remaining, labels, state.residual)
    total = state.norm_squared()
    probability = projected.norm_squared() / total if total > 0 else 0.0
    if probability < ZERO_PROBABILITY:
        return probability, None
    return probability, projected.normalize()


def fidelity(a, b):
    if a.dims != b.dims:
        raise DimensionMismatchError(f"fidelity between dims {a.dims} and {b.dims}")
    norms = a.norm_squared() * b.norm_squared()
    if not norms > 0.0:
        raise DegenerateStateError(f"fidelity with a zero state over modes {a.labels}")
    overlap = np.vdot(a.amps, b.amps)
    value = abs(overlap) ** 2 / norms
    return float(min(1.0, max(0.0, value)))
