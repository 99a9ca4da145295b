"""
Resonant Jaynes-Cummings evolution of a field mode and a two-level atom, and
the two-cavity recovery that turns |I,0> -/+ |0,I> into a single-mode copy
of the information.

Atom levels are a dim-2 mode: index 0 is the ground level l, index 1 the
excited level u.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .catport_error import CutoffLeakError, DegenerateStateError, InvariantViolation
from .fock_state import (
    ATOM_LEVELS,
    ZERO_PROBABILITY,
    AtomState,
    MultiModeFockState,
    fidelity,
    measure_level,
    tensor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JcParams:
    """Coupling g and interaction time t0 with g |alpha| t0 = pi/2."""

    alpha_abs: float
    g: float = 1.0

    def __post_init__(self):
        if self.alpha_abs <= 0:
            raise DegenerateStateError(f"interaction time needs |alpha| > 0, got {self.alpha_abs}")

    @property
    def t0(self):
        return math.pi / (2.0 * self.g * self.alpha_abs)

    def phi_n(self, n):
        return self.g * np.sqrt(n) * self.t0

    @classmethod
    def for_information(cls, info, g=1.0):
        return cls(abs(info.alpha), g)


def jc_evolve(state, field_mode, atom_mode, params, tail_bound=1e-12):
    """
    Rotate every pair |n, l>, |n-1, u> by the angle phi_n:

        |n, l>   -> cos phi_n |n, l> - i sin phi_n |n-1, u>
        |n-1, u> -> cos phi_n |n-1, u> - i sin phi_n |n, l>

    |0, l> is untouched, and so is |dim-1, u>, whose partner lies past the cutoff.
    """
    fa, aa = state.axis(field_mode), state.axis(atom_mode)
    dim = state.amps.shape[fa]
    if state.amps.shape[aa] != 2:
        raise CutoffLeakError(f"atom mode {atom_mode} must have dimension 2, got {state.amps.shape[aa]}")

    total = state.norm_squared()
    if not total > 0.0:
        raise DegenerateStateError(f"cannot evolve a zero state over modes {state.labels}")
    moved = np.moveaxis(state.amps, (fa, aa), (-2, -1))
    stranded = float(np.sum(np.abs(moved[..., dim - 1, 1]) ** 2)) / total
    if stranded > tail_bound:
        raise CutoffLeakError(f"{stranded:.3e} of the weight sits on |{dim - 1}, u>, bound is {tail_bound:.1e}")

    phi = params.phi_n(np.arange(1, dim))
    cos, sin = np.cos(phi), np.sin(phi)
    ground = moved[..., 1:, 0]
    excited = moved[..., :-1, 1]
    out = moved.copy()
    out[..., 1:, 0] = cos * ground - 1j * sin * excited
    out[..., :-1, 1] = cos * excited - 1j * sin * ground
    out = np.moveaxis(out, (-2, -1), (fa, aa))
    return MultiModeFockState(out, state.labels, state.residual)


def jc_unitary(dim, params):
    """Dense propagator over the basis index 2 n + atom."""
    unitary = np.eye(2 * dim, dtype=complex)
    for n in range(1, dim):
        phi = params.phi_n(n)
        ground, excited = 2 * n, 2 * (n - 1) + 1
        unitary[ground, ground] = unitary[excited, excited] = math.cos(phi)
        unitary[ground, excited] = unitary[excited, ground] = -1j * math.sin(phi)
    return unitary


def jc_hamiltonian(dim, g=1.0):
    """g (a+ sigma- + a sigma+) over the basis index 2 n + atom."""
    annihilation = np.diag(np.sqrt(np.arange(1, dim)), 1)
    lowering = np.array([[0.0, 1.0], [0.0, 0.0]])
    coupling = np.kron(annihilation.T, lowering)
    return g * (coupling + coupling.T)


def excitation_operator(dim):
    return np.kron(np.diag(np.arange(dim, dtype=float)), np.eye(2)) + np.kron(np.eye(dim), np.diag([0.0, 1.0]))


@dataclass(frozen=True)
class CavityOutcome:
    """
    One terminal situation of the cavity stage.

    probability is conditional on the Table branch that fed the cavities.
    """

    situation: str
    probability: float
    teleported_state: Optional[MultiModeFockState]
    fidelity: Optional[float]
    atom_C: str
    n: Optional[int] = None
    atom_Cprime: Optional[str] = None

    @property
    def label(self):
        return f"B{self.n}" if self.situation == "B" else self.situation

    def scaled(self, factor):
        return replace(self, probability=self.probability * factor)


def evolve_cavity_C(post_b2, params):
    """Mode 8 meets a ground-state atom in cavity C; returns modes 7, 9, C."""
    state = tensor([post_b2, AtomState.ground().to_fock("C")])
    state = jc_evolve(state, "8", "C", params)
    return state.relabel({"8": "9"})


def _outcome(situation, probability, teleported, information, atom_C, n=None, atom_Cprime=None):
    if teleported is None:
        return CavityOutcome(situation, probability, None, None, atom_C, n, atom_Cprime)
    return CavityOutcome(situation, probability, teleported, fidelity(teleported, information), atom_C, n, atom_Cprime)


def stage_cavity_Cprime(mode9_state, params, information):
    """
    Mode 9 meets an excited atom in cavity C'; the atom is measured and mode 10
    is kept whatever the result. Probabilities are conditional on the input.
    """
    state = tensor([mode9_state, AtomState.excited().to_fock("C'")])
    state = jc_evolve(state, "9", "C'", params).relabel({"9": "10"})
    p_l, kept_l = measure_level(state, "C'", ATOM_LEVELS["l"])
    p_u, kept_u = measure_level(state, "C'", ATOM_LEVELS["u"])
    logger.debug(f"cavity C': P(l) {p_l:.12g}, P(u) {p_u:.12g}")
    return (
        _outcome("C_l", p_l, kept_l, information, "u", atom_Cprime="l"),
        _outcome("C_u", p_u, kept_u, information, "u", atom_Cprime="u"),
    )


def stage_cavity_C(post_b2, sign, params, information):
    """
    Cavity C, the atom measurement and the photon count on mode 9.

    sign is "minus" for the |I,0> - |0,I> branches and "plus" for |I,0> + |0,I>;
    the simulation itself does not depend on it, it only labels the records.
    """
    state = evolve_cavity_C(post_b2, params)
    outcomes = []

    p_l, ground = measure_level(state, "C", ATOM_LEVELS["l"])
    if ground is not None:
        for n in range(ground.dim("9")):
            p_n, kept = measure_level(ground, "9", n)
            if n == 0:
                outcomes.append(_outcome("A", p_l * p_n, kept, information, "l"))
            elif p_l * p_n >= ZERO_PROBABILITY:
                outcomes.append(_outcome("B", p_l * p_n, kept, information, "l", n=n))
    else:
        outcomes.append(_outcome("A", 0.0, None, information, "l"))

    p_u, excited = measure_level(state, "C", ATOM_LEVELS["u"])
    if excited is not None:
        p_vac, mode9 = measure_level(excited, "7", 0)
        if abs(p_vac - 1.0) > 1e-9:
            raise InvariantViolation(
                "excited-atom-vacuum", f"{sign} branch: mode 7 vacuum probability {p_vac:.12g} after an excited atom"
            )
        outcomes.extend(outcome.scaled(p_u) for outcome in stage_cavity_Cprime(mode9, params, information))
    else:
        outcomes.append(_outcome("C_l", 0.0, None, information, "u", atom_Cprime="l"))
        outcomes.append(_outcome("C_u", 0.0, None, information, "u", atom_Cprime="u"))

    logger.debug(f"cavity C ({sign}): P(l) {p_l:.12g}, P(u) {p_u:.12g}, {len(outcomes)} situations")
    return outcomes


def vnm_probabilities(outcomes):
    """(P(l), P(u)) of the cavity C atom, recovered from its situations."""
    p_l = sum(outcome.probability for outcome in outcomes if outcome.atom_C == "l")
    p_u = sum(outcome.probability for outcome in outcomes if outcome.atom_C == "u")
    return p_l, p_u
