from .catport_error import (
    CatportError,
    ConfigError,
    CutoffLeakError,
    CutoffTooSmallError,
    DegenerateStateError,
    DimensionMismatchError,
    IncompleteTreeError,
    InvalidInformationError,
    InvariantViolation,
    ModeMismatchError,
    OutputError,
)
from .fock_state import MultiModeFockState, TruncationPolicy
from .coherent_superposition import CoherentSuperposition, EcsPair
from .teleport_protocol import InformationSpec, BranchRecord, make_information, build_channel
from .jaynes_cummings import JcParams, CavityOutcome
from .protocol_tree import OutcomeTree, evaluate_protocol
from .formula_flags import FormulaFlag, FlagLedger, collect_formula_flags
from .sweep_config import SweepConfig
from .sweep import evaluate_point, run_sweep, write_figures, write_table, branch_table
from .validation import ValidationReport, run_validation
