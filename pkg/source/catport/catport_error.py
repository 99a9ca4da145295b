class CatportError(Exception):
    prefix = "Simulation error"
    exit_code = 1

    def __init__(self, message, original_exception=None):
        self.message = f"{self.prefix} - {message}"
        if original_exception:
            self.message = f"{self.message}: {original_exception}"

        super().__init__(self.message)


class CutoffTooSmallError(CatportError):
    prefix = "Fock cutoff too small"


class CutoffLeakError(CatportError):
    prefix = "Fock cutoff leak"


class DegenerateStateError(CatportError):
    prefix = "Degenerate state"


class ModeMismatchError(CatportError):
    prefix = "Mode mismatch"


class DimensionMismatchError(CatportError):
    prefix = "Dimension mismatch"


class InvalidInformationError(CatportError):
    prefix = "Invalid information state"
    exit_code = 2


class IncompleteTreeError(CatportError):
    prefix = "Incomplete outcome tree"


class InvariantViolation(CatportError):
    prefix = "Invariant violated"

    def __init__(self, invariant, message, original_exception=None):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}", original_exception)


class ConfigError(CatportError):
    prefix = "Bad input"
    exit_code = 2


class OutputError(CatportError):
    prefix = "Error writing output"
    exit_code = 3
