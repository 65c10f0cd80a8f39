"""Exception hierarchy shared by every stage of the engine."""


class BoussinesqCIError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 3


class ContractViolation(BoussinesqCIError, ValueError):
    """Input of the wrong rank or shape for an operation."""


class ParameterError(BoussinesqCIError, ValueError):
    exit_code = 2


class ResolutionError(BoussinesqCIError):
    """A field (or a product it enters) is not resolved by the grid."""

    exit_code = 4


class NonIntegerLattice(BoussinesqCIError, ValueError):
    exit_code = 2


class NonPositiveCoefficient(BoussinesqCIError):
    """Geometric-lemma solve produced gamma^2 <= 0."""


class GammaDomainError(BoussinesqCIError):
    """Amplitude construction hit a matrix outside the gamma domain on supp(chi_j)."""


class NonPositiveRho0(BoussinesqCIError):
    pass


class StrictInfeasible(BoussinesqCIError):
    exit_code = 2

    def __init__(self, message, min_lambda=None):
        super().__init__(message)
        self.min_lambda = min_lambda


class CFLViolation(BoussinesqCIError):
    pass


class NonZeroMean(BoussinesqCIError, ValueError):
    pass


class SamplingMismatch(BoussinesqCIError, ValueError):
    pass


class InvariantViolation(BoussinesqCIError):
    pass


class ConfigError(BoussinesqCIError):
    exit_code = 2

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line


class StageError(BoussinesqCIError):
    """Wraps a module error with the pipeline stage that raised it."""

    def __init__(self, stage, error):
        super().__init__(f"stage {stage!r} failed: {error}")
        self.stage = stage
        self.error = error
        self.exit_code = getattr(error, "exit_code", 3)


class ResourceError(BoussinesqCIError):
    exit_code = 4
