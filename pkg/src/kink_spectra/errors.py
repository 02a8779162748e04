"""Exception hierarchy.  ``module`` names the pipeline stage for diagnostics."""


class KinkSpectraError(Exception):
    module = "kink_spectra"


class ValidationFailure(KinkSpectraError):
    module = "models"


class EigensolverFailure(KinkSpectraError):
    module = "operator1d"


class NoDiscreteModes(KinkSpectraError):
    module = "operator1d"


class ParityViolation(KinkSpectraError):
    module = "gamma"

    def __init__(self, message, point=None, violation=None):
        super().__init__(message)
        self.point = point
        self.violation = violation


class DecayViolation(KinkSpectraError):
    module = "gamma"


class BranchError(KinkSpectraError):
    module = "corrector"


class ResidualTooLarge(KinkSpectraError):
    module = "corrector"


class BranchCut(KinkSpectraError):
    module = "asymptotics"


class Undetermined(KinkSpectraError):
    module = "asymptotics"


class NoContraction(KinkSpectraError):
    module = "birman_schwinger"


class NewtonDivergence(KinkSpectraError):
    module = "birman_schwinger"


class MultipleRoots(KinkSpectraError):
    module = "birman_schwinger"


class CFLViolation(KinkSpectraError):
    module = "evolution"


class NonFinite(KinkSpectraError):
    module = "evolution"


class PoorFit(KinkSpectraError):
    module = "evolution"


class ParseError(KinkSpectraError):
    module = "cli"

    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ConfigValidationError(KinkSpectraError):
    module = "cli"

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
