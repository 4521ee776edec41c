"""Exception types shared across the planning pipeline."""


class CapPlanError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(CapPlanError):
    """Input document does not conform to the canonical model schema."""


class DuplicateId(SchemaError):
    """The same identifier is declared more than once."""


class DanglingReference(SchemaError):
    """A reference points at an identifier that is never declared."""


class ExpressionError(CapPlanError):
    """Base class for expression parsing and evaluation errors."""


class UnknownOperator(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class ExpressionTypeError(ExpressionError):
    """An expression is not well-typed (boolean/real mismatch)."""


class MissingValue(ExpressionError):
    """Evaluation hit a property reference absent from the valuation."""


class DivisionByZero(ExpressionError):
    pass


class UnsupportedExpression(CapPlanError):
    """The encoder met an operator outside the supported subset."""


class InvalidModel(CapPlanError):
    """Planning was attempted on a model with validation diagnostics."""


class SolverError(CapPlanError):
    """Base class for failures while driving the external solver."""


class SolverLaunchError(SolverError):
    pass


class SolverProtocolError(SolverError):
    """The solver produced output we cannot interpret."""


class IncompleteModel(CapPlanError):
    """A satisfying assignment is missing a declared variable."""


class CoresUnavailable(CapPlanError):
    """An explanation was requested but no unsat core was produced."""


class DomainTooLarge(CapPlanError):
    """The brute-force search budget was exceeded."""
