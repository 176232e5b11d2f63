"""Exception hierarchy shared by every stablab module."""


class StabLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(StabLabError, ValueError):
    pass


class AlgebraAxiomError(StabLabError, ValueError):
    """An algebra failed one of its construction-time axioms.

    ``index`` is the worst offending index tuple and ``residual`` its size.
    """

    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class AssociativityViolation(AlgebraAxiomError):
    pass


class UnitLawViolation(AlgebraAxiomError):
    pass


class NotSubmultiplicative(AlgebraAxiomError):
    pass


class NotAGroup(StabLabError, ValueError):
    def __init__(self, axiom, detail=""):
        super().__init__(f"not a group: {axiom} fails" + (f" ({detail})" if detail else ""))
        self.axiom = axiom


class WrongNormKind(StabLabError, ValueError):
    pass


class NotAGroupAlgebra(StabLabError, ValueError):
    pass


class WrongAlgebra(StabLabError, ValueError):
    pass


class DiagonalRejected(StabLabError, ValueError):
    def __init__(self, residual_unit, residual_commute, tol):
        super().__init__(
            f"diagonal rejected: residual_unit={residual_unit:.3e}, "
            f"residual_commute={residual_commute:.3e}, tol={tol:.1e}"
        )
        self.residual_unit = residual_unit
        self.residual_commute = residual_commute
        self.tol = tol


class BudgetExceeded(StabLabError, RuntimeError):
    pass


class UnsupportedDegree(StabLabError, ValueError):
    pass


class DomainError(StabLabError, ValueError):
    pass


class NonUnitalInput(StabLabError, ValueError):
    pass


class BaseNotMultiplicative(StabLabError, ValueError):
    pass


class ConfigError(StabLabError, ValueError):
    """Invalid experiment configuration; ``where`` locates the offending line or field."""

    def __init__(self, message, where=""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
