from __future__ import annotations
from pathlib import Path


class LabError(Exception):
    """Base exception for all errors raised by scslab.
    """


class DomainError(LabError, ValueError):
    """Exception raised when an argument lies outside an operation's domain.
    """

class NonFiniteInputError(DomainError):
    """Exception raised when a NaN or infinite value is passed in.
    """

class GammaPoleError(DomainError):
    """Exception raised when the gamma function is evaluated at a pole.
    """

class ZetaPoleError(DomainError):
    """Exception raised when zeta is evaluated at s = 1.
    """

class ParameterPoleError(DomainError):
    """Exception raised when a hypergeometric denominator parameter is a nonpositive integer.
    """

class SecantPoleError(DomainError):
    """Exception raised when sec(πs/2) is evaluated at one of its poles.
    """

class LinePlacementError(DomainError):
    """Exception raised when a Barnes contour does not separate the gamma poles.
    """

class PoleProximityError(DomainError):
    """Exception raised when a gamma or beta factor is too close to a pole.
    """


class ConvergenceError(LabError, ArithmeticError):
    """Exception raised when a numerical procedure fails.
    """

class NonConvergentRegionError(ConvergenceError):
    """Exception raised when no series or transformation covers the argument.
    """

class NonFiniteIntegrandError(ConvergenceError):
    """Exception raised when an integrand returns NaN or infinity.
    """
    def __init__(self, ordinate: float|complex, msg: str|None = None) -> None:
        self.ordinate = ordinate
        if msg is None:
            msg = f'non-finite integrand at ordinate {ordinate!r}'
        super().__init__(msg)

class KernelEvaluationError(ConvergenceError):
    """Exception raised when the termwise kernel fails for one index n.
    """
    def __init__(self, n: int, msg: str) -> None:
        self.n = n
        super().__init__(f'kernel at n={n}: {msg}')

class BudgetOverflowError(ConvergenceError):
    """Exception raised when a reported error band exceeds the allowed budget.
    """

class QuadratureError(ConvergenceError):
    """Exception raised when a quadrature cannot reach its tolerance.
    """
    def __init__(self, msg: str, achieved: float = float('nan')) -> None:
        self.achieved = achieved
        super().__init__(msg)


class DataError(LabError):
    """Base exception for problems with Maass form data.
    """

class MaassParseError(DataError, ValueError):
    """Exception raised for malformed ``maass-form v1`` files.
    """
    def __init__(
        self,
        msg: str,
        lineno: int|None = None,
        field: str|None = None,
        path: Path|str|None = None,
    ) -> None:
        self.msg = msg
        self.lineno = lineno
        self.field = field
        self.path = path
        super().__init__(msg)

    def __str__(self) -> str:
        loc = str(self.path) if self.path is not None else '<data>'
        if self.lineno is not None:
            loc = f'{loc}:{self.lineno}'
        return f'{loc}: {self.msg}'

class MissingPrimeError(DataError, KeyError):
    """Exception raised when a Hecke eigenvalue at a prime is not in the data.
    """
    def __init__(self, p: int, source: str = '') -> None:
        self.p = p
        self.source = source
        super().__init__(p)

    def __str__(self) -> str:
        src = f' in {self.source}' if self.source else ''
        return f'missing Hecke eigenvalue for prime p={self.p}{src}'

class AutomorphyScreenError(DataError):
    """Exception raised when a form fails the automorphy residual screen.
    """

class UnnormalizedFormError(DataError):
    """Exception raised when a form without c(1) is evaluated.
    """

class BasisCoverageError(DataError):
    """Exception raised when the loaded spectrum does not cover a requested window.
    """

class MissingTripleProductError(DataError, KeyError):
    """Exception raised when a spectral computation needs an uncomputed triple product.
    """
    def __str__(self) -> str:
        return f'triple product not available for basis index {self.args[0]!r}'


class ConfigError(LabError, ValueError):
    """Exception raised for unreadable or inconsistent run configuration.
    """
