"""
Exceptions raised across the lab.

Everything derives from TricamError so the command line layer can
catch the lot in one place and map it to an exit code.
"""
from typing import Dict, Optional


class TricamError(Exception):
    """Base class for every error the lab raises on purpose."""


class InvalidExtentError(TricamError):
    """Grid extent or sample count is not usable."""


class NonFiniteError(TricamError):
    """A field picked up a NaN or an Inf."""


class InvalidExponentError(TricamError):
    """L^p norm asked for with p < 1."""


class BackendError(TricamError):
    """Unknown backend tag or a backend used on a grid it cannot handle."""


class SizeGuardError(TricamError):
    """The O(n^2) oracle was asked to work on too many nodes."""


class UnderResolvedSupportError(TricamError):
    """Mollifier support is narrower than the grid can resolve."""


class OutOfDomainError(TricamError):
    """A peakon or bump position falls outside the grid."""


class InvalidParameterError(TricamError):
    """Initial data profile parameters are out of range."""


class CflViolationError(TricamError):
    """Time step exceeds the CFL limit and strict mode is on."""


class BlowUpError(TricamError):
    """
    The solution left the admissible range during time stepping.
    Carries enough context for a blow-up report.
    """

    def __init__(self, message: str, t: float, step: int,
                 sup_norms: Optional[Dict[str, float]] = None) -> None:
        super().__init__(message)
        self.t = t
        self.step = step
        self.sup_norms = sup_norms or {}

    def report(self) -> str:
        """One line summary used by the CLI and the logs."""
        norms = ' '.join(f'{k}={v:.6e}' for k, v in sorted(self.sup_norms.items()))
        return f'blow-up t={self.t:.6f} step={self.step} {norms}'.strip()


class EmptyTrajectoryError(TricamError):
    """Not enough diagnostics samples to build a time series."""


class UnsupportedTestFunctionError(TricamError):
    """Test function support leaves the space-time box of the run."""
