"""Global numerical tolerances.

``EPS`` bounds residual norms, ``EPS_PSD`` bounds eigenvalue positivity.  Both
can be overridden per call; ``EPS`` also honours the ``CSLAB_TOL`` environment
variable.
"""
import contextlib
import os

DEFAULT_EPS = 1e-9
DEFAULT_EPS_PSD = 1e-8

_overrides = {}


def eps(value=None):
    if value is not None:
        return float(value)
    if "eps" in _overrides:
        return _overrides["eps"]
    env = os.environ.get("CSLAB_TOL")
    if env:
        return float(env)
    return DEFAULT_EPS


def eps_psd(value=None):
    if value is not None:
        return float(value)
    return _overrides.get("eps_psd", DEFAULT_EPS_PSD)


@contextlib.contextmanager
def override(eps=None, eps_psd=None):
    """Temporarily replace the global defaults."""
    saved = dict(_overrides)
    if eps is not None:
        _overrides["eps"] = float(eps)
    if eps_psd is not None:
        _overrides["eps_psd"] = float(eps_psd)
    try:
        yield
    finally:
        _overrides.clear()
        _overrides.update(saved)


class CSLabError(Exception):
    """Base class for all errors raised by the package."""


class StructuralError(CSLabError):
    """Objects that belong to different algebras or have mismatched shapes."""


class ConvergenceError(CSLabError):
    """An iterative closure did not stabilise within its cap."""


class InputDataError(CSLabError):
    """Numerical input data violates a positivity or consistency requirement."""


class PreconditionError(CSLabError):
    """An operation was called outside its domain."""


class DepthError(PreconditionError):
    """A Fock-space word needs more levels than the truncation provides."""

    def __init__(self, message, required_depth):
        super().__init__(message)
        self.required_depth = required_depth


class SchemaError(CSLabError):
    """A configuration or data file does not validate."""
