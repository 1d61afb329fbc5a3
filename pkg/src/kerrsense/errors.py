"""Failure types raised by the numerical routines.

All of these indicate that a computation left its domain of validity
(as opposed to bad user input, which raises ValueError). The command
line layer maps NumericalError to a dedicated exit code.
"""


class NumericalError(RuntimeError):
    """Base class for numerical failures."""


class TraceDriftError(NumericalError):
    """Density-matrix trace drifted beyond tolerance during integration."""


class SteadyStateError(NumericalError):
    """Relaxation to the steady state did not converge in the time budget."""


class StepFailureError(NumericalError):
    """A stochastic step produced a state norm outside the accepted range."""


class ConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget."""
