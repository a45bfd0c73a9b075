"""Exception types raised across the package."""


class DoubleLambdaError(Exception):
    """Base class for all package errors."""


class ConfigError(DoubleLambdaError, ValueError):
    pass


class DegenerateKernel(DoubleLambdaError):
    """The Bloch generator has a multi-dimensional null space and no initial state was given."""


class SolverFailure(DoubleLambdaError):
    pass


class SingularZ(DoubleLambdaError, ZeroDivisionError):
    pass


class StepFailure(DoubleLambdaError):
    """Adaptive integration could not proceed (step size underflow or divergence)."""


class UndefinedG2(DoubleLambdaError, ZeroDivisionError):
    """g2 requested for a state with an empty mode."""


class EmptyWindow(DoubleLambdaError):
    """No value of cos(phi21) in [-1, 1] satisfies the inseparability condition."""


class SingularM(DoubleLambdaError, ZeroDivisionError):
    pass


class SingularDrift(DoubleLambdaError, ZeroDivisionError):
    pass


class DisregardedUnstable(DoubleLambdaError):
    """Steady-state quantities were requested at a dynamically unstable point."""


class ZeroDetuning(DoubleLambdaError, ZeroDivisionError):
    pass


class PoleAtXiSquared(DoubleLambdaError, ZeroDivisionError):
    pass


class NonSteady(DoubleLambdaError):
    """The symmetric resonant scheme has no steady state for these parameters."""


class TruncationOverflow(DoubleLambdaError):
    """Fock-space population at the truncation edge exceeded the leak budget."""

    def __init__(self, message, n_max=None, leak=None):
        super().__init__(message)
        self.n_max = n_max
        self.leak = leak
