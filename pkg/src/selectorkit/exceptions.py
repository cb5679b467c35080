"""Exception hierarchy shared by all modules."""


class SelectorKitError(Exception):
    """Base class for errors raised by selectorkit."""


class InputError(SelectorKitError, ValueError):
    """Malformed or out-of-range input (non-finite coordinates, bad config)."""


class ConvergenceError(SelectorKitError, RuntimeError):
    """A numerical procedure failed to converge.

    The best value found so far is kept in ``best`` so callers can still
    report a bound.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class FlowEscapeError(SelectorKitError, RuntimeError):
    """A trajectory left the configured bounding box.

    Flows of compactly supported Hamiltonians never leave a neighbourhood of
    the support, so this always signals a modelling bug.
    """


class StepSizeError(SelectorKitError, RuntimeError):
    """Adaptive step size underflow in the flow integrator."""


class CertificationError(SelectorKitError, RuntimeError):
    """A construction could not be certified (e.g. a displacement check failed)."""


class AmbiguousBranch(SelectorKitError):
    """Two spectral branches cannot be told apart by the selector constraints.

    Never resolved silently: the candidates and the partial trace travel with
    the exception.
    """

    def __init__(self, message, candidates=(), trace=None):
        super().__init__(message)
        self.candidates = tuple(sorted(candidates))
        self.trace = trace

    @property
    def interval(self):
        if not self.candidates:
            return (float("nan"), float("nan"))
        return (self.candidates[0], self.candidates[-1])
