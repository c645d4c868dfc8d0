"""Exception hierarchy shared by the solver modules."""


class PoslinError(Exception):
    pass


class ProblemError(PoslinError, ValueError):
    """Malformed instance: bad JSON, wrong shapes, non-finite data, unknown norm."""


class InfeasiblePolicyError(PoslinError, ValueError):
    pass


class UnstablePolicyError(PoslinError):
    pass


class SingularSystemError(PoslinError):
    pass


class NoStabilizingPolicyError(PoslinError):
    """No feasible linear gain with a stable closed loop was found (J* is infinite)."""


class SeedError(PoslinError, ValueError):
    pass


class OutOfScopeError(PoslinError):
    pass


class SpectralError(PoslinError):
    pass


class ResidualCheckError(PoslinError):
    pass


class InternalConsistencyError(PoslinError):
    pass
