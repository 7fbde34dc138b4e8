"""Exception hierarchy shared by every module."""


class JuntaProbeError(Exception):
    """Base class for all library errors."""


class InvalidArgument(JuntaProbeError, ValueError):
    """A caller supplied a parameter outside its documented domain."""


class BudgetExceeded(JuntaProbeError):
    """A query budget cap would be exceeded by the next oracle call."""

    def __init__(self, limit, attempted):
        self.limit = limit
        self.attempted = attempted
        super().__init__(f"query budget exceeded: cap {limit}, attempted total {attempted}")


class QueriesFrozen(JuntaProbeError):
    """An oracle was queried while its ledger was frozen."""


class EstimationFailed(JuntaProbeError):
    """An estimator could not produce a value (propagated upward)."""


class RankDeficient(JuntaProbeError):
    """A matrix expected to be positive definite had a too-small eigenvalue."""

    def __init__(self, lambda_min, floor):
        self.lambda_min = float(lambda_min)
        self.floor = float(floor)
        super().__init__(f"smallest eigenvalue {lambda_min:.3e} below floor {floor:.3e}")


class PerturbationTooLarge(RankDeficient):
    """An estimated Gram matrix is too far from any valid Gram matrix."""


class CertificationFailed(JuntaProbeError):
    """Anchors collected by the learner turned out not to be independent."""


class CoverTooLarge(JuntaProbeError):
    """Cover enumeration would exceed the configured size cap."""

    def __init__(self, size_estimate, cap):
        self.size_estimate = size_estimate
        self.cap = cap
        super().__init__(
            f"cover has about {size_estimate} elements, cap is {cap}; "
            "use a restricted hypothesis family instead"
        )
