"""Exception hierarchy shared across the package."""


class GratingError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(GratingError):
    """Invalid configuration or parameter values."""


class NumericalError(GratingError):
    """Base class for failures of the numerical machinery."""


class WoodAnomalyError(NumericalError):
    """A mode grazes the propagating/evanescent boundary (beta_n ~ 0).

    Carries the offending mode indices so the caller can perturb the
    wavenumber or the incidence angle.
    """

    def __init__(self, indices, kappa, theta):
        self.indices = tuple(indices)
        self.kappa = kappa
        self.theta = theta
        super().__init__(
            f"Wood anomaly at modes n={self.indices} "
            f"(kappa={kappa}, theta={theta})"
        )


class IllConditionedError(NumericalError):
    """Collocation system too ill-conditioned; reduce the mode count."""


class DivergedError(NumericalError):
    """Landweber objective blew up; relaxation parameter too large."""


class OrderViolationError(NumericalError):
    """Eigenvalue ordering required by the recovery formula is violated."""
