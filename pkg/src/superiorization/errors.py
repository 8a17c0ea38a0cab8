"""Exception hierarchy shared by all modules."""


class SuperiorizationError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SuperiorizationError, ValueError):
    def __init__(self, expected, got, what="vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class InvalidSetError(SuperiorizationError, ValueError):
    pass


class PlanError(SuperiorizationError, ValueError):
    """A string plan is unfit, badly weighted or outside its declared bounds."""


class ObjectiveError(SuperiorizationError, ValueError):
    pass


class InnerLoopBudgetError(SuperiorizationError, RuntimeError):
    """The strong-mode acceptance loop ran out of trials."""

    def __init__(self, k, n, ell, trials):
        self.k = k
        self.n = n
        self.ell = ell
        self.trials = trials
        super().__init__(
            f"no acceptable perturbation after {trials} trials "
            f"(outer k={k}, inner n={n}, step index ell={ell})"
        )


class ConfigError(SuperiorizationError, ValueError):
    """Malformed configuration; ``field`` names the offending key path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
