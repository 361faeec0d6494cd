"""Exception hierarchy shared across the package."""


class TrajcoreError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(TrajcoreError):
    """An object violates one of its structural invariants."""


class RowSumError(ValidationError):
    """A probability row does not sum to one within tolerance."""

    def __init__(self, what, row, total, tol):
        self.what = what
        self.row = row
        self.total = total
        self.tol = tol
        super().__init__(
            f"{what} row {row} sums to {total!r}, expected 1 within {tol}"
        )


class EmptyGoalError(ValidationError):
    """The goal set is empty."""


class HorizonError(ValidationError):
    """The horizon is not a positive integer."""


class DimensionMismatch(ValidationError):
    """Two objects that must share dimensions do not."""


class ConfigError(ValidationError):
    """An environment configuration is inconsistent or unsolvable."""


class UnmappedSymbol(TrajcoreError):
    """An abstraction was applied to a pair outside its mapping."""

    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"abstraction has no entry for pair {pair!r}")


class EmptySuccessSet(TrajcoreError):
    """A core was requested over zero successful trajectories."""


class GuardError(TrajcoreError):
    """A combinatorial search exceeded its configured budget."""


class ExplosionGuard(GuardError):
    """Trajectory enumeration visited more nodes than the budget allows."""

    def __init__(self, budget, visited):
        self.budget = budget
        self.visited = visited
        super().__init__(
            f"enumeration frontier exceeded node budget {budget} "
            f"(visited {visited} nodes); raise the budget explicitly to proceed"
        )


class BudgetExceeded(GuardError):
    """Common-subsequence search produced more sequences than the budget."""

    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"common-subsequence set exceeded budget {budget}")


class OracleScaleError(TrajcoreError):
    """The brute-force oracle was invoked outside its supported scale."""


class ParseError(TrajcoreError):
    """A file could not be parsed into the expected schema."""

    def __init__(self, path, detail):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")
