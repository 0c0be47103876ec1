"""Exception hierarchy shared across the package.

Data errors signal bad input; estimation errors signal that a quantity is
not computable on the given panel (empty switcher sets, singular designs,
and so on). The CLI maps data errors to exit code 1 and infeasible-test
errors to exit code 2.
"""


class AvsqError(Exception):
    """Base class for all package errors."""


class DataError(AvsqError):
    """Invalid or malformed input data."""


class DuplicateCell(DataError):
    def __init__(self, cells):
        self.cells = list(cells)
        super().__init__(f"duplicate (group, period) cells: {self.cells[:10]}")


class UnbalancedPanel(DataError):
    def __init__(self, groups):
        self.groups = list(groups)
        super().__init__(
            f"panel is unbalanced; groups with missing cells: {self.groups[:10]}"
        )


class ParseError(DataError):
    pass


class ConfigError(DataError):
    pass


class EstimationError(AvsqError):
    """A requested quantity cannot be computed on this panel."""


class EmptySubsample(EstimationError):
    pass


class PlaceboUndefined(EstimationError):
    pass


class NormalizationDegenerate(EstimationError):
    pass


class MixedSignDesign(EstimationError):
    pass


class AceDegenerate(EstimationError):
    pass


class TestInfeasible(EstimationError):
    pass


class RankDeficient(EstimationError):
    def __init__(self, message, combination=None):
        self.combination = combination
        super().__init__(message)


class DesignNotIdentified(EstimationError):
    def __init__(self, message, deficient_directions=None):
        self.deficient_directions = deficient_directions
        super().__init__(message)


class CoefficientNotIdentified(EstimationError):
    pass


class UnstableStatistic(EstimationError):
    pass


class DegenerateTest(EstimationError):
    pass
