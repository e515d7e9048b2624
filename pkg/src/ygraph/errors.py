"""Exception types shared across the toolkit."""


class YGraphError(Exception):
    """Base class for all toolkit errors."""


class DomainError(YGraphError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(YGraphError):
    """Input data violates a documented contract (decay, causality, grid layout)."""


class SingularMatrixError(YGraphError):
    """A linear system is singular or numerically unusable."""

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class ConfigError(YGraphError):
    """A scenario configuration file failed validation.

    Carries the full list of individual problems so a user sees every
    issue in one pass.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))
