"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce when it escapes ``run``.
"""


class LabError(Exception):
    exit_code = 1


class InputError(LabError, ValueError):
    """An argument violates an operation's precondition."""

    exit_code = 2


class ContractError(InputError):
    """A grid function arrived in the wrong representation."""


class DegenerateInputError(InputError):
    pass


class FitError(InputError):
    pass


class ConfigError(InputError):
    """Experiment configuration failed validation."""


class ResolutionError(LabError):
    """The grid cannot represent the requested object."""

    exit_code = 3


class CoverageError(LabError):
    """A randomization plan does not cover the data's frequency support."""

    exit_code = 3
