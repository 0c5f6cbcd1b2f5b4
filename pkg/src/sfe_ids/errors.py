"""Exception hierarchy; the CLI maps each class to an exit code."""


class IdsError(Exception):
    exit_code = 1


class ConfigError(IdsError):
    exit_code = 2


class DataError(IdsError):
    exit_code = 3


class InvariantError(IdsError):
    exit_code = 4
