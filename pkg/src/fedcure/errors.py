"""Exception hierarchy shared by every subsystem."""


class FedCureError(Exception):
    """Base class for all simulator errors."""


class ConfigError(FedCureError, ValueError):
    pass


class EmptyCoalition(FedCureError, ValueError):
    pass


class InvalidCoalition(FedCureError, IndexError):
    pass


class InsufficientCoalitions(FedCureError, ValueError):
    pass


class UnboundedDivergence(FedCureError, ArithmeticError):
    pass


class InvalidFrequency(FedCureError, ValueError):
    pass


class InvalidObservation(FedCureError, ValueError):
    pass


class NoAvailableCoalition(FedCureError, LookupError):
    pass


class Undefined(FedCureError, ArithmeticError):
    """Statistic requested where it has no value (zero mean, t = 0, ...)."""


class ShapeError(FedCureError, ValueError):
    pass


class InfeasibleShard(FedCureError, ValueError):
    pass


class EmptyDataset(FedCureError, ValueError):
    pass
