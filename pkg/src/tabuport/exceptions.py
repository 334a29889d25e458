"""Exception hierarchy shared by every module of the package."""


class TabuportError(Exception):
    """Base class for all errors raised by tabuport."""


class MalformedFile(TabuportError, ValueError):
    pass


class InconsistentCount(TabuportError, ValueError):
    pass


class CorrelationOutOfRange(TabuportError, ValueError):
    pass


class IndexOutOfRange(TabuportError, IndexError):
    pass


class InfeasibleBounds(TabuportError, ValueError):
    """No portfolio can satisfy the cardinality and weight bounds."""


class NonPositiveWeight(TabuportError, ValueError):
    pass


class DuplicateAsset(TabuportError, ValueError):
    pass


class AssetNotInPortfolio(TabuportError, ValueError):
    pass


class AssetAlreadyInPortfolio(TabuportError, ValueError):
    pass


class NoReplacementAvailable(TabuportError, ValueError):
    """Decrease move needs a replacement asset but every asset is already held."""


class EmptyNeighborhood(TabuportError, ValueError):
    pass


class Infeasible(TabuportError, ValueError):
    """Target return cannot be reached by any long-only portfolio."""


class NotConverged(TabuportError, RuntimeError):
    pass


class EmptyFrontier(TabuportError, ValueError):
    pass


class SchemaMismatch(TabuportError, ValueError):
    pass
