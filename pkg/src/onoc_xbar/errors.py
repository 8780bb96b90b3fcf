"""Exception types shared across the package."""


class MissingCoefficient(KeyError):
    """A path uses a loss event whose coefficient is absent from the parameter set."""

    def __init__(self, name: str, params_name: str = ""):
        self.name = name
        self.params_name = params_name
        super().__init__(name)

    def __str__(self):
        where = f" in parameter set {self.params_name!r}" if self.params_name else ""
        return f"coefficient {self.name} is not defined{where}"


class SelfCommunication(ValueError):
    """Source and destination core are the same."""


class CollinearOverlap(ValueError):
    """Two distinct waveguides share a collinear sub-segment on one layer."""


class Unroutable(RuntimeError):
    """The crossing-averse router could not find a crossing-free path."""


class NoRoute(RuntimeError):
    """A crossbar mesh failed to route a (source, destination) pair."""


class DegenerateFrontier(ValueError):
    """Both topologies have identical loss structure; every point is break-even."""


class MismatchedRuns(ValueError):
    """Result sets being compared do not cover the same (scale, pitch, params)."""


class UnsupportedSize(UserWarning):
    """A crossbar needs more wavelengths per waveguide than the configured cap."""
