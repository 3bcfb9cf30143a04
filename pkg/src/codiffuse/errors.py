"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid structural or sweep parameter (grid side, degree, ranges, bad config keys)."""


class GraphGenerationError(RuntimeError):
    """Random graph sampling failed to produce a simple graph within the restart budget."""


class AnalysisError(ValueError):
    """Statistic undefined for the given input (series too short, too few samples)."""


class IntegrationError(RuntimeError):
    """ODE trajectory left the admissible region; reduce the step size."""
