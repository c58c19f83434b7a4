"""Information-bottleneck generalization metrics and bound evaluators."""

__version__ = "0.1.0"
