"""Two-stage tweet sentiment polarity and emotion analysis."""

__version__ = "0.1.0"
