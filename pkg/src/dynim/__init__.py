"""Dynamic influence maximization with a learned candidate-node predictor."""

__version__ = "0.1.0"
