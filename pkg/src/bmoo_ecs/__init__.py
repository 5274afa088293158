"""Constrained multi-objective Bayesian optimization with an ECS benchmark."""

__version__ = "0.1.0"
