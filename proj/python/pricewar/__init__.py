"""Python bindings for the pricewar library."""

from ._core import (
    ConfigError,
    DataError,
    StateError,
    discretize,
    dp_allocate,
    infer,
    market_share,
    policy_names,
    sigmoid_preference,
    simulate,
    update_sigma,
    wasserstein1,
)

__all__ = [
    "ConfigError",
    "DataError",
    "StateError",
    "discretize",
    "dp_allocate",
    "infer",
    "market_share",
    "policy_names",
    "sigmoid_preference",
    "simulate",
    "update_sigma",
    "wasserstein1",
]
