"""Stochastic series expansion Monte Carlo with operator-loop updates."""

from .driver import (
    BinnedEstimate,
    DisorderEnsemble,
    ObservableSeries,
    RunSpec,
    disorder_ensemble,
    run_chain,
)
from .sse import SseConfiguration

__all__ = [
    "BinnedEstimate",
    "DisorderEnsemble",
    "ObservableSeries",
    "RunSpec",
    "SseConfiguration",
    "disorder_ensemble",
    "run_chain",
]
