"""Python face of the low-rank adaptation workbench.

Thin re-export of the compiled extension. The heavy lifting (training,
rescoring, perturbation) lives in C++; this module exposes the metric,
schedule, and text helpers plus a `main()` that drives the same CLI as
the `loralab` binary.
"""

from ._loralab import (
    ConfigError,
    InputError,
    Model,
    UndefinedMetricError,
    budget_at_step,
    delta_wer,
    main,
    nprr,
    phonetic_key,
    rank_at_step,
    sensitivity,
    tokenize,
    wer,
)

__all__ = [
    "ConfigError",
    "InputError",
    "Model",
    "UndefinedMetricError",
    "budget_at_step",
    "delta_wer",
    "main",
    "nprr",
    "phonetic_key",
    "rank_at_step",
    "sensitivity",
    "tokenize",
    "wer",
]
