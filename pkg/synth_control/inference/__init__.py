from .placebo import (
    DivergenceVerdict,
    PlaceboStudy,
    mspe_ratio,
    placebo_in_space,
    placebo_in_time,
    placebo_outcome_swap,
    unit_swap,
)

__all__ = [
    "DivergenceVerdict",
    "PlaceboStudy",
    "mspe_ratio",
    "placebo_in_space",
    "placebo_in_time",
    "placebo_outcome_swap",
    "unit_swap",
]
