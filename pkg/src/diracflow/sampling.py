"""Quasi-random sample generation over chart boxes."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .fields import Chart

__all__ = ["sample_box", "validation_samples"]

DEFAULT_SAMPLE_COUNT = 100


def sample_box(lower, upper, count: int = DEFAULT_SAMPLE_COUNT,
               seed: int = 0) -> list[np.ndarray]:
    """Low-discrepancy (scrambled Halton) points in an axis-aligned box."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    engine = qmc.Halton(d=lower.size, scramble=True, seed=seed)
    unit = engine.random(count)
    return list(lower + unit * (upper - lower))


def validation_samples(chart: Chart, samples: Sequence | None,
                       count: int = DEFAULT_SAMPLE_COUNT,
                       seed: int = 0) -> list[np.ndarray]:
    """Samples for constructor-time residual checks.

    Uses the provided points when given, otherwise draws from the chart's
    sample box (falling back to the unit box around the origin).
    """
    if samples is not None:
        return [np.asarray(x, dtype=float) for x in samples]
    if chart.sample_box is not None:
        lower, upper = chart.sample_box
    else:
        lower = -np.ones(chart.dim)
        upper = np.ones(chart.dim)
    return sample_box(lower, upper, count, seed)
