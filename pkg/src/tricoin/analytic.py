"""Closed-form side-landing probabilities in the fully inelastic limit.

Two rotation classes: planar tumbling inscribed in a circle (the side
outcome corresponds to an arc of half-angle arctan(H/2R) about the
horizontal) and general tumbling inscribed in a sphere (the side outcome
corresponds to the equatorial band subtended by the lateral surface).
Both admit exact inversions for the ratio with side probability 1/3.
"""

from __future__ import annotations

import enum
import math


class AnalyticModel(enum.Enum):
    FLAT = "flat"
    VOLUMETRIC = "volumetric"


def _check_ratio(ratio: float) -> None:
    if not (isinstance(ratio, (int, float)) and math.isfinite(ratio)):
        raise ValueError(f"ratio must be a finite number, got {ratio!r}")
    if ratio < 0.0:
        raise ValueError(f"ratio must be >= 0, got {ratio}")


def flat_probability(ratio: float) -> float:
    """P(side) for planar tumbling: 2 arctan(ratio/2) / pi."""
    _check_ratio(ratio)
    return 2.0 * math.atan(0.5 * ratio) / math.pi


def volumetric_probability(ratio: float) -> float:
    """P(side) for general tumbling: ratio / sqrt(ratio^2 + 4)."""
    _check_ratio(ratio)
    return ratio / math.sqrt(ratio * ratio + 4.0)


def side_probability(model: AnalyticModel, ratio: float) -> float:
    if model is AnalyticModel.FLAT:
        return flat_probability(ratio)
    if model is AnalyticModel.VOLUMETRIC:
        return volumetric_probability(ratio)
    raise ValueError(f"unknown analytic model {model!r}")


def fair_ratio(model: AnalyticModel) -> float:
    """The H/R with side probability exactly 1/3, by closed-form inversion.

    Flat: 2 tan(pi/6) = 2/sqrt(3).  Volumetric: 1/sqrt(2).
    Kept independent of the sweep module's root finder so it can serve as
    an oracle for it.
    """
    if model is AnalyticModel.FLAT:
        return 2.0 * math.tan(math.pi / 6.0)
    if model is AnalyticModel.VOLUMETRIC:
        return 1.0 / math.sqrt(2.0)
    raise ValueError(f"unknown analytic model {model!r}")
