"""Hyperbolic volume of ideal tetrahedra via the Bloch-Wigner dilogarithm."""
from __future__ import annotations

import cmath
import math
from typing import Iterable

import numpy as np
from scipy.special import spence

__all__ = ["bloch_wigner", "volume"]

DEGENERACY = 1e-6


def bloch_wigner(z: complex, delta: float = DEGENERACY) -> float:
    """``D(z) = Im Li2(z) + arg(1 - z) log|z|``; zero within ``delta`` of 0, 1, inf."""
    z = complex(z)
    if abs(z) < delta or abs(1 - z) < delta or abs(z) > 1 / delta:
        return 0.0
    # scipy's spence(w) is Li2(1 - w)
    li2 = complex(spence(1 - z))
    w = 1 - z
    # atan2 rather than cmath.phase, which raises when the angle underflows
    return li2.imag + math.atan2(w.imag, w.real) * math.log(abs(z))


def volume(shapes: Iterable[complex], delta: float = DEGENERACY) -> float:
    return float(sum(bloch_wigner(z, delta) for z in np.asarray(list(shapes), dtype=complex)))
