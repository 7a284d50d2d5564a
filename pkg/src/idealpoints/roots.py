"""Roots of unity attached to a peripheral holonomy ``h = lambda**2``."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

__all__ = ["RootOfUnity", "NotUnitModulus", "OrderNotFound", "detect_root_of_unity", "root_order"]

MAX_ORDER = 12
ROOT_TOL = 1e-6


class NotUnitModulus(ValueError):
    pass


class OrderNotFound(ValueError):
    pass


@dataclass(frozen=True)
class RootOfUnity:
    """``lam`` is the chosen square root of the holonomy; ``alternate`` is ``-lam``
    (the sign is not determined by ``h`` alone) with its own order, or ``None``
    when that order exceeds the search bound."""

    lam: complex
    order: int
    alternate: complex
    alternate_order: int | None

    @property
    def trace(self) -> complex:
        return self.lam + 1 / self.lam


def root_order(lam: complex, max_order: int = MAX_ORDER, tol: float = ROOT_TOL) -> int | None:
    """Smallest ``n <= max_order`` with ``|lam**n - 1| < tol``."""
    power = 1 + 0j
    for n in range(1, max_order + 1):
        power *= lam
        if abs(power - 1) < tol:
            return n
    return None


def detect_root_of_unity(
    h: complex,
    finite_trace_hint: complex | None = None,
    max_order: int = MAX_ORDER,
    tol: float = ROOT_TOL,
) -> RootOfUnity:
    if abs(abs(h) - 1) > tol:
        raise NotUnitModulus(f"|h| = {abs(h):.6g} is not 1 within {tol:g}")
    lam = cmath.sqrt(h)
    if finite_trace_hint is not None:
        # strict comparison: ties keep the principal root
        if abs(-lam - 1 / lam - finite_trace_hint) < abs(lam + 1 / lam - finite_trace_hint) - tol:
            lam = -lam
    order = root_order(lam, max_order, tol)
    if order is None:
        raise OrderNotFound(f"{lam:.6g} has no order <= {max_order} within {tol:g}")
    return RootOfUnity(lam, order, -lam, root_order(-lam, max_order, tol))
