"""Character variety component X0 of the punctured-torus bundle N.

N has monodromy ``[[-1, -2], [-2, -5]] = -(L^2 R^2)`` acting on the fiber group
``<a, b>`` by::

    phi(a) = b^-1 a^-1 b^-1
    phi(b) = b a (b^-1 a^-1 b^-1)^3

so ``pi_1(N) = <a, b, t | t a t^-1 = phi(a), t b t^-1 = phi(b)>``, with ``t``
and ``l = a b a^-1 b^-1`` spanning the cusp group.

X0 is parametrized by ``gamma = tr AB``::

    2 alpha^2 = gamma^2 + 4,   beta = 2 alpha / gamma,   tau = tr T = -i gamma^2 / 2

The conic closes up in CP^2 with four ideal points, (+-sqrt2 : 0 : 1) as
gamma -> 0 and (1 : +-sqrt2 : 0) as gamma -> infinity.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .roots import RootOfUnity, detect_root_of_unity
from .sl2 import BranchDegeneracy, eigenvalue, make_fundamental_pair, trace_reduce

__all__ = [
    "ExcludedLocus",
    "WrongComponentOrReducible",
    "ComponentMismatch",
    "InconclusiveLimit",
    "CharacterPoint",
    "PtbRepresentation",
    "Direction",
    "IdealPointReport",
    "x0_point",
    "build_representation",
    "verify_star_system",
    "plane_curve_check",
    "trace_a2t",
    "component_signs",
    "ideal_point_limits",
    "find_complete_character",
    "parabolic_roots",
    "random_gammas",
    "SURFACES",
]

# Incompressible surfaces of N besides the fiber (slopes w.r.t. a basis in
# which the fiber has slope infinity).  Static metadata only.
SURFACES = (
    {"name": "S1", "slope": "0", "boundary_components": 4, "genus": 0},
    {"name": "S2", "slope": "1", "boundary_components": 4, "genus": 0},
    {"name": "S3", "slope": "1/2", "boundary_components": 2, "genus": 1},
)

EXCLUDED_TOL = 1e-8


class ExcludedLocus(ValueError):
    pass


class WrongComponentOrReducible(ValueError):
    pass


class ComponentMismatch(ValueError):
    pass


class InconclusiveLimit(ValueError):
    pass


@dataclass(frozen=True)
class CharacterPoint:
    alpha: complex
    beta: complex
    gamma: complex
    tau: complex
    trAT: complex
    trBT: complex
    trABT: complex
    trLT: complex
    trL: complex
    sheet: int = 1


def x0_point(gamma: complex, sheet: int = 1) -> CharacterPoint:
    """Point of X0 over ``gamma``; ``sheet=-1`` selects ``(-alpha, -beta)``."""
    gamma = complex(gamma)
    if abs(gamma) < EXCLUDED_TOL or min(abs(gamma - 2), abs(gamma + 2)) < EXCLUDED_TOL:
        raise ExcludedLocus(f"gamma = {gamma} lies on the excluded locus gamma in {{0, +-2}}")
    alpha = sheet * cmath.sqrt((gamma * gamma + 4) / 2)
    if abs(alpha) < EXCLUDED_TOL:
        raise ExcludedLocus(f"gamma = {gamma} gives alpha = 0 (gamma^2 = -4)")
    beta = 2 * alpha / gamma
    tau = -0.5j * gamma * gamma
    return CharacterPoint(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        tau=tau,
        trAT=beta / gamma * tau,
        trBT=2 * beta * (alpha * alpha - 3) * tau / (gamma * gamma),
        trABT=2 * tau / gamma,
        trLT=-4 / tau,
        trL=alpha**2 + beta**2 + gamma**2 - alpha * beta * gamma - 2,
        sheet=sheet,
    )


def _inv(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def monodromy_images(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phi_a = _inv(B) @ _inv(A) @ _inv(B)
    phi_b = B @ A @ np.linalg.matrix_power(phi_a, 3)
    return phi_a, phi_b


@dataclass(frozen=True)
class PtbRepresentation:
    A: np.ndarray
    B: np.ndarray
    T: np.ndarray
    phi_a: np.ndarray
    phi_b: np.ndarray
    nullspace_gap: float = field(default=math.inf, compare=False)

    @property
    def L(self) -> np.ndarray:
        return self.A @ self.B @ _inv(self.A) @ _inv(self.B)

    def relation_residuals(self) -> dict[str, float]:
        T, Ti = self.T, _inv(self.T)
        return {
            "det": max(abs(np.linalg.det(m) - 1) for m in (self.A, self.B, self.T)),
            "tat": float(np.max(np.abs(T @ self.A @ Ti - self.phi_a))),
            "tbt": float(np.max(np.abs(T @ self.B @ Ti - self.phi_b))),
        }


def _conjugator_system(A, B, phi_a, phi_b) -> np.ndarray:
    """Matrix of ``T -> (T A - phi(A) T, T B - phi(B) T)`` on row-major T."""
    cols = []
    for k in range(4):
        E = np.zeros((2, 2), dtype=complex)
        E.flat[k] = 1
        cols.append(np.concatenate([(E @ A - phi_a @ E).ravel(), (E @ B - phi_b @ E).ravel()]))
    return np.array(cols).T


def build_representation(p: CharacterPoint, tol: float = 1e-8) -> PtbRepresentation:
    """Representation of pi_1(N) with character ``p``; ``T`` is the unique (up to
    sign) conjugator realizing the monodromy, normalized so ``tr T = tau``."""
    A, B = make_fundamental_pair(p.alpha, p.beta, p.gamma)
    phi_a, phi_b = monodromy_images(A, B)
    sv, vh = np.linalg.svd(_conjugator_system(A, B, phi_a, phi_b))[1:]
    null = int(np.sum(sv <= 1e-9 * sv[0]))
    if null != 1:
        raise WrongComponentOrReducible(f"conjugator space has dimension {null}, expected 1")
    T = vh[-1].conj().reshape(2, 2)
    det = np.linalg.det(T)
    if abs(det) < 1e-12:
        raise WrongComponentOrReducible("conjugator is singular")
    T = T / cmath.sqrt(det)
    scale = max(1.0, abs(p.tau))
    if abs(np.trace(T) - p.tau) <= tol * scale:
        pass
    elif abs(-np.trace(T) - p.tau) <= tol * scale:
        T = -T
    else:
        raise ComponentMismatch(f"tr T = +-{np.trace(T):.6g} does not match tau = {p.tau:.6g}")
    gap = sv[-2] / max(sv[-1], np.finfo(float).tiny)
    return PtbRepresentation(A, B, T, phi_a, phi_b, nullspace_gap=float(gap))


def component_signs(p: CharacterPoint, r: PtbRepresentation) -> dict[str, float]:
    """Distances of ``tr(+-T)`` to the two components ``tau = -+ i gamma^2 / 2``."""
    t = complex(np.trace(r.T))
    x0, x1 = -0.5j * p.gamma**2, 0.5j * p.gamma**2
    return {"T_on_X0": abs(t - x0), "T_on_X1": abs(t - x1), "minusT_on_X0": abs(-t - x0), "minusT_on_X1": abs(-t - x1)}


def verify_star_system(p: CharacterPoint, r: PtbRepresentation) -> dict[str, float]:
    """Matrix traces against the closed forms for tr(AT), tr(BT), tr(ABT), tr(LT)."""
    A, B, T, L = r.A, r.B, r.T, r.L
    tau, al, be, ga = p.tau, p.alpha, p.beta, p.gamma
    tr = lambda m: complex(np.trace(m))
    trT = tr(T)
    return {
        "trAT": abs(tr(A @ T) - be / ga * tau),
        "trBT": abs(tr(B @ T) - 2 * be * (al * al - 3) * tau / ga**2),
        "trABT": abs(tr(A @ B @ T) - 2 * tau / ga),
        "trLT": abs(tr(L @ T) + 4 / tau),
        "tau_quartic": abs(4 * trT**2 + ga**4),
    }


def plane_curve_check(p: CharacterPoint, r: PtbRepresentation, tol: float = 1e-9) -> float:
    """Smallest ``|xy + ix + iy + 1|`` over eigenvalues x of T and y of LT."""
    trT = complex(np.trace(r.T))
    trLT = complex(np.trace(r.L @ r.T))
    for name, t in (("T", trT), ("LT", trLT)):
        if min(abs(t - 2), abs(t + 2)) < tol:
            raise BranchDegeneracy(f"tr {name} = {t:.6g} is +-2")
    x = eigenvalue(trT)
    y = eigenvalue(trLT)
    return min(abs(u * v + 1j * u + 1j * v + 1) for u in (x, 1 / x) for v in (y, 1 / y))


def trace_a2t(r: PtbRepresentation) -> complex:
    return complex(np.trace(r.A @ r.A @ r.T))


# -- ideal points -----------------------------------------------------------


class Direction(str, enum.Enum):
    GAMMA_TO_ZERO_PLUS = "GAMMA_TO_ZERO_PLUS"
    GAMMA_TO_ZERO_MINUS = "GAMMA_TO_ZERO_MINUS"
    GAMMA_TO_INFINITY_PLUS = "GAMMA_TO_INFINITY_PLUS"
    GAMMA_TO_INFINITY_MINUS = "GAMMA_TO_INFINITY_MINUS"


@dataclass(frozen=True)
class IdealPointReport:
    direction: Direction
    gammas: list[complex]
    rows: list[dict]
    finite_slope: str
    finite_trace_limit: complex
    pole_slope: str
    projective_limit: tuple[complex, complex, complex]
    expected_point: tuple[float, float, float]
    root: RootOfUnity


def _extrapolate(seq: Sequence[complex], name: str) -> complex:
    """Aitken delta-squared limit of the last three terms, after checking that
    successive differences shrink."""
    x = np.asarray(seq, dtype=complex)
    d = np.abs(np.diff(x))
    slack = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(x))))
    if np.any(d[1:] > d[:-1] + slack):
        raise InconclusiveLimit(f"{name}: successive differences do not shrink ({d})")
    x0, x1, x2 = x[-3:]
    d1, d2 = x1 - x0, x2 - x1
    if abs(d2 - d1) <= slack or abs(d2) <= slack:
        return complex(x2)
    return complex(x2 - d2 * d2 / (d2 - d1))


def _check_pole(seq: Sequence[complex], name: str) -> None:
    mags = np.abs(np.asarray(seq, dtype=complex))
    if not np.all(mags[1:] > 2 * mags[:-1]):
        raise InconclusiveLimit(f"{name}: magnitudes {mags} do not grow geometrically")


def ideal_point_limits(direction: Direction | str, ks: Iterable[int] = range(1, 7)) -> IdealPointReport:
    direction = Direction(direction)
    ks = list(ks)
    if len(ks) < 3:
        raise ValueError("need at least three samples")
    to_zero = direction in (Direction.GAMMA_TO_ZERO_PLUS, Direction.GAMMA_TO_ZERO_MINUS)
    plus = direction in (Direction.GAMMA_TO_ZERO_PLUS, Direction.GAMMA_TO_INFINITY_PLUS)
    if to_zero:
        gammas = [10.0 ** (-k) for k in ks]
        sheet = 1 if plus else -1
    else:
        gammas = [(1 if plus else -1) * 10.0**k for k in ks]
        sheet = 1
    points = [x0_point(g, sheet) for g in gammas]
    rows = [{"gamma": p.gamma, "alpha": p.alpha, "trT": p.tau, "trLT": p.trLT} for p in points]
    if to_zero:
        finite = [p.tau for p in points]
        pole = [p.trLT for p in points]
        finite_slope, pole_slope = "t", "lt"
        coords = [(p.alpha, p.gamma, 1.0) for p in points]
        expected = ((1 if plus else -1) * math.sqrt(2), 0.0, 1.0)
    else:
        finite = [p.trLT for p in points]
        pole = [p.tau for p in points]
        finite_slope, pole_slope = "lt", "t"
        coords = [(1.0, p.gamma / p.alpha, 1 / p.alpha) for p in points]
        expected = (1.0, (1 if plus else -1) * math.sqrt(2), 0.0)
    limit = _extrapolate(finite, f"tr {finite_slope}")
    _check_pole(pole, f"tr {pole_slope}")
    projective = tuple(_extrapolate([c[i] for c in coords], f"coordinate {i}") for i in range(3))
    lam = eigenvalue(limit)
    root = detect_root_of_unity(lam * lam, finite_trace_hint=limit)
    return IdealPointReport(direction, gammas, rows, finite_slope, limit, pole_slope, projective, expected, root)


# -- the complete structure -------------------------------------------------


def _alpha_squared_roots(target: float, samples=(0.7 + 0.4j, 1.3 - 0.9j, -0.6 + 1.7j, 2.4 + 0.3j)) -> np.ndarray:
    """Roots in ``s = alpha^2`` of ``(tr L - target)(s - 2)`` on X0.

    The trace polynomial of the commutator restricted to X0 is rational in s
    with a simple pole at s = 2; clearing it leaves a quadratic, fitted from
    three samples and checked on a fourth.
    """
    trL = trace_reduce("abAB")

    def g(gamma):
        p = x0_point(gamma)
        s = p.alpha**2
        return s, (trL(p.alpha, p.beta, p.gamma) - target) * (s - 2)

    pts = [g(x) for x in samples]
    s = np.array([q[0] for q in pts[:3]])
    vals = np.array([q[1] for q in pts[:3]])
    coeffs = np.linalg.solve(np.vander(s, 3), vals)
    s4, v4 = pts[3]
    if abs(np.polyval(coeffs, s4) - v4) > 1e-9 * max(1.0, abs(v4)):
        raise RuntimeError("commutator trace on X0 is not quadratic after clearing s - 2")
    return np.roots(coeffs)


def parabolic_roots(sign: int) -> np.ndarray:
    """Values of ``alpha^2`` on X0 where ``tr L = 2 * sign``."""
    return _alpha_squared_roots(2.0 * sign)


def find_complete_character(tol: float = 1e-8) -> list[CharacterPoint]:
    """Points of X0 where the fiber boundary ``l`` is parabolic with ``tr L = -2``.

    ``tr L = +2`` only happens at ``alpha^2 = 4``, i.e. ``gamma^2 = 4``, which is the
    reducible locus, so those roots are dropped.
    """
    out = []
    for s in parabolic_roots(-1):
        g2 = 2 * s - 4
        if abs(g2 - 4) < tol:
            continue
        root = cmath.sqrt(g2)
        for gamma in (root, -root):
            out.append(x0_point(gamma))
    return out


def random_gammas(k: int, seed: int | None = 0, rmin: float = 0.3, rmax: float = 3.0, avoid: float = 0.05) -> list[complex]:
    """``k`` points of the annulus ``rmin < |gamma| < rmax`` away from +-2 and +-2i."""
    rng = np.random.default_rng(seed)
    out: list[complex] = []
    bad = (2, -2, 2j, -2j)
    while len(out) < k:
        g = complex(rng.uniform(rmin, rmax) * cmath.exp(1j * rng.uniform(0, 2 * math.pi)))
        if min(abs(g - b) for b in bad) > avoid:
            out.append(g)
    return out
