"""Shape parameters on the deformation variety: evaluation, Gauss-Newton solving,
continuation toward orbifold Dehn fillings and ideal-point detection.

Shapes are carried together with their complements ``1 - z``.  Whichever of
the two is smaller in modulus is the primary copy that Newton updates touch,
so a coordinate converging to 1 keeps full relative precision in ``1 - z``.
"""
from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .roots import MAX_ORDER, ROOT_TOL, NotUnitModulus, OrderNotFound, RootOfUnity, detect_root_of_unity
from .triangulation import (
    MonomialEquation,
    Triangulation,
    build_gluing_equations,
    compute_edge_classes,
    match_shape_slots,
    translate_shapes,
)
from .volume import volume as _volume

log = logging.getLogger(__name__)

__all__ = [
    "SolverError",
    "NoConvergence",
    "DegenerateLimit",
    "DegenerateEvaluation",
    "OrientationError",
    "SolverOptions",
    "ShapeAssignment",
    "EquationSystem",
    "Outcome",
    "DegenerationReport",
    "eval_residuals",
    "eval_cleared_residuals",
    "eval_jacobian",
    "eval_cleared_jacobian",
    "solve_complete",
    "holonomy",
    "is_pole",
    "continue_filling",
    "volume",
    "tangent_spectrum",
    "tangent_nullity",
    "detect_root_of_unity",
    "DEFAULT_SEED",
]

DEFAULT_SEED = complex(0.5, 0.866)
POLE = complex(math.inf, 0.0)


class SolverError(RuntimeError):
    pass


class NoConvergence(SolverError):
    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = list(residuals)


class DegenerateLimit(SolverError):
    pass


class OrientationError(SolverError):
    pass


class DegenerateEvaluation(ArithmeticError):
    """A monomial with a negative exponent was evaluated at an exact 0 or 1."""


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-12
    max_iter: int = 50
    degeneracy: float = 1e-6
    pole: float = 1e6
    dt0: float = 0.01
    dt_min: float = 1e-9
    max_steps: int = 100_000
    # a continuation step may move each shape by at most this fraction of its
    # distance to {0, 1}
    step_fraction: float = 0.5
    rcond: float = 1e-13
    # smallest Gauss-Newton damping factor before an iteration counts as failed
    min_damping: float = 2.0**-20


class ShapeAssignment:
    """One complex shape per tetrahedron, with complements ``1 - z`` kept exact."""

    __slots__ = ("_z", "_w")

    def __init__(self, shapes: Sequence[complex], complements: Sequence[complex] | None = None):
        z = np.array(shapes, dtype=complex).ravel()
        w = 1 - z if complements is None else np.array(complements, dtype=complex).ravel()
        if w.shape != z.shape:
            raise ValueError("shapes and complements differ in length")
        z.flags.writeable = False
        w.flags.writeable = False
        self._z, self._w = z, w

    @property
    def shapes(self) -> np.ndarray:
        return self._z

    @property
    def complements(self) -> np.ndarray:
        return self._w

    def __len__(self):
        return len(self._z)

    def __iter__(self):
        return iter(self._z)

    def __repr__(self):
        return "ShapeAssignment([%s])" % ", ".join(f"{z:.12g}" for z in self._z)

    def distances(self) -> np.ndarray:
        """Distance of each shape to the nearest of 0, 1, inf (chordal for inf)."""
        z, w = self._z, self._w
        with np.errstate(divide="ignore"):
            far = np.where(z == 0, math.inf, 1 / np.abs(z))
        return np.minimum(np.minimum(np.abs(z), np.abs(w)), far)

    def nondegenerate(self, delta: float = 1e-6) -> bool:
        return bool(np.all(self.distances() > delta))

    def collapsed(self, delta: float = 1e-6) -> list[tuple[int, str]]:
        """``(tet, limit)`` for each shape within ``delta`` of 0, 1 or inf."""
        out = []
        for i, (z, w) in enumerate(zip(self._z, self._w)):
            if abs(z) < delta:
                out.append((i, "0"))
            elif abs(w) < delta:
                out.append((i, "1"))
            elif abs(z) > 1 / delta:
                out.append((i, "inf"))
        return out

    def positively_oriented(self) -> bool:
        return bool(np.all(self._z.imag > 0))


def _as_shapes(s) -> ShapeAssignment:
    return s if isinstance(s, ShapeAssignment) else ShapeAssignment(s)


@dataclass(frozen=True)
class EquationSystem:
    """Edge equations plus named peripheral holonomies.

    ``slots`` is set for systems built from a gluing table in derived mode:
    explicit-labeling shape ``i`` is slot ``slots[i]`` of this system's shape.
    """

    equations: tuple[MonomialEquation, ...]
    curves: tuple[MonomialEquation, ...] = ()
    slots: tuple[int, ...] | None = None

    def __post_init__(self):
        lengths = {len(e) for e in self.equations + self.curves}
        if len(lengths) > 1:
            raise ValueError(f"exponent vectors of mixed lengths {sorted(lengths)}")

    @property
    def num_shapes(self) -> int:
        return len((self.equations + self.curves)[0])

    @property
    def curve_labels(self) -> list[str]:
        return [c.label for c in self.curves]

    def curve(self, label: str) -> MonomialEquation:
        for c in self.curves:
            if c.label == label:
                return c
        raise KeyError(f"no curve named {label!r}; have {self.curve_labels}")

    @classmethod
    def from_triangulation(cls, tri: Triangulation, mode: str = "explicit") -> EquationSystem:
        """``explicit``: equations from the file.  ``derived``: equations from the
        edge classes; curves are translated from the explicit labeling when the
        file has explicit equations, otherwise taken as written."""
        if mode == "explicit":
            if not tri.equations:
                raise ValueError(f"{tri.name} has no explicit equations; use derived mode")
            return cls(tri.equations, tri.curves)
        if mode != "derived":
            raise ValueError(f"unknown mode {mode!r}")
        built = tuple(build_gluing_equations(tri, compute_edge_classes(tri)))
        if not tri.equations:
            return cls(built, tri.curves)
        slots = match_shape_slots(built, tri.equations)
        return cls(built, tuple(c.substitute(slots) for c in tri.curves), slots)

    def to_explicit(self, s) -> np.ndarray:
        """Shapes in the explicit labeling (identity unless derived from a table)."""
        z = _as_shapes(s).shapes
        return z.copy() if self.slots is None else translate_shapes(z, self.slots)

    def from_explicit(self, shapes) -> ShapeAssignment:
        z = np.asarray(shapes, dtype=complex)
        if self.slots is None:
            return ShapeAssignment(z)
        inverse = tuple({0: 0, 1: 2, 2: 1}[s] for s in self.slots)
        return ShapeAssignment(translate_shapes(z, inverse))


# -- monomial evaluation ----------------------------------------------------


def _exponents(eqs: Sequence[MonomialEquation]) -> tuple[np.ndarray, np.ndarray]:
    return np.array([e.a for e in eqs], dtype=int), np.array([e.b for e in eqs], dtype=int)


def _powers(x: np.ndarray, e: np.ndarray) -> np.ndarray:
    """``x**e`` elementwise (broadcast over rows of ``e``) with exact zeros."""
    if np.any((x == 0) & (e < 0)):
        raise DegenerateEvaluation("negative power of an exactly degenerate shape")
    return np.power(x, e)


def _monomials(A: np.ndarray, B: np.ndarray, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.prod(_powers(z, A) * _powers(w, B), axis=1)


def _monomial_gradients(A: np.ndarray, B: np.ndarray, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """d/dz_i of prod_k z_k**A[j,k] (1-z_k)**B[j,k]; exact at zeros when the
    exponents there are nonnegative."""
    factors = _powers(z, A) * _powers(w, B)
    da = np.where(A != 0, A * _powers(z, np.where(A != 0, A - 1, 0)), 0) * _powers(w, B)
    db = np.where(B != 0, B * _powers(w, np.where(B != 0, B - 1, 0)), 0) * _powers(z, A)
    dfac = da - db
    rows, cols = A.shape
    grad = np.empty((rows, cols), dtype=complex)
    for i in range(cols):
        others = np.prod(np.delete(factors, i, axis=1), axis=1)
        grad[:, i] = others * dfac[:, i]
    return grad


def eval_residuals(sys: EquationSystem, s) -> np.ndarray:
    """``prod z**a (1-z)**b - sign`` for each edge equation."""
    s = _as_shapes(s)
    A, B = _exponents(sys.equations)
    signs = np.array([e.sign for e in sys.equations])
    return _monomials(A, B, s.shapes, s.complements) - signs


def eval_jacobian(sys: EquationSystem, s) -> np.ndarray:
    """Analytic Jacobian of :func:`eval_residuals` with respect to the shapes."""
    s = _as_shapes(s)
    A, B = _exponents(sys.equations)
    return _monomial_gradients(A, B, s.shapes, s.complements)


def _cleared_parts(eqs: Sequence[MonomialEquation]):
    parts = [e.cleared() for e in eqs]
    pa, pb, qa, qb = (np.array([p[k] for p in parts]) for k in range(4))
    signs = np.array([e.sign for e in eqs])
    return pa, pb, qa, qb, signs


def eval_cleared_residuals(sys: EquationSystem, s) -> np.ndarray:
    """``P - sign*Q`` with denominators cleared; defined at degenerate shapes."""
    s = _as_shapes(s)
    pa, pb, qa, qb, signs = _cleared_parts(sys.equations)
    z, w = s.shapes, s.complements
    return _monomials(pa, pb, z, w) - signs * _monomials(qa, qb, z, w)


def eval_cleared_jacobian(sys: EquationSystem, s) -> np.ndarray:
    s = _as_shapes(s)
    pa, pb, qa, qb, signs = _cleared_parts(sys.equations)
    z, w = s.shapes, s.complements
    return _monomial_gradients(pa, pb, z, w) - signs[:, None] * _monomial_gradients(qa, qb, z, w)


def holonomy(sys: EquationSystem, curve: str, s) -> complex:
    """``sign * prod z**a (1-z)**b`` for the named curve.

    A vanishing denominator returns ``inf`` (a pole); ``0/0`` raises
    :class:`DegenerateEvaluation`.
    """
    s = _as_shapes(s)
    c = sys.curve(curve)
    pa, pb, qa, qb = c.cleared()
    num = _monomials(pa[None], pb[None], s.shapes, s.complements)[0]
    den = _monomials(qa[None], qb[None], s.shapes, s.complements)[0]
    if den == 0:
        if num == 0:
            raise DegenerateEvaluation(f"holonomy of {curve} is 0/0 here")
        return POLE
    return c.sign * num / den


def is_pole(h: complex, threshold: float = 1e6) -> bool:
    return not cmath.isfinite(h) or abs(h) > threshold


def volume(s, delta: float = 1e-6) -> float:
    return _volume(_as_shapes(s).shapes, delta)


def tangent_spectrum(sys: EquationSystem, s) -> np.ndarray:
    """Singular values (descending) of the cleared edge-equation Jacobian."""
    return np.linalg.svd(eval_cleared_jacobian(sys, s), compute_uv=False)


def tangent_nullity(sys: EquationSystem, s, rank_tol: float = 1e-9) -> int:
    """Dimension of the naive Zariski tangent space of the edge equations at ``s``."""
    sv = tangent_spectrum(sys, s)
    n = sys.num_shapes
    if sv.size == 0 or sv[0] == 0:
        return n
    return n - int(np.sum(sv > rank_tol * sv[0]))


# -- Gauss-Newton -----------------------------------------------------------

Residual = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _stacked(sys: EquationSystem, targets: Mapping[str, complex]) -> Residual:
    """Residuals ``[edge eqs; h_c - target_c]`` and their Jacobian."""
    eqs = list(sys.equations)
    curves = [sys.curve(label) for label in targets]
    A, B = _exponents(eqs + curves)
    rhs = np.array([e.sign for e in eqs] + [targets[c.label] for c in curves], dtype=complex)
    scale = np.array([1] * len(eqs) + [c.sign for c in curves], dtype=complex)

    def fun(z, w):
        r = scale * _monomials(A, B, z, w) - rhs
        J = scale[:, None] * _monomial_gradients(A, B, z, w)
        return r, J

    return fun


def _move(z: np.ndarray, w: np.ndarray, dz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    near_zero = np.abs(z) <= np.abs(w)
    z2 = np.where(near_zero, z + dz, 1 - (w - dz))
    w2 = np.where(near_zero, 1 - (z + dz), w - dz)
    return z2, w2


def _newton_step(J: np.ndarray, r: np.ndarray, z: np.ndarray, w: np.ndarray, rcond: float) -> np.ndarray:
    # column scaling by z(1-z) keeps the system well conditioned near 0 and 1
    d = z * w
    d = np.where(d == 0, 1, d)
    dv = np.linalg.lstsq(J * d, -r, rcond=rcond)[0]
    return d * dv


@dataclass
class _GNResult:
    z: np.ndarray
    w: np.ndarray
    converged: bool
    iterations: int
    history: list = field(default_factory=list)


def _gauss_newton(fun: Residual, z, w, opts: SolverOptions) -> _GNResult:
    try:
        r, J = fun(z, w)
    except DegenerateEvaluation:
        return _GNResult(z, w, False, 0)
    norm = float(np.linalg.norm(r))
    history = [norm]
    for it in range(1, opts.max_iter + 1):
        if norm < opts.tol:
            return _GNResult(z, w, True, it - 1, history)
        dz = _newton_step(J, r, z, w, opts.rcond)
        step = 1.0
        while True:
            zn, wn = _move(z, w, step * dz)
            try:
                rn, Jn = fun(zn, wn)
                new_norm = float(np.linalg.norm(rn))
            except DegenerateEvaluation:
                new_norm = math.inf
            if new_norm < norm:
                break
            step /= 2
            if step < opts.min_damping:
                return _GNResult(z, w, False, it, history)
        z, w, r, J, norm = zn, wn, rn, Jn, new_norm
        history.append(norm)
    return _GNResult(z, w, norm < opts.tol, opts.max_iter, history)


def _solve_complete(sys: EquationSystem, seed, opts: SolverOptions) -> tuple[ShapeAssignment, list[float]]:
    if not sys.curves:
        raise ValueError("completeness needs at least one peripheral curve")
    if seed is None:
        seed = [DEFAULT_SEED] * sys.num_shapes
    seed = _as_shapes(seed)
    fun = _stacked(sys, {c.label: 1 for c in sys.curves})
    res = _gauss_newton(fun, seed.shapes, seed.complements, opts)
    found = ShapeAssignment(res.z, res.w)
    if not found.nondegenerate(opts.degeneracy):
        raise DegenerateLimit(f"iterates left the nondegenerate region: {found}")
    if not res.converged:
        raise NoConvergence(
            f"no convergence after {res.iterations} iterations (residual {res.history[-1]:.3g})", res.history
        )
    if not found.positively_oriented():
        raise OrientationError(f"solution is not positively oriented: {found}")
    return found, res.history


def solve_complete(sys: EquationSystem, seed=None, opts: SolverOptions | None = None) -> ShapeAssignment:
    """Complete structure: every edge equation and every curve holonomy equal to 1.

    Gauss-Newton on the stacked, overdetermined system, started from ``seed``
    (default ``0.5+0.866i`` everywhere).  Raises :class:`NoConvergence`,
    :class:`DegenerateLimit` or :class:`OrientationError`.
    """
    return _solve_complete(sys, seed, opts or SolverOptions())[0]


def solve_complete_with_history(sys: EquationSystem, seed=None, opts: SolverOptions | None = None):
    """:func:`solve_complete` plus the residual norm after each iteration."""
    return _solve_complete(sys, seed, opts or SolverOptions())


# -- orbifold filling continuation ------------------------------------------


class Outcome(str, enum.Enum):
    HYPERBOLIC_SOLUTION = "HYPERBOLIC_SOLUTION"
    IDEAL_POINT_DEGENERATION = "IDEAL_POINT_DEGENERATION"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class DegenerationReport:
    outcome: Outcome
    final_shapes: ShapeAssignment
    collapsed: list[tuple[int, str]]
    holonomy_values: dict[str, complex]
    root_of_unity: RootOfUnity | None
    volume: float
    steps_taken: int
    curve: str
    n: int
    t_reached: float
    reason: str = ""
    root_curve: str | None = None

    def __post_init__(self):
        if self.outcome is Outcome.IDEAL_POINT_DEGENERATION and not self.collapsed:
            raise ValueError("an ideal-point degeneration needs at least one collapsed tetrahedron")


def _tangent(fun: Residual, z, w, dtarget: complex, rcond: float) -> np.ndarray:
    """dz/dt along the path where the last residual row tracks the moving target."""
    r, J = fun(z, w)
    rhs = np.zeros(len(r), dtype=complex)
    rhs[-1] = dtarget
    return _newton_step(J, -rhs, z, w, rcond)


def _limits(sys: EquationSystem, s: ShapeAssignment, opts: SolverOptions) -> dict[str, complex]:
    out = {}
    for label in sorted(sys.curve_labels):
        try:
            h = holonomy(sys, label, s)
        except DegenerateEvaluation:
            h = complex(math.nan, math.nan)
        out[label] = POLE if is_pole(h, opts.pole) else h
    return out


def _root_at_ideal_point(holonomies: Mapping[str, complex], preferred: str) -> tuple[str | None, RootOfUnity | None]:
    finite = [c for c, h in holonomies.items() if cmath.isfinite(h)]
    for label in ([preferred] if preferred in finite else []) + [c for c in finite if c != preferred]:
        try:
            return label, detect_root_of_unity(holonomies[label], max_order=MAX_ORDER, tol=ROOT_TOL)
        except (NotUnitModulus, OrderNotFound):
            continue
    return None, None


def continue_filling(
    sys: EquationSystem,
    curve: str,
    n: int,
    start,
    opts: SolverOptions | None = None,
) -> DegenerationReport:
    """Deform from ``start`` along ``h_curve = exp(2 pi i t / n)``, ``t`` from 0 to 1
(constant target 1 when ``n == 1``).

    Tangent predictor, Gauss-Newton corrector, step halving on failure.  The
    run ends in a hyperbolic solution at ``t = 1``, in an ideal-point
    degeneration when the step underflows with some shapes collapsed onto
    0, 1 or infinity, or inconclusively.
    """
    opts = opts or SolverOptions()
    if n < 1:
        raise ValueError("n must be a positive integer")
    start = _as_shapes(start)
    sys.curve(curve)
    # n = 1 is the trivial filling: the target stays at 1 rather than winding once
    omega = 2j * math.pi / n if n > 1 else 0j

    def fun_at(t: float) -> Residual:
        return _stacked(sys, {curve: cmath.exp(omega * t)})

    z, w = np.array(start.shapes), np.array(start.complements)
    t, dt, steps = 0.0, opts.dt0, 0
    reason = ""
    while t < 1:
        if steps >= opts.max_steps:
            reason = f"step budget of {opts.max_steps} exhausted at t={t:.12g}"
            break
        if dt < opts.dt_min:
            reason = f"step size underflow at t={t:.12g}"
            break
        t1 = min(1.0, t + dt)
        try:
            dzdt = _tangent(fun_at(t), z, w, omega * cmath.exp(omega * t), opts.rcond)
            zp, wp = _move(z, w, (t1 - t) * dzdt)
            res = _gauss_newton(fun_at(t1), zp, wp, opts)
        except (DegenerateEvaluation, np.linalg.LinAlgError):
            res = None
        bound = opts.step_fraction * np.minimum(np.abs(z), np.abs(w))
        if (
            res is not None
            and res.converged
            and np.all(np.abs(res.z - z) <= bound)
            and np.all(np.isfinite(res.z))
        ):
            z, w, t = res.z, res.w, t1
            steps += 1
            if res.iterations <= 3:
                dt = min(2 * dt, opts.dt0)
        else:
            dt /= 2
    final = ShapeAssignment(z, w)
    collapsed = final.collapsed(opts.degeneracy)
    holonomies = _limits(sys, final, opts)
    root_curve, root = None, None

    if t >= 1:
        if collapsed:
            outcome = Outcome.IDEAL_POINT_DEGENERATION
        elif final.positively_oriented():
            outcome = Outcome.HYPERBOLIC_SOLUTION
        else:
            outcome = Outcome.INCONCLUSIVE
            reason = "target reached with shapes not all positively oriented"
    elif collapsed and reason.startswith("step size underflow"):
        outcome = Outcome.IDEAL_POINT_DEGENERATION
    else:
        outcome = Outcome.INCONCLUSIVE
        reason = reason or "continuation stopped early"
    if outcome is Outcome.IDEAL_POINT_DEGENERATION:
        root_curve, root = _root_at_ideal_point(holonomies, curve)
    log.debug("filling %s 1/%d: %s after %d steps, t=%.12g", curve, n, outcome.value, steps, t)
    return DegenerationReport(
        outcome=outcome,
        final_shapes=final,
        collapsed=collapsed,
        holonomy_values=holonomies,
        root_of_unity=root,
        volume=volume(final, opts.degeneracy),
        steps_taken=steps,
        curve=curve,
        n=n,
        t_reached=t,
        reason=reason,
        root_curve=root_curve,
    )
