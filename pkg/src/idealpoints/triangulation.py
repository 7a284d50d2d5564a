"""Ideal triangulations: gluing tables, edge classes and gluing equations.

Gluing tables use the SnapPea convention.  Row ``i`` column ``j`` holds an
entry ``k:(pppp)`` meaning face ``j`` of tetrahedron ``i`` is glued to face
``p[j]`` of tetrahedron ``k``, vertex ``l`` of ``i`` going to vertex ``p[l]``.

Multiplicative equations are held as integer exponent vectors::

    prod_i z_i**a[i] * (1 - z_i)**b[i] == sign
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TriangulationError",
    "Gluing",
    "Triangulation",
    "EdgeClass",
    "MonomialEquation",
    "SLOT_NAMES",
    "edge_slot",
    "parse_triangulation",
    "load_triangulation",
    "compute_edge_classes",
    "build_gluing_equations",
    "match_shape_slots",
    "translate_shapes",
]

DATA_DIR = Path(__file__).parent / "data"

# Shape slot carried by each edge (vertex pair) of a tetrahedron:
#   0 -> z,  1 -> z' = 1/(1-z),  2 -> z'' = (z-1)/z
SLOT_NAMES = ("z", "z'", "z''")
_EDGE_SLOT = {(0, 1): 0, (2, 3): 0, (0, 2): 1, (1, 3): 1, (0, 3): 2, (1, 2): 2}
EDGES = tuple(sorted(_EDGE_SLOT))


class TriangulationError(ValueError):
    """Malformed or inconsistent triangulation data."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def edge_slot(u: int, v: int) -> int:
    return _EDGE_SLOT[(min(u, v), max(u, v))]


def _inverse_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * 4
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


@dataclass(frozen=True)
class Gluing:
    neighbor: int
    perm: tuple[int, int, int, int]

    def __str__(self):
        return "%d:(%s)" % (self.neighbor, "".join(map(str, self.perm)))


@dataclass(frozen=True)
class MonomialEquation:
    """``sign * prod z**a (1-z)**b``; as an equation, ``prod z**a (1-z)**b == sign``."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    sign: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if len(self.a) != len(self.b):
            raise ValueError("exponent vectors differ in length")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    def __len__(self):
        return len(self.a)

    @property
    def degree(self) -> int:
        return sum(abs(x) for x in self.a) + sum(abs(x) for x in self.b)

    def times(self, other: MonomialEquation, power: int = 1, label: str | None = None) -> MonomialEquation:
        """Product with ``other**power``.

        Multiplying a holonomy by gluing equations gives a monomial that
        agrees with it on the deformation variety.
        """
        a = tuple(x + power * y for x, y in zip(self.a, other.a))
        b = tuple(x + power * y for x, y in zip(self.b, other.b))
        sign = self.sign * other.sign ** (power % 2)
        return MonomialEquation(a, b, sign, self.label if label is None else label)

    def cleared(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Exponents ``(pa, pb, qa, qb)``, all nonnegative, with the equation
        equivalent to ``P - sign*Q == 0`` where ``P = z**pa (1-z)**pb`` and
        ``Q = z**qa (1-z)**qb``."""
        a = np.array(self.a)
        b = np.array(self.b)
        return (np.maximum(a, 0), np.maximum(b, 0), np.maximum(-a, 0), np.maximum(-b, 0))

    def substitute(self, slots: Sequence[int]) -> MonomialEquation:
        """Rewrite in coordinates ``w`` where ``z_i`` is slot ``slots[i]`` of ``w_i``."""
        a, b, sign = [], [], self.sign
        for ai, bi, s in zip(self.a, self.b, slots):
            if s == 0:
                a.append(ai)
                b.append(bi)
            elif s == 1:
                # z = 1/(1-w), 1-z = -w/(1-w)
                a.append(bi)
                b.append(-ai - bi)
                sign *= (-1) ** (bi % 2)
            elif s == 2:
                # z = -(1-w)/w, 1-z = 1/w
                a.append(-ai - bi)
                b.append(ai)
                sign *= (-1) ** (ai % 2)
            else:
                raise ValueError(f"bad slot {s}")
        return MonomialEquation(tuple(a), tuple(b), sign, self.label)

    def to_line(self, keyword: str) -> str:
        vec = lambda v: "(" + ",".join(str(x) for x in v) + ")"
        return f"{keyword} {self.label} a={vec(self.a)} b={vec(self.b)} sign={self.sign:+d}"

    def __str__(self):
        def factors(exps, base):
            out = []
            for i, e in enumerate(exps, 1):
                if e:
                    f = base.format(i)
                    out.append(f if e == 1 else f"{f}^{e}")
            return out

        body = " ".join(factors(self.a, "z{}") + factors(self.b, "(1-z{})")) or "1"
        return f"{body} = {self.sign:+d}"


@dataclass(frozen=True)
class EdgeClass:
    """Tetrahedron edges identified to one edge of the triangulation.

    ``members`` holds ``(tet, (u, v), slot)`` triples.
    """

    members: tuple[tuple[int, tuple[int, int], int], ...]

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class Triangulation:
    name: str
    tets: tuple[tuple[Gluing, Gluing, Gluing, Gluing], ...]
    equations: tuple[MonomialEquation, ...] = ()
    curves: tuple[MonomialEquation, ...] = ()
    seed: tuple[complex, ...] | None = None
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if not self._checked:
            _validate(self.tets)
        n = len(self.tets)
        for eq in self.equations + self.curves:
            if len(eq) != n:
                raise TriangulationError(f"{eq.label}: exponent vectors must have length {n}")
        if self.seed is not None and len(self.seed) != n:
            raise TriangulationError(f"seed must have {n} entries")

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    def curve(self, label: str) -> MonomialEquation:
        for c in self.curves:
            if c.label == label:
                return c
        raise KeyError(f"no curve named {label!r}; have {[c.label for c in self.curves]}")

    def relabel(self, order: Sequence[int]) -> Triangulation:
        """Triangulation whose tet ``j`` is this triangulation's tet ``order[j]``.

        Explicit equations and curves are not carried over.
        """
        new_index = {old: new for new, old in enumerate(order)}
        tets = tuple(
            tuple(Gluing(new_index[g.neighbor], g.perm) for g in self.tets[old]) for old in order
        )
        return Triangulation(self.name, tets)

    def to_text(self) -> str:
        lines = [f"name {self.name}", f"tetrahedra {self.num_tets}"]
        for i, row in enumerate(self.tets):
            lines.append(f"{i}: " + " ".join(str(g) for g in row))
        lines += [eq.to_line("equation") for eq in self.equations]
        lines += [c.to_line("curve") for c in self.curves]
        if self.seed is not None:
            lines.append("seed " + " ".join(f"{z.real!r},{z.imag!r}" for z in self.seed))
        return "\n".join(lines) + "\n"


def _validate(tets) -> None:
    n = len(tets)
    for i, row in enumerate(tets):
        if len(row) != 4:
            raise TriangulationError(f"tetrahedron {i} needs 4 gluing entries, got {len(row)}")
        for j, g in enumerate(row):
            if not 0 <= g.neighbor < n:
                raise TriangulationError(f"tet {i} face {j}: dangling tetrahedron index {g.neighbor}")
            if sorted(g.perm) != [0, 1, 2, 3]:
                raise TriangulationError(f"tet {i} face {j}: {g.perm} is not a permutation of 0123")
    for i, row in enumerate(tets):
        for j, g in enumerate(row):
            back = tets[g.neighbor][g.perm[j]]
            if back.neighbor != i or back.perm != _inverse_perm(g.perm):
                raise TriangulationError(
                    f"non-involutive gluing: tet {i} face {j} -> tet {g.neighbor} face {g.perm[j]}, "
                    f"but that face maps back via {back}"
                )


_ENTRY = re.compile(r"^(\d+):\((\d{4})\)$")
_VECTOR = re.compile(r"^\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)$")


def _parse_monomial(tokens: list[str], lineno: int) -> MonomialEquation:
    if len(tokens) != 4:
        raise TriangulationError("expected '<label> a=(...) b=(...) sign=<+1|-1>'", lineno)
    label, fields = tokens[0], {}
    for tok in tokens[1:]:
        key, _, value = tok.partition("=")
        fields[key] = value
    try:
        vecs = {}
        for key in ("a", "b"):
            m = _VECTOR.match(fields[key])
            if not m:
                raise TriangulationError(f"bad exponent vector {key}={fields[key]}", lineno)
            vecs[key] = tuple(int(x) for x in m.group(1).split(","))
        sign = int(fields["sign"])
    except KeyError as e:
        raise TriangulationError(f"missing field {e.args[0]}", lineno) from None
    except ValueError as e:
        if isinstance(e, TriangulationError):
            raise
        raise TriangulationError(f"bad sign {fields['sign']!r}", lineno) from None
    try:
        return MonomialEquation(vecs["a"], vecs["b"], sign, label)
    except ValueError as e:
        raise TriangulationError(str(e), lineno) from None


def _parse_complex_pair(tok: str, lineno: int) -> complex:
    try:
        re_, im = tok.split(",")
        return complex(float(re_), float(im))
    except ValueError:
        raise TriangulationError(f"bad seed entry {tok!r}; expected re,im", lineno) from None


def parse_triangulation(text: str) -> Triangulation:
    name = None
    n = None
    rows: dict[int, tuple[Gluing, ...]] = {}
    row_lines: dict[int, int] = {}
    equations, curves, seed = [], [], None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "name":
            name = rest.strip()
        elif head == "tetrahedra":
            try:
                n = int(rest)
            except ValueError:
                raise TriangulationError(f"bad tetrahedron count {rest!r}", lineno) from None
        elif head in ("equation", "curve"):
            mon = _parse_monomial(rest.split(), lineno)
            (equations if head == "equation" else curves).append(mon)
        elif head == "seed":
            seed = tuple(_parse_complex_pair(t, lineno) for t in rest.split())
        elif head.endswith(":") and head[:-1].isdigit():
            if n is None:
                raise TriangulationError("gluing row before 'tetrahedra' line", lineno)
            i = int(head[:-1])
            if i in rows:
                raise TriangulationError(f"duplicate row for tetrahedron {i}", lineno)
            if i >= n:
                raise TriangulationError(f"row index {i} out of range for {n} tetrahedra", lineno)
            entries = rest.split()
            if len(entries) != 4:
                raise TriangulationError(f"expected 4 gluing entries, got {len(entries)}", lineno)
            row = []
            for tok in entries:
                m = _ENTRY.match(tok)
                if not m:
                    raise TriangulationError(f"malformed gluing entry {tok!r}", lineno)
                perm = tuple(int(c) for c in m.group(2))
                if sorted(perm) != [0, 1, 2, 3]:
                    raise TriangulationError(f"malformed permutation ({m.group(2)})", lineno)
                k = int(m.group(1))
                if k >= n:
                    raise TriangulationError(f"dangling tetrahedron index {k}", lineno)
                row.append(Gluing(k, perm))
            rows[i] = tuple(row)
            row_lines[i] = lineno
        else:
            raise TriangulationError(f"unrecognized line {line!r}", lineno)

    if name is None:
        raise TriangulationError("missing 'name' line")
    if n is None:
        raise TriangulationError("missing 'tetrahedra' line")
    missing = sorted(set(range(n)) - set(rows))
    if missing:
        raise TriangulationError(f"missing gluing rows for tetrahedra {missing}")
    tets = tuple(rows[i] for i in range(n))
    try:
        _validate(tets)
    except TriangulationError as e:
        # attach the line of the first offending row
        m = re.search(r"tet (\d+)", str(e))
        lineno = row_lines.get(int(m.group(1))) if m else None
        raise TriangulationError(str(e), lineno) from None
    return Triangulation(name, tets, tuple(equations), tuple(curves), seed, _checked=True)


def load_triangulation(path: str | Path) -> Triangulation:
    """Read a triangulation file.  Bare names such as ``m137`` resolve to the
    bundled data directory when no such file exists."""
    p = Path(path)
    if not p.exists():
        bundled = DATA_DIR / (p.name if p.suffix == ".tri" else p.name + ".tri")
        if bundled.exists():
            p = bundled
    return parse_triangulation(p.read_text(encoding="utf-8"))


def compute_edge_classes(tri: Triangulation) -> list[EdgeClass]:
    parent: dict[tuple[int, tuple[int, int]], tuple[int, tuple[int, int]]] = {}

    def find(x):
        root = x
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for i, row in enumerate(tri.tets):
        for e in EDGES:
            find((i, e))
        for j, g in enumerate(row):
            for u, v in itertools.combinations([x for x in range(4) if x != j], 2):
                other = (g.neighbor, tuple(sorted((g.perm[u], g.perm[v]))))
                ra, rb = find((i, (u, v))), find(other)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    groups: dict = {}
    for i in range(tri.num_tets):
        for e in EDGES:
            groups.setdefault(find((i, e)), []).append((i, e, _EDGE_SLOT[e]))
    return [EdgeClass(tuple(groups[k])) for k in sorted(groups)]


def build_gluing_equations(tri: Triangulation, classes: Iterable[EdgeClass]) -> list[MonomialEquation]:
    n = tri.num_tets
    out = []
    for idx, ec in enumerate(classes):
        a, b, sign = [0] * n, [0] * n, 1
        for tet, _, slot in ec.members:
            if slot == 0:
                a[tet] += 1
            elif slot == 1:
                b[tet] -= 1
            else:
                a[tet] -= 1
                b[tet] += 1
                sign = -sign
        out.append(MonomialEquation(tuple(a), tuple(b), sign, f"edge{idx}"))
    return out


def _exponent_matrix(eqs: Sequence[MonomialEquation]) -> np.ndarray:
    return np.array([list(e.a) + list(e.b) for e in eqs], dtype=float)


def match_shape_slots(
    built: Sequence[MonomialEquation], explicit: Sequence[MonomialEquation], max_tets: int = 10
) -> tuple[int, ...]:
    """Find slots such that explicit coordinate ``z_i`` is slot ``slots[i]`` of the
    builder's shape for tet ``i``, i.e. every explicit equation, rewritten in the
    builder's coordinates, lies in the span of the built equations.

    Raises ``ValueError`` when no assignment (or more than one) works.
    """
    n = len(built[0])
    if n > max_tets:
        raise ValueError(f"slot search is exhaustive (3**n); refusing n={n} > {max_tets}")
    base = _exponent_matrix(built)
    rank = np.linalg.matrix_rank(base)
    hits = []
    for slots in itertools.product(range(3), repeat=n):
        rows = _exponent_matrix([e.substitute(slots) for e in explicit])
        if np.linalg.matrix_rank(np.vstack([base, rows])) == rank:
            hits.append(slots)
    if len(hits) != 1:
        raise ValueError(f"expected exactly one slot assignment, found {len(hits)}")
    return hits[0]


def translate_shapes(shapes: Sequence[complex], slots: Sequence[int]) -> np.ndarray:
    """Explicit-labeling shapes from builder shapes: ``z_i = slot_i(w_i)``."""
    w = np.asarray(shapes, dtype=complex)
    out = w.copy()
    # degenerate shapes map to infinity without a warning
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, s in enumerate(slots):
            if s == 1:
                out[i] = 1 / (1 - w[i]) if w[i] != 1 else complex(np.inf, 0)
            elif s == 2:
                out[i] = (w[i] - 1) / w[i] if w[i] != 0 else complex(np.inf, 0)
    return out
