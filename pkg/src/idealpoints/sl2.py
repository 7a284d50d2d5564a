"""SL(2, C) words and Fricke trace polynomials for the free group <a, b>.

Words are strings over ``a, b`` with capitals for inverses (``"abAB"`` is the
commutator).  The trace of any word is a polynomial with integer coefficients
in ``alpha = tr A``, ``beta = tr B`` and ``gamma = tr AB``.
"""
from __future__ import annotations

import cmath
import re
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "ReducibleCharacter",
    "BranchDegeneracy",
    "BranchDegeneracyWarning",
    "Word",
    "TracePolynomial",
    "mat2",
    "trace_reduce",
    "eval_word",
    "word_matrix",
    "make_fundamental_pair",
    "eigenvalue",
    "reduced_words",
]


class ReducibleCharacter(ValueError):
    pass


class BranchDegeneracy(ValueError):
    """Trace is +-2, so the matrix need not be diagonalizable."""


class BranchDegeneracyWarning(UserWarning):
    pass


_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


def _free_reduce(letters: str) -> str:
    out: list[str] = []
    for c in letters:
        if c not in _INVERSE:
            raise ValueError(f"bad letter {c!r}; words use a, b, A, B")
        if out and out[-1] == _INVERSE[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def _cyclic_reduce(letters: str) -> str:
    while len(letters) >= 2 and letters[0] == _INVERSE[letters[-1]]:
        letters = letters[1:-1]
    return letters


def _invert(letters: str) -> str:
    return "".join(_INVERSE[c] for c in reversed(letters))


@dataclass(frozen=True)
class Word:
    """Freely reduced word in ``a, b``; ``A = a^-1``, ``B = b^-1``."""

    letters: str = ""

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    def __str__(self):
        return self.letters or "1"

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> Word:
        return Word((self.letters if n >= 0 else _invert(self.letters)) * abs(n))

    def inverse(self) -> Word:
        return Word(_invert(self.letters))

    def canonical(self) -> str:
        """Minimal representative over cyclic rotations and inversion; words
        with equal keys have equal traces."""
        c = _cyclic_reduce(self.letters)
        if not c:
            return ""
        candidates = [c[i:] + c[:i] for i in range(len(c))]
        ci = _invert(c)
        candidates += [ci[i:] + ci[:i] for i in range(len(ci))]
        return min(candidates)


def reduced_words(max_len: int) -> Iterator[Word]:
    """All freely reduced words of length ``<= max_len`` (including the empty word)."""
    frontier = [""]
    yield Word("")
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for c in "abAB":
                if not w or w[-1] != _INVERSE[c]:
                    nxt.append(w + c)
        frontier = nxt
        for w in frontier:
            yield Word(w)


class TracePolynomial:
    """Sparse polynomial ``sum c * alpha**i * beta**j * gamma**k``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int, int], complex] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def constant(cls, c) -> TracePolynomial:
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, name: str) -> TracePolynomial:
        return cls({{"a": (1, 0, 0), "b": (0, 1, 0), "g": (0, 0, 1)}[name]: 1})

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return TracePolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return TracePolynomial({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: dict = {}
        for (i, j, k), c in self.terms.items():
            for (p, q, r), d in other.terms.items():
                key = (i + p, j + q, k + r)
                out[key] = out.get(key, 0) + c * d
        return TracePolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            return self.terms == _coerce(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __call__(self, alpha, beta, gamma):
        return sum(c * alpha**i * beta**j * gamma**k for (i, j, k), c in self.terms.items())

    def is_integral(self) -> bool:
        return all(complex(c).imag == 0 and float(complex(c).real).is_integer() for c in self.terms.values())

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j, k) in sorted(self.terms, reverse=True):
            c = self.terms[(i, j, k)]
            parts.append(f"{_fmt_coeff(c)}*a^{i}*b^{j}*g^{k}")
        return " + ".join(parts)

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> TracePolynomial:
        """Inverse of ``str``."""
        if text.strip() == "0":
            return cls()
        terms = {}
        for part in text.split(" + "):
            m = re.fullmatch(r"\s*(.+)\*a\^(\d+)\*b\^(\d+)\*g\^(\d+)\s*", part)
            if not m:
                raise ValueError(f"bad term {part!r}")
            raw = m.group(1)
            c = int(raw) if re.fullmatch(r"-?\d+", raw) else complex(raw)
            terms[(int(m.group(2)), int(m.group(3)), int(m.group(4)))] = c
        return cls(terms)


def _fmt_coeff(c) -> str:
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    c = complex(c)
    if c.imag == 0 and c.real.is_integer():
        return str(int(c.real))
    return repr(c)


def _coerce(x) -> TracePolynomial:
    if isinstance(x, TracePolynomial):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return TracePolynomial.constant(x)
    raise TypeError(f"cannot use {type(x).__name__} as a trace polynomial")


ALPHA = TracePolynomial.variable("a")
BETA = TracePolynomial.variable("b")
GAMMA = TracePolynomial.variable("g")


@lru_cache(maxsize=None)
def _reduce_canonical(c: str) -> TracePolynomial:
    """Trace polynomial of a canonical (cyclically reduced, minimal) word."""
    n = len(c)
    if n == 0:
        return TracePolynomial.constant(2)
    if n == 1:
        return ALPHA if c in "aA" else BETA
    if c in ("ab", "AB", "ba", "BA"):
        return GAMMA

    def tr(letters: str) -> TracePolynomial:
        return _reduce_canonical(Word(letters).canonical())

    # a repeated letter with the same sign: rotate to g u g v and use
    # tr(XY) = tr X tr Y - tr(X Y^-1) with X = g u, Y = g v
    for i in range(n):
        for j in range(i + 1, n):
            if c[i] == c[j]:
                r = c[i:] + c[:i]
                k = j - i
                x, y = r[:k], r[k:]
                return tr(x) * tr(y) - tr(x + _invert(y))
    if n == 2:
        # g H: tr(g H) = tr g tr h - tr(g h)
        return tr(c[0]) * tr(c[1]) - tr(c[0] + _INVERSE[c[1]])
    # only the letters g, G, h, H remain, each once: g u G v with u, v single
    # letters; rewrite through X = g u, Y = G v
    x, y = c[:2], c[2:]
    return tr(x) * tr(y) - tr(x + _invert(y))


def trace_reduce(w: Word | str) -> TracePolynomial:
    """Polynomial ``p`` with ``p(tr A, tr B, tr AB) == tr(w(A, B))`` for all A, B in SL(2,C)."""
    w = w if isinstance(w, Word) else Word(w)
    return _reduce_canonical(w.canonical())


def mat2(entries, tol: float = 1e-9) -> np.ndarray:
    """2x2 complex matrix, checked to have determinant 1."""
    m = np.array(entries, dtype=complex).reshape(2, 2)
    if abs(np.linalg.det(m) - 1) > tol:
        raise ValueError(f"determinant {np.linalg.det(m):.6g} is not 1")
    return m


def _letter_matrices(A: np.ndarray, B: np.ndarray) -> dict[str, np.ndarray]:
    # adjugate is the inverse in SL(2)
    inv = lambda m: np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return {"a": A, "A": inv(A), "b": B, "B": inv(B)}


def word_matrix(w: Word | str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    w = w if isinstance(w, Word) else Word(w)
    # keep extended precision when the caller supplies it
    dtype = np.result_type(np.asarray(A), np.asarray(B), complex)
    mats = _letter_matrices(np.asarray(A, dtype=dtype), np.asarray(B, dtype=dtype))
    out = np.eye(2, dtype=dtype)
    for c in w.letters:
        out = out @ mats[c]
    return out


def eval_word(w: Word | str, A: np.ndarray, B: np.ndarray):
    return np.trace(word_matrix(w, A, B))[()]


def eigenvalue(trace: complex) -> complex:
    """Root ``x`` of ``x + 1/x = trace`` taking the square root with nonnegative
    imaginary part (nonnegative real part on the real axis)."""
    r = cmath.sqrt(trace * trace - 4)
    if r.imag < 0 or (r.imag == 0 and r.real < 0):
        r = -r
    return (trace + r) / 2


def make_fundamental_pair(alpha: complex, beta: complex, gamma: complex, tol: float = 1e-9):
    """Matrices ``A = [[x, 1], [0, 1/x]]``, ``B = [[y, 0], [z, 1/y]]`` with
    ``tr A = alpha``, ``tr B = beta``, ``tr AB = gamma``.

    Raises :class:`ReducibleCharacter` on the locus ``tr [A, B] = 2``.
    """
    commutator = trace_reduce("abAB")(alpha, beta, gamma)
    if abs(commutator - 2) <= tol * max(1.0, abs(alpha) ** 2, abs(beta) ** 2, abs(gamma) ** 2):
        raise ReducibleCharacter(f"tr[A,B] = {commutator:.6g}: reducible pair")
    for name, t in (("alpha", alpha), ("beta", beta)):
        if abs(t * t - 4) <= tol:
            warnings.warn(f"{name} = {t} is +-2; the matrix is not diagonalizable", BranchDegeneracyWarning, stacklevel=2)
    x = eigenvalue(alpha)
    y = eigenvalue(beta)
    z = gamma - x * y - 1 / (x * y)
    A = np.array([[x, 1], [0, 1 / x]], dtype=complex)
    B = np.array([[y, 0], [z, 1 / y]], dtype=complex)
    return A, B
