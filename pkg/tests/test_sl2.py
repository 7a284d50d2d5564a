
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idealpoints.sl2 import (
    BranchDegeneracyWarning,
    ReducibleCharacter,
    TracePolynomial,
    Word,
    eigenvalue,
    eval_word,
    make_fundamental_pair,
    mat2,
    reduced_words,
    trace_reduce,
)

word_text = st.text(alphabet="abAB", max_size=10)


def random_pairs(k, seed, dtype=np.clongdouble):
    """``k`` random SL(2,C) pairs with complex normal entries, scaled to
    determinant 1 in ``dtype``.

    Length-8 words reach traces near 1e6, so an absolute 1e-10 comparison
    needs det = 1 and the products to hold well beyond double precision.
    """
    rng = np.random.default_rng(seed)
    m = (rng.normal(size=(2, k, 2, 2)) + 1j * rng.normal(size=(2, k, 2, 2))).astype(dtype)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    m /= np.sqrt(det)[..., None, None]
    return m[0], m[1]


def max_trace_error(A, B, words, relative=False):
    alpha, beta = np.trace(A, axis1=1, axis2=2), np.trace(B, axis1=1, axis2=2)
    gamma = np.trace(A @ B, axis1=1, axis2=2)
    direct = batched_traces(words, A, B)
    worst = 0.0
    for w in words:
        t = direct[w.letters]
        err = np.abs(trace_reduce(w)(alpha, beta, gamma) - t)
        if relative:
            err = err / np.maximum(1, np.abs(t))
        worst = max(worst, float(np.max(err)))
    return worst


def batched_traces(words, A, B):
    """Traces of every word at every pair, built along the prefix tree."""
    inv = lambda m: np.stack([np.stack([m[:, 1, 1], -m[:, 0, 1]], -1), np.stack([-m[:, 1, 0], m[:, 0, 0]], -1)], -2)
    mats = {"a": A, "A": inv(A), "b": B, "B": inv(B)}
    prefix = {"": np.broadcast_to(np.eye(2, dtype=complex), A.shape)}
    out = {}
    for w in words:
        s = w.letters
        if s not in prefix:
            prefix[s] = prefix[s[:-1]] @ mats[s[-1]]
        out[s] = np.trace(prefix[s], axis1=1, axis2=2)
    return out


def test_word_count():
    # 1 + sum_{k=1..8} 4 * 3**(k-1)
    assert sum(1 for _ in reduced_words(8)) == 13121


def test_commutator_reduces_exactly():
    a, b, g = (TracePolynomial.variable(x) for x in "abg")
    assert trace_reduce("abAB") == a * a + b * b + g * g - a * b * g - 2


@pytest.mark.parametrize(
    "word, expected",
    [("", "2*a^0*b^0*g^0"), ("a", "1*a^1*b^0*g^0"), ("ab", "1*a^0*b^0*g^1"), ("aB", "1*a^1*b^1*g^0 + -1*a^0*b^0*g^1"),
     ("aa", "1*a^2*b^0*g^0 + -2*a^0*b^0*g^0")],
)
def test_small_words(word, expected):
    assert str(trace_reduce(word)) == expected


def test_all_reduced_polynomials_are_integral():
    assert all(trace_reduce(w).is_integral() for w in reduced_words(8))


def test_all_words_match_matrix_traces():
    A, B = random_pairs(100, seed=1)
    assert max_trace_error(A, B, list(reduced_words(8))) < 1e-10


def test_all_words_match_in_double_precision_relative():
    A, B = random_pairs(100, seed=1, dtype=complex)
    assert max_trace_error(A, B, list(reduced_words(8)), relative=True) < 1e-10


def test_eval_word_keeps_extended_precision():
    A, B = random_pairs(1, seed=3)
    assert np.asarray(eval_word("abAB", A[0], B[0])).dtype == np.clongdouble


@settings(max_examples=100, deadline=None)
@given(word_text, st.integers(0, 20))
def test_invariant_under_rotation_and_inversion(text, k):
    w = Word(text)
    p = trace_reduce(w)
    s = w.letters
    if s:
        k %= len(s)
        assert trace_reduce(s[k:] + s[:k]) == p
    assert trace_reduce(w.inverse()) == p


@settings(max_examples=60, deadline=None)
@given(word_text)
def test_polynomial_string_round_trip(text):
    p = trace_reduce(text)
    assert TracePolynomial.parse(str(p)) == p


@settings(max_examples=60, deadline=None)
@given(word_text, word_text)
def test_word_algebra(u, v):
    assert (Word(u) * Word(v)) * Word(v).inverse() == Word(u)
    assert Word(u) ** 2 == Word(u) * Word(u)


traces = st.complex_numbers(min_magnitude=0.1, max_magnitude=4, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(traces, traces, traces)
def test_fundamental_pair_inverts_trace_map(alpha, beta, gamma):
    comm = trace_reduce("abAB")(alpha, beta, gamma)
    if abs(comm - 2) < 1e-3 or min(abs(alpha**2 - 4), abs(beta**2 - 4)) < 1e-3:
        return
    A, B = make_fundamental_pair(alpha, beta, gamma)
    assert abs(np.linalg.det(A) - 1) < 1e-10 and abs(np.linalg.det(B) - 1) < 1e-10
    got = (eval_word("a", A, B), eval_word("b", A, B), eval_word("ab", A, B))
    assert max(abs(x - y) for x, y in zip(got, (alpha, beta, gamma))) < 1e-10


def test_fundamental_pair_rejects_reducible():
    # upper triangular pairs share a fixed point, so their character is reducible
    A = np.array([[2, 1], [0, 0.5]])
    B = np.array([[3, 5], [0, 1 / 3]])
    t = (np.trace(A), np.trace(B), np.trace(A @ B))
    with pytest.raises(ReducibleCharacter):
        make_fundamental_pair(*t)


def test_fundamental_pair_warns_at_parabolic_trace():
    with pytest.warns(BranchDegeneracyWarning):
        make_fundamental_pair(2, 1 + 1j, 0.5j)


def test_eigenvalue_branch():
    assert eigenvalue(0) == 1j
    for t in (3, 1 + 2j, -5, 0.3 - 0.1j):
        x = eigenvalue(t)
        assert abs(x + 1 / x - t) < 1e-12


def test_mat2_checks_determinant():
    assert mat2([1, 1, 0, 1]).shape == (2, 2)
    with pytest.raises(ValueError):
        mat2([2, 0, 0, 2])


def test_bad_letter():
    with pytest.raises(ValueError):
        Word("abc")
