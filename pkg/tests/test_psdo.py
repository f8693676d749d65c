from fractions import Fraction

import pytest

from pvadirac.diffring import Algebra, make_frac
from pvadirac.psdo import (
    Degenerate, FractionPair, MatrixOp, PseudoOp, WeaklyNonlocal, adjoint, compose,
    constant_times_d, dinv_sandwich, invert, is_skewadjoint, verify_fractional, wnl_sandwich,
)

A = Algebra(["u", "v"])
u, v = A.gen(0), A.gen(1)
D = PseudoOp.d(A)
DINV = PseudoOp.d(A, -1)


def mult(x):
    return PseudoOp.mult(x)


def test_d_times_u():
    assert compose(D, mult(u)) == PseudoOp(A, {1: u, 0: A.gen(0, 1)})


def test_dinv_times_u_series():
    K = 6
    got = compose(DINV, mult(u), K)
    want = PseudoOp(A, {-1 - k: A.gen(0, k).scale((-1) ** k) for k in range(K)}, K)
    assert got.equals(want, K)


def test_adjoint_by_hand():
    assert adjoint(PseudoOp(A, {1: u})) == PseudoOp(A, {1: -u, 0: -A.gen(0, 1)})
    assert adjoint(D) == -D
    assert adjoint(PseudoOp(A, {3: A.one()})) == PseudoOp(A, {3: -A.one()})
    assert adjoint(DINV, 5).equals(-DINV, 5)


def test_inverse_round_trip():
    P = PseudoOp(A, {1: u, 0: v})
    Q = invert(P, 8)
    assert compose(P, Q, 8).equals(PseudoOp.one(A), 6)
    assert compose(Q, P, 8).equals(PseudoOp.one(A), 6)


def test_inverse_of_monomial_is_exact():
    Q = invert(PseudoOp(A, {2: A.const(3)}))
    assert Q.is_exact() and Q.coeffs == {-2: A.const(Fraction(1, 3))}
    Q = invert(mult(u))
    assert Q.coeffs == {0: make_frac(A.one(), u)}


def test_matrix_inverse_round_trip():
    M = MatrixOp([[D, mult(u)], [mult(-u), PseudoOp(A, {1: v})]], A)
    Minv = invert(M, 8)
    assert compose(M, Minv, 8).equals(MatrixOp.identity(A, 2), 5)
    assert compose(Minv, M, 8).equals(MatrixOp.identity(A, 2), 5)


def test_zero_is_degenerate():
    with pytest.raises(Degenerate):
        invert(PseudoOp.zero(A))
    with pytest.raises(Degenerate):
        invert(MatrixOp([[D, D], [D, D]], A), 4)


def test_skewadjoint():
    assert is_skewadjoint(MatrixOp([[D, mult(u)], [mult(-u), PseudoOp.zero(A)]], A))
    assert not is_skewadjoint(MatrixOp([[PseudoOp(A, {2: A.one()})]], A))


def test_constant_times_d():
    assert constant_times_d(MatrixOp([[D.scale(6)]], A)) == [[6]]
    assert constant_times_d(MatrixOp([[PseudoOp(A, {1: u})]], A)) is None


def test_fraction_pair_trivial_and_verify():
    H = MatrixOp([[D]], A)
    assert verify_fractional(FractionPair.trivial(H), H, 4).ok
    pair = FractionPair(MatrixOp([[PseudoOp.one(A)]], A), MatrixOp([[D]], A))
    assert verify_fractional(pair, MatrixOp([[DINV]], A), 6).ok
    assert not verify_fractional(pair, MatrixOp([[DINV.scale(2)]], A), 6).ok


def test_dinv_sandwich_matches_truncated_compose():
    X = MatrixOp([[PseudoOp(A, {1: u, 0: v})], [mult(u * v)]], A)
    Y = MatrixOp([[PseudoOp(A, {2: A.one()}), mult(v)]], A)
    W = dinv_sandwich(X, [[Fraction(1, 3)]], Y)
    K = 6
    want = compose(compose(X, MatrixOp([[DINV.scale(Fraction(1, 3))]], A), K + 4), Y, K + 2)
    assert W.to_matrix(K + 2).equals(want, K)
    assert W.local.is_differential()


def test_wnl_sandwich_matches_truncated_compose():
    W = WeaklyNonlocal(MatrixOp([[D]], A), [([u], [u])])
    L = MatrixOp([[PseudoOp(A, {1: A.one(), 0: v})], [mult(u)]], A)
    R = MatrixOp([[mult(v), PseudoOp(A, {1: u})]], A)
    K = 6
    got = wnl_sandwich(L, W, R)
    want = compose(compose(L, W.to_matrix(K + 4), K + 4), R, K + 2)
    assert got.to_matrix(K + 2).equals(want, K)


def test_compressed_merges_terms():
    local = MatrixOp.zeros(A, 2, 2)
    W = WeaklyNonlocal(local, [([u, v], [u, A.zero()]), ([u.scale(2), v.scale(2)], [A.zero(), v]),
                               ([v, v], [u, A.zero()])])
    C = W.compressed()
    assert len(C.terms) == 2
    assert C.equals(W, 6)


def test_wnl_adjoint():
    W = WeaklyNonlocal(MatrixOp([[D]], A), [([u], [v])])
    K = 6
    assert W.adjoint().to_matrix(K).equals(adjoint(W.to_matrix(K + 2), K + 2), K)
