from fractions import Fraction

import pytest

from pvadirac.diffring import Algebra
from pvadirac.psdo import MatrixOp, PseudoOp, WeaklyNonlocal, wnl_sandwich
from pvadirac.pva import (
    PVAStructure, UnsupportedStructure, check_jacobi, check_skewsymmetry, jacobi_terms,
    master_bracket, triple_bracket, verify_inverse_identity,
)
from pvadirac.series import LambdaSeries

A = Algebra(["u"])
u, u1, u2 = A.gen(0), A.gen(0, 1), A.gen(0, 2)
D = PseudoOp.d(A)


def scalar(*coeffs_by_order):
    return MatrixOp([[PseudoOp(A, dict(coeffs_by_order))]], A)


def wnl(local, *terms):
    return PVAStructure("W", wnl=WeaklyNonlocal(local, [([p], [q]) for p, q in terms]))


VIR = PVAStructure("Vir", scalar((3, A.one()), (1, u.scale(2)), (0, u1)))
ZERO = MatrixOp([[PseudoOp.zero(A)]], A)


def lam(coeffs):
    return LambdaSeries(A, coeffs)


def test_master_bracket_on_generators():
    assert master_bracket(VIR, u, u) == lam({3: A.one(), 1: u.scale(2), 0: u1})


def test_master_bracket_by_hand():
    # {u_lambda u^2} = 2u {u_lambda u} and {u^2_lambda u} = {u_(lambda+d) u} 2u
    got = master_bracket(VIR, u, u * u)
    want = lam({3: u.scale(2), 1: (u * u).scale(4), 0: (u * u1).scale(2)})
    assert got == want
    got = master_bracket(VIR, u * u, u)
    # (lambda+d)^3 (2u) + 2u (lambda+d)(2u) + u' 2u
    want = lam({3: u.scale(2), 2: u1.scale(6), 1: u2.scale(6) + (u * u).scale(4),
                0: A.gen(0, 3).scale(2) + (u * u1).scale(4) + (u * u1).scale(2)})
    assert got == want


def test_skewsymmetry_samples():
    rep = check_skewsymmetry(VIR, samples=[(u, u * u1), (u1 * u1, u * u * u)])
    assert rep.passed, rep.text()
    bad = PVAStructure("bad", scalar((2, A.one())))
    assert not check_skewsymmetry(bad).passed


def test_virasoro_jacobi():
    rep = check_jacobi(VIR, (4, 4))
    assert rep.passed and len(rep.lines) == 1


@pytest.mark.parametrize("make", [
    lambda: wnl(ZERO, (u1, u1)),
    lambda: wnl(ZERO, (u, u)),
    lambda: wnl(scalar((1, A.one())), (u1, u1)),
    lambda: PVAStructure("W", wnl=WeaklyNonlocal(ZERO, [([u1], [u1]), ([u], [u])])),
    lambda: wnl(ZERO, (u * u1, u * u1)),
])
def test_jacobi_holds_for_known_poisson(make):
    rep = check_jacobi(make(), (6, 6))
    assert rep.passed, rep.text()


def test_jacobi_holds_for_third_order_plus_nonlocal():
    # d^3 + d o u d^{-1} u o d, with the sandwich expanded exactly
    Lc = MatrixOp([[PseudoOp(A, {1: A.one()})]], A)
    W = wnl_sandwich(Lc, WeaklyNonlocal(ZERO, [([u], [u])]), Lc)
    S = PVAStructure("KdV-type", wnl=W + WeaklyNonlocal(scalar((3, A.one()))))
    assert check_jacobi(S, (6, 6)).passed


@pytest.mark.parametrize("make, witness", [
    (lambda: PVAStructure("W", scalar((0, u))), "mu^0 lambda^0"),
    (lambda: wnl(ZERO, (u2, u2)), "mu^1 lambda^-1"),
    (lambda: wnl(scalar((1, A.one())), (u, u)), "mu^1 lambda^-1"),
])
def test_jacobi_fails_for_non_poisson(make, witness):
    rep = check_jacobi(make(), (6, 6))
    assert not rep.passed
    assert witness in rep.failures()[0][2]


def test_first_term_equals_triple_bracket():
    B = Algebra(["u", "v"])
    x, y = B.gen(0), B.gen(1)
    H = MatrixOp([[PseudoOp(B, {1: x}), PseudoOp(B, {1: y, 0: B.gen(1, 1)})],
                  [PseudoOp(B, {1: y}), PseudoOp(B, {3: B.one()})]], B)
    S = PVAStructure("S", H)
    compared = 0
    for i, j, k in [(0, 0, 1), (1, 0, 1), (0, 1, 0), (0, 0, 0)]:
        t1, t2, _ = jacobi_terms(S, i, j, k, (4, 4))
        gens = [B.gen(0), B.gen(1)]
        T = triple_bracket(S, gens[i], gens[j], gens[k], (4, 4))
        assert t1.equals(T, 4, 4)
        # domain swap: the second term is the first with (i, j) and (lambda, mu) exchanged
        swapped = triple_bracket(S, gens[j], gens[i], gens[k], (4, 4))
        for s, ser in swapped.coeffs.items():
            for r, c in ser.coeffs.items():
                assert t2.coeffs[r].coeffs[s] == c
        for r, ser in t2.coeffs.items():
            for s, c in ser.coeffs.items():
                assert swapped.coeffs[s].coeffs[r] == c
                compared += 1
    assert compared > 0


def test_triple_bracket_nonlocal_matches_first_term():
    S = wnl(ZERO, (u1, u1))
    t1, _, _ = jacobi_terms(S, 0, 0, 0, (5, 5))
    T = triple_bracket(S, u, u, u, (5, 5))
    assert t1.equals(T, 5, 5)


def test_jacobi_rejects_truncated_structure():
    H = MatrixOp([[PseudoOp(A, {-1: A.one()}, 6)]], A)
    with pytest.raises(UnsupportedStructure):
        check_jacobi(PVAStructure("T", H), (4, 4))


@pytest.mark.parametrize("C", [
    MatrixOp([[PseudoOp(A, {1: A.const(6)})]], A),
    MatrixOp([[PseudoOp(A, {1: u, 0: u1.scale(Fraction(1, 2))})]], A),
    MatrixOp([[PseudoOp(A, {1: A.one(), 0: u})]], A),
])
def test_inverse_identity(C):
    rep = verify_inverse_identity(VIR, C, [u, u * u], (4, 4))
    assert rep.passed, rep.text()
