"""Property tests over random differential polynomials and operators."""

from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from pvadirac.diffring import (
    Algebra, densities_equal_mod_d, homotopy_reconstruct, total_derivative,
    variational_derivative,
)
from pvadirac.psdo import (
    MatrixOp, PseudoOp, WeaklyNonlocal, adjoint, compose, invert,
)
from pvadirac.pva import PVAStructure, check_skewsymmetry, master_bracket, verify_inverse_identity
from pvadirac.series import LambdaSeries
from strategies import diff_ops, nonconstant_polys, polys

A = Algebra(["u"])
B = Algebra(["u", "v"])
u = A.gen(0)

small = dict(max_terms=2, max_order=1, max_degree=2)


def skew_structure(K):
    """H = K - K^* is skewadjoint for any differential K."""
    return PVAStructure("H", MatrixOp([[K - adjoint(K)]], A))


@given(diff_ops(A), polys(A), polys(A))
def test_sesquilinearity(K, f, g):
    S = skew_structure(K)
    base = master_bracket(S, f, g)
    left = master_bracket(S, total_derivative(f), g)
    assert left == LambdaSeries(A, {k + 1: -c for k, c in base.coeffs.items()})
    right = master_bracket(S, f, total_derivative(g))
    want = LambdaSeries(A, {k + 1: c for k, c in base.coeffs.items()}) + \
        LambdaSeries(A, {k: total_derivative(c) for k, c in base.coeffs.items()})
    assert right == want


@given(diff_ops(A), polys(A, **small), polys(A, **small), polys(A, **small))
def test_left_leibniz(K, f, g, h):
    S = skew_structure(K)
    lhs = master_bracket(S, f, g * h)
    rhs = master_bracket(S, f, g).times(h) + master_bracket(S, f, h).times(g)
    assert lhs == rhs


@given(diff_ops(A), polys(A), polys(A))
def test_skewsymmetry(K, f, g):
    rep = check_skewsymmetry(skew_structure(K), samples=[(f, g)], depth=4)
    assert rep.passed, rep.text()


@given(diff_ops(A), polys(A, **small), polys(A, **small))
def test_skewsymmetry_nonlocal(K, f, g):
    W = WeaklyNonlocal(MatrixOp([[K - adjoint(K)]], A), [([u], [A.gen(0, 1)]),
                                                        ([A.gen(0, 1)], [u])])
    rep = check_skewsymmetry(PVAStructure("W", wnl=W), samples=[(f, g)], depth=4)
    assert rep.passed, rep.text()


@given(diff_ops(B), diff_ops(B), diff_ops(B))
def test_composition_associative(P, Q, R):
    assert compose(compose(P, Q), R) == compose(P, compose(Q, R))


@given(diff_ops(A), polys(A, **small))
def test_composition_associative_with_dinv(P, a):
    Q = compose(PseudoOp.d(A, -1), PseudoOp.mult(a), 8)
    R = PseudoOp.mult(a + A.one())
    lhs = compose(compose(P, Q, 10), R, 10)
    rhs = compose(P, compose(Q, R, 10), 10)
    assert lhs.equals(rhs, 5)


@given(diff_ops(B))
def test_adjoint_involution(P):
    assert adjoint(adjoint(P)) == P


@given(diff_ops(B), diff_ops(B))
def test_adjoint_antihomomorphism(P, Q):
    assert adjoint(compose(P, Q)) == compose(adjoint(Q), adjoint(P))


@given(st.integers(1, 4).map(Fraction), polys(A, **small), st.integers(1, 2))
def test_inversion(c, a, n):
    P = PseudoOp(A, {n: A.const(c), 0: a})
    Q = invert(P, 8)
    one = PseudoOp.one(A)
    assert compose(P, Q, 8).equals(one, 5)
    assert compose(Q, P, 8).equals(one, 5)


@given(polys(B))
def test_homotopy_inverts_variational(f):
    assert densities_equal_mod_d(homotopy_reconstruct(variational_derivative(f)), f)


@given(nonconstant_polys(B))
def test_total_derivative_in_kernel(f):
    assert variational_derivative(total_derivative(f)) == [B.zero(), B.zero()]


VIR = PVAStructure("Vir", MatrixOp([[PseudoOp(A, {3: A.one(), 1: u.scale(2),
                                                  0: A.gen(0, 1)})]], A))
SIX_D = MatrixOp([[PseudoOp(A, {1: A.const(6)})]], A)
VARIABLE = MatrixOp([[PseudoOp(A, {1: A.one(), 0: u})]], A)

tiny = dict(max_terms=2, max_order=1, max_degree=2)


@given(nonconstant_polys(A, **tiny))
def test_inverse_identity_constant(a):
    # C has constant coefficients, so both sides must vanish identically
    rep = verify_inverse_identity(VIR, SIX_D, [a], (3, 3))
    assert rep.passed, rep.text()


@given(nonconstant_polys(A, **tiny))
def test_inverse_identity_variable(a):
    rep = verify_inverse_identity(VIR, VARIABLE, [a], (3, 3))
    assert rep.passed, rep.text()


@given(diff_ops(A), polys(A, **small), polys(A, **small), st.integers(2, 5))
def test_depth_monotone(K, f, g, depth):
    W = WeaklyNonlocal(MatrixOp([[K - adjoint(K)]], A), [([A.gen(0, 1)], [A.gen(0, 1)])])
    S = PVAStructure("W", wnl=W)
    coarse = master_bracket(S, f, g, depth)
    fine = master_bracket(S, f, g, depth + 2)
    assert fine.truncate(depth).equals(coarse, depth)
