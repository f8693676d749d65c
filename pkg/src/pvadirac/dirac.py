"""Dirac modification and reduction of Poisson structures by constraints.

Given constraints theta_1..theta_m with Frechet derivative D, the constraint
matrix is C = D o H o D^*.  When C is invertible the modified structure

    H~ = H - H o D^* o C^{-1} o D o H

has every theta_a central.  For constraints of the form u_{l-m+a} + p_a the
top-left block of H~ then passes to the quotient algebra.
"""

from dataclasses import dataclass, field

from .config import RunConfig
from .diffring import ConstraintContext, DiffPoly, frechet, lift, quotient_project
from .psdo import (
    Degenerate, FractionPair, MatrixOp, PseudoOp, WeaklyNonlocal, adjoint, apply_to_series, compose,
    constant_matrix_inverse, constant_times_d, dinv_sandwich, invert, is_skewadjoint,
    wnl_sandwich,
)
from .pva import CheckReport, PVAStructure, master_bracket
from .series import LambdaSeries, min_depth


class NotInvertible(ArithmeticError):
    """The constraint matrix could not be inverted at the working depth."""


class NotSpecialForm(ValueError):
    """Constraints are not of the form u_{l-m+a} + p_a with p free of eliminated variables."""


class NotCentral(ValueError):
    """Some constraint is not central for the structure."""


class ConstraintSet:
    """Constraint densities theta_1..theta_m on an algebra."""

    def __init__(self, thetas, algebra=None, name=None):
        if not thetas:
            raise ValueError("need at least one constraint")
        self.algebra = algebra or thetas[0].algebra
        self.thetas = [t if isinstance(t, DiffPoly) else self.algebra.const(t) for t in thetas]
        self.name = name
        self._D = None
        self.special = self._detect_special()

    @property
    def m(self):
        return len(self.thetas)

    @property
    def D_theta(self):
        if self._D is None:
            self._D = frechet(self.thetas, self.algebra)
        return self._D

    def _detect_special(self):
        alg = self.algebra
        keep = alg.ell - self.m
        if keep < 0:
            return None
        p = []
        for a, t in enumerate(self.thetas):
            pa = t - alg.gen(keep + a)
            if any(g >= keep for g, _ in pa.jet_variables()):
                return None
            p.append(pa)
        return p

    def context(self):
        if self.special is None:
            raise NotSpecialForm("constraints %s are not u_{l-m+a} + p_a"
                                 % ", ".join(map(str, self.thetas)))
        return ConstraintContext(self.algebra, self.special)

    def __repr__(self):
        return "ConstraintSet(%s)" % ", ".join(map(str, self.thetas))


@dataclass
class DiracResult:
    C: MatrixOp
    C_inv: MatrixOp = None
    H_tilde: MatrixOp = None
    H_tilde_wnl: WeaklyNonlocal = None
    A_D: MatrixOp = None
    A_D_wnl: WeaklyNonlocal = None
    H_D: MatrixOp = None
    H_D_wnl: WeaklyNonlocal = None
    H_C: MatrixOp = None
    depth: int = None
    report: CheckReport = field(default_factory=lambda: CheckReport("dirac"))

    def structure(self, name="H~"):
        """The modified structure as a PVAStructure on the ambient algebra."""
        if self.H_tilde_wnl is not None:
            return PVAStructure(name, wnl=self.H_tilde_wnl, depth=self.depth)
        return PVAStructure(name, self.H_tilde, depth=self.depth)

    def reduced(self, name="H^D"):
        """The reduced structure on the quotient algebra."""
        if self.H_D_wnl is not None:
            return PVAStructure(name, wnl=self.H_D_wnl, depth=self.depth)
        if self.H_D is None:
            raise ValueError("no reduced structure was computed")
        return PVAStructure(name, self.H_D, depth=self.depth)


def _depth(depth):
    return depth if depth is not None else RunConfig.from_env().depth_d


def constraint_matrix(S, theta, depth=None):
    """C = D o H o D^*, exact when H is weakly non-local."""
    K = _depth(depth)
    D = theta.D_theta
    Ds = adjoint(D)
    if S.wnl is not None:
        return wnl_sandwich(D, S.wnl, Ds).to_matrix(K)
    return compose(compose(D, S.H, K + 2), Ds, K + 2).truncate(K)


def constraint_matrix_symbols(S, theta, depth=None):
    """C_{ab}(lambda) computed as the bracket {theta_b lambda theta_a}."""
    K = _depth(depth)
    m = theta.m
    return [[master_bracket(S, theta.thetas[b], theta.thetas[a], K) for b in range(m)]
            for a in range(m)]


def _is_zero_matrix(M):
    return all(e.is_zero() for r in M.rows for e in r)


def _invert_constraint(C, K):
    """(C^{-1}, Kinv) where Kinv is the constant matrix when C = K d."""
    if _is_zero_matrix(C):
        raise NotInvertible("constraint matrix is zero")
    kmat = constant_times_d(C)
    if kmat is not None:
        try:
            kinv = constant_matrix_inverse(kmat)
        except Degenerate as exc:
            raise NotInvertible(str(exc)) from exc
        alg = C.algebra
        Cinv = MatrixOp([[PseudoOp(alg, {-1: alg.const(x)}) for x in row] for row in kinv], alg)
        return Cinv, kinv
    try:
        return invert(C, K), None
    except Degenerate as exc:
        raise NotInvertible(str(exc)) from exc


def dirac_modify(S, theta, depth=None):
    """Dirac modification of S by the constraints; raises NotInvertible."""
    K = _depth(depth)
    D = theta.D_theta
    Ds = adjoint(D)
    C = constraint_matrix(S, theta, K)
    Cinv, kinv = _invert_constraint(C, K)
    res = DiracResult(C=C, C_inv=Cinv, depth=K, report=CheckReport("dirac %s" % S.name))
    if kinv is not None and S.is_local():
        X = compose(S.H, Ds)
        Y = compose(D, S.H)
        res.H_tilde_wnl = WeaklyNonlocal(S.H) - dinv_sandwich(X, kinv, Y)
        res.H_tilde = res.H_tilde_wnl.to_matrix(K)
    else:
        slack = 2 * (S.H.max_order() + D.max_order()) + C.max_order() + 4
        T = K + slack
        X = compose(S.H, Ds, T)
        Y = compose(D, S.H, T)
        Cinv_t = invert(C, T) if kinv is None else Cinv
        res.H_tilde = (S.H - compose(compose(X, Cinv_t, T), Y, T)).truncate(K)
    _post_checks(res, S, D, Ds, K)
    return res


def _post_checks(res, S, D, Ds, K):
    rep = res.report
    if res.H_tilde_wnl is not None:
        left = wnl_sandwich(D, res.H_tilde_wnl, MatrixOp.identity(S.algebra, S.ell)).to_matrix(K)
        right = wnl_sandwich(MatrixOp.identity(S.algebra, S.ell), res.H_tilde_wnl, Ds).to_matrix(K)
    else:
        left = compose(D, res.H_tilde, K).truncate(K - D.max_order())
        right = compose(res.H_tilde, Ds, K).truncate(K - D.max_order())
    rep.add("CENTRAL D o H~", _is_zero_at(left, K), "depth=%d" % min_depth(left.depth, K))
    rep.add("CENTRAL H~ o D*", _is_zero_at(right, K), "depth=%d" % min_depth(right.depth, K))
    if res.H_tilde_wnl is not None:
        W = res.H_tilde_wnl
        ok = W.local.equals(-adjoint(W.local)) and W.equals(-W.adjoint(), K)
    else:
        ok = is_skewadjoint(res.H_tilde, K)
    rep.add("SKEWADJOINT H~", ok, "depth=%d" % K)


def _is_zero_at(M, K):
    lo = -min_depth(M.depth, K)
    return all(k < lo for r in M.rows for e in r for k in e.coeffs)


def dirac_bracket(S, theta, f, g, depth=None):
    """{f_lambda g}^D = {f_lambda g} - sum {theta_b_{lambda+d} g}_-> (C^-1)_ba(lambda+d) {f_lambda theta_a}."""
    K = depth if depth is not None else RunConfig.from_env().depth_lambda
    alg = S.algebra
    m = theta.m
    C = constraint_matrix(S, theta, K + 8)
    Cinv, _ = _invert_constraint(C, K + 8)
    T = K + 6
    base = master_bracket(S, f, g, K)
    right = [master_bracket(S, f, theta.thetas[a], T) for a in range(m)]
    corr = LambdaSeries(alg, {}, None)
    for b in range(m):
        left = master_bracket(S, theta.thetas[b], g, T)
        if left.is_zero() and left.depth is None:
            continue
        Z = LambdaSeries(alg, {}, None)
        for a in range(m):
            if right[a].is_zero() and right[a].depth is None:
                continue
            Z = Z + apply_to_series(Cinv.rows[b][a], right[a], T)
        if Z.is_zero() and Z.depth is None:
            continue
        for n, c in left.coeffs.items():
            corr = corr + Z.shift_apply(n, T).times(c)
    out = base - corr
    return out.truncate(K) if out.depth is not None else out


def _blocks(H, keep):
    ell = H.shape[0]
    top, bot = list(range(keep)), list(range(keep, ell))
    return H.submatrix(top, top), H.submatrix(top, bot), H.submatrix(bot, bot)


def _embedding(alg, Dp):
    """E = (1 ; -D_p) as an l x (l-m) differential matrix."""
    keep = Dp.shape[1]
    ident = MatrixOp.identity(alg, keep)
    return MatrixOp(ident.rows + (-Dp).rows, alg)


def dirac_reduce(S, theta, depth=None, companion=None):
    """Modification plus reduction to the quotient algebra for special constraints."""
    K = _depth(depth)
    ctx = theta.context()
    keep = ctx.keep
    alg = S.algebra
    res = dirac_modify(S, theta, K)
    Dp = frechet(ctx.p, alg).submatrix(list(range(theta.m)), list(range(keep)))
    A, B, _ = _blocks(S.H, keep)
    Z = B + compose(A, adjoint(Dp), K + 4)
    Zs = adjoint(Z)
    if res.H_tilde_wnl is not None and S.is_local():
        kinv = constant_matrix_inverse(constant_times_d(res.C))
        res.A_D_wnl = WeaklyNonlocal(A) + dinv_sandwich(Z, kinv, Zs)
        res.A_D = res.A_D_wnl.to_matrix(K)
        res.H_D_wnl = res.A_D_wnl.transform(lambda c: quotient_project(c, ctx), ctx.quotient)
        res.H_D = res.H_D_wnl.to_matrix(K)
        E = _embedding(alg, Dp)
        back = wnl_sandwich(E, res.A_D_wnl, adjoint(E))
        ok = back.equals(res.H_tilde_wnl, K)
    else:
        slack = 2 * S.H.max_order() + res.C.max_order() + 4
        T = K + slack
        Cinv = invert(res.C, T)
        res.A_D = (A + compose(compose(Z, Cinv, T), Zs, T)).truncate(K)
        res.H_D = quotient_project(res.A_D, ctx)
        E = _embedding(alg, Dp)
        back = compose(compose(E, res.A_D, T), adjoint(E), T)
        ok = back.equals(res.H_tilde, min_depth(K - 2 * Dp.max_order(), back.depth))
    res.report.add("BLOCK (1;-Dp) A^D (1,-Dp*) = H~", ok, "depth=%d" % K)
    if companion is not None:
        res.H_C = central_reduce(companion, theta)
    return res


def _central_defect(S, D, K):
    if S.wnl is not None:
        W = wnl_sandwich(D, S.wnl, MatrixOp.identity(S.algebra, S.ell))
        return W.to_matrix(K)
    return compose(D, S.H, K)


def central_reduce(S, theta, depth=None, samples=None):
    """Top-left block of S projected to the quotient; raises NotCentral."""
    K = _depth(depth)
    ctx = theta.context()
    D = theta.D_theta
    defect = _central_defect(S, D, K)
    if not _is_zero_at(defect, K):
        raise NotCentral("D_theta o %s is not zero" % S.name)
    keep = ctx.keep
    top = list(range(keep))
    if S.wnl is not None:
        W = S.wnl.submatrix(top, top).transform(lambda c: quotient_project(c, ctx), ctx.quotient)
        HC = W.to_matrix(K)
    else:
        HC = quotient_project(S.H.submatrix(top, top), ctx)
    if samples is not None:
        Sc = PVAStructure("%s^C" % S.name, HC)
        for f, g in samples:
            lhs = master_bracket(S, lift(f, S.algebra), lift(g, S.algebra), K)
            lhs = LambdaSeries(ctx.quotient, {k: quotient_project(c, ctx)
                                              for k, c in lhs.coeffs.items()}, lhs.depth)
            rhs = master_bracket(Sc, f, g, K)
            if lhs.first_nonzero(K) is None and rhs.first_nonzero(K) is None:
                continue
            if (lhs - rhs).first_nonzero(K) is not None:
                raise NotCentral("bracket transport fails on (%s, %s)" % (f, g))
    return HC


def reduced_pair_projection(pair, ctx):
    """Project both members of a fraction pair to the quotient algebra."""
    return FractionPair(quotient_project(pair.A, ctx), quotient_project(pair.B, ctx),
                        name=pair.name)


__all__ = [
    "ConstraintSet", "DiracResult", "NotInvertible", "NotSpecialForm", "NotCentral",
    "constraint_matrix", "constraint_matrix_symbols", "dirac_modify", "dirac_bracket",
    "dirac_reduce", "central_reduce", "reduced_pair_projection",
]
