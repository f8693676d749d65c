"""Lambda-bracket engine.

Brackets are evaluated with the Master Formula
    {f_lambda g} = sum dg/du_j^(n) (lambda+d)^n H_ji(lambda+d) (-lambda-d)^m df/du_i^(m),
so that {u_i lambda u_j} = H_ji(lambda).  Two-parameter quantities are expanded in
the domain |mu| > |lambda| > |d| and truncated to a (lambda, mu) window.
"""

from .config import RunConfig
from .diffring import DiffFrac, partial_derivative
from .psdo import (
    PseudoOp, WeaklyNonlocal, adjoint, apply_to_series, invert, is_skewadjoint,
    symbol_shift_apply,
)
from .series import DoubleSeries, LambdaSeries, binom


class UnsupportedStructure(ValueError):
    """The structure is non-local but not in weakly non-local form."""


class PVAStructure:
    """A skewadjoint matrix operator H with optional fraction pair.

    When `wnl` is given, H is local + sum p_a d^{-1} q_a^T and symbols are exact.
    """

    def __init__(self, name, H=None, frac=None, wnl=None, depth=None):
        if H is None and wnl is None:
            raise ValueError("need H or its weakly non-local form")
        if wnl is None and H.is_differential():
            wnl = WeaklyNonlocal(H)
        self.name = name
        self.wnl = wnl
        self.depth = depth if depth is not None else RunConfig.from_env().depth_d
        self.H = H if H is not None else wnl.to_matrix(self.depth)
        self.algebra = self.H.algebra
        self.frac = frac
        self._cache = {}

    @property
    def ell(self):
        return self.H.shape[0]

    def is_local(self):
        return self.wnl is not None and self.wnl.is_local()

    def __add__(self, other):
        name = "%s+%s" % (self.name, other.name)
        if self.wnl is not None and other.wnl is not None:
            return PVAStructure(name, wnl=self.wnl + other.wnl, depth=min(self.depth, other.depth))
        return PVAStructure(name, self.H + other.H, depth=min(self.depth, other.depth))

    def scale(self, c):
        if self.wnl is not None:
            return PVAStructure("%s*%s" % (c, self.name), wnl=self.wnl.scale(c), depth=self.depth)
        return PVAStructure("%s*%s" % (c, self.name), self.H.scale(c), depth=self.depth)

    def symbol_apply(self, j, i, X, target=None):
        """H_ji(lambda + d) applied to X (function or LambdaSeries)."""
        if self.wnl is not None:
            return self.wnl.symbol_apply(j, i, X, target)
        if not isinstance(X, LambdaSeries):
            X = LambdaSeries(self.algebra, {0: X})
        return apply_to_series(self.H.rows[j][i], X, target)

    def __repr__(self):
        return "PVAStructure(%r, %dx%d)" % (self.name, self.ell, self.ell)


def _fit(series, depth):
    if series.depth is None or depth is None:
        return series
    return series.truncate(depth)


def _generator_orders(f, ell):
    if isinstance(f, DiffFrac):
        return [max(f.num.max_order(i), f.den.max_order(i)) for i in range(ell)]
    return [f.max_order(i) for i in range(ell)]


def master_bracket(S, f, g, depth=None):
    """{f_lambda g} for the structure S, truncated at lambda^{-depth} when non-local."""
    alg = S.algebra
    if isinstance(f, (int,)):
        f = alg.const(f)
    if isinstance(g, (int,)):
        g = alg.const(g)
    K = depth if depth is not None else RunConfig.from_env().depth_lambda
    ell = S.ell
    fo = _generator_orders(f, ell)
    go = _generator_orders(g, ell)
    maxn = max(go + [0])
    X = []
    for i in range(ell):
        acc = LambdaSeries(alg, {}, None)
        for m in range(fo[i] + 1):
            dfi = partial_derivative(f, i, m, modified=False)
            if dfi.is_zero():
                continue
            term = LambdaSeries(alg, {0: dfi}).shift_apply(m)
            acc = acc + (term if m % 2 == 0 else -term)
        X.append(acc)
    out = LambdaSeries(alg, {}, None)
    for j in range(ell):
        if go[j] < 0:
            continue
        Y = LambdaSeries(alg, {}, None)
        for i in range(ell):
            if X[i].is_zero():
                continue
            Y = Y + S.symbol_apply(j, i, X[i], K + maxn + 1)
        if Y.is_zero() and Y.depth is None:
            continue
        for n in range(go[j] + 1):
            dg = partial_derivative(g, j, n, modified=False)
            if dg.is_zero():
                continue
            out = out + Y.shift_apply(n).times(dg)
    return _fit(out, K)


# ---------------------------------------------------------------------------
# skewsymmetry


class CheckReport:
    """Ordered list of (label, passed, detail) lines."""

    def __init__(self, title):
        self.title = title
        self.lines = []
        self.notes = []

    def add(self, label, passed, detail=""):
        self.lines.append((label, bool(passed), detail))

    @property
    def passed(self):
        return all(p for _, p, _ in self.lines)

    def failures(self):
        return [l for l in self.lines if not l[1]]

    def __bool__(self):
        return self.passed

    def text(self):
        out = []
        for label, p, detail in self.lines:
            line = "%s: %s" % (label, "PASS" if p else "FAIL")
            if detail:
                line += " " + detail
            out.append(line)
        out.extend(self.notes)
        return "\n".join(out)

    def as_dict(self):
        return {"title": self.title, "passed": self.passed,
                "lines": [{"check": l, "pass": p, "detail": d} for l, p, d in self.lines],
                "notes": list(self.notes)}


def check_skewsymmetry(S, samples=(), depth=None):
    """Structural H = -H* plus {g_lambda f} = -{f_{-lambda-d} g} on sample pairs."""
    K = depth if depth is not None else RunConfig.from_env().depth_lambda
    rep = CheckReport("skewsymmetry %s" % S.name)
    if S.wnl is not None:
        ok = S.wnl.local.equals(-adjoint(S.wnl.local))
        if ok and S.wnl.terms:
            ok = S.wnl.equals(-S.wnl.adjoint(), K)
    else:
        ok = is_skewadjoint(S.H, K)
    rep.add("SKEWADJOINT %s" % S.name, ok, "depth=%d" % K if not S.is_local() else "exact")
    for f, g in samples:
        left = master_bracket(S, g, f, K)
        right = master_bracket(S, f, g, K + 2).neg_shift_substitute(K)
        diff = left + right
        k = diff.first_nonzero(K)
        detail = "depth=%d" % K
        if k is not None:
            detail += " lambda^%d: %s" % (k, diff.coeffs[k])
        rep.add("SKEW (%s, %s)" % (f, g), k is None, detail)
    return rep


# ---------------------------------------------------------------------------
# triple brackets and Jacobi


def triple_bracket(S, a, b, c, depths=None):
    """{a_lambda {b_mu c}} expanded with |mu| > |lambda|, truncated at the window."""
    cfg = RunConfig.from_env()
    Kl, Km = depths if depths is not None else (cfg.depth_lambda, cfg.depth_mu)
    inner = master_bracket(S, b, c, Km)
    out = DoubleSeries(S.algebra, {}, Km if inner.depth is not None else None)
    for s, x in inner.coeffs.items():
        out.add_term(s, master_bracket(S, a, x, Kl + 2))
    return out


def _resolvent(alg, q, K):
    """(x + d)^{-1} q = sum_m x^{-1-m} (-1)^m q^(m) as a series in x."""
    return symbol_shift_apply(PseudoOp.d(alg, -1), q, K)


class _JacobiEngine:
    """Exact-form evaluation of the three Jacobi terms on generator triples."""

    def __init__(self, S, Kl, Km):
        if S.wnl is None:
            raise UnsupportedStructure(
                "Jacobi check needs a local or weakly non-local structure (%s)" % S.name)
        self.S = S
        self.alg = S.algebra
        self.W = S.wnl
        self.Kl, self.Km = Kl, Km
        self.order = max(S.wnl.local.max_order(), 1)
        self.lam_target = Kl + Km + self.order + 3
        self.mu_target = Km + self.order + 3
        self._d = {}
        self._rho = {}
        self._gens = [self.alg.gen(i) for i in range(S.ell)]

    def d(self, i, f, target):
        """{u_i x f} as a series in x."""
        key = (i, f, target)
        if key not in self._d:
            self._d[key] = master_bracket(self.S, self._gens[i], f, target)
        return self._d[key]

    def rho(self, k, f):
        """{f_x u_k} as a series in x."""
        key = (k, f)
        if key not in self._rho:
            self._rho[key] = master_bracket(self.S, f, self._gens[k], self.mu_target)
        return self._rho[key]

    def new(self):
        local = self.S.is_local()
        return DoubleSeries(self.alg, {}, None if local else self.Km)

    def _lam(self, coeffs):
        return LambdaSeries(self.alg, coeffs)

    def term1(self, i, j, k):
        """{u_i lambda H_kj(mu)}."""
        out = self.new()
        Km = self.Km
        for r, ell_r in self.W.local.rows[k][j].coeffs.items():
            out.add_term(r, self.d(i, ell_r, self.lam_target))
        for p, q in self.W.terms:
            pk, qj = p[k], q[j]
            if pk.is_zero() or qj.is_zero():
                continue
            A = self.d(i, pk, self.lam_target)
            for s, e in _resolvent(self.alg, qj, Km).coeffs.items():
                out.add_term(s, A.times(e))
            D = self.d(i, qj, self.lam_target)
            for t in range(Km):
                term = D.shift_apply(t).times(pk)
                out.add_term(-1 - t, term if t % 2 == 0 else -term)
        return out

    def term2(self, i, j, k):
        """{u_j mu H_ki(lambda)}, re-expanded with |mu| > |lambda|."""
        out = self.new()
        Km = self.Km
        for r, ell_r in self.W.local.rows[k][i].coeffs.items():
            for s, e in self.d(j, ell_r, self.mu_target).coeffs.items():
                out.add_term(s, self._lam({r: e}))
        for p, q in self.W.terms:
            pk, qi = p[k], q[i]
            if pk.is_zero() or qi.is_zero():
                continue
            R = _resolvent(self.alg, qi, self.Kl + 2)
            for s, e in self.d(j, pk, self.mu_target).coeffs.items():
                out.add_term(s, R.times(e))
            # (lambda + mu + d)^{-1} = sum_t (-1)^t mu^{-1-t} (lambda + d)^t
            for s, f in self.d(j, qi, self.mu_target).coeffs.items():
                t = 0
                while s - 1 - t >= -Km:
                    term = self._lam({0: f}).shift_apply(t).times(pk)
                    out.add_term(s - 1 - t, term if t % 2 == 0 else -term)
                    t += 1
        return out

    def _nu_power(self, t, scalar_lambda_shift, coeff, out):
        """Add coeff * lambda^shift * (lambda + mu)^t to out."""
        Km = self.Km
        u = 0
        while t - u >= -Km and (t < 0 or u <= t):
            out.add_term(t - u, self._lam({u + scalar_lambda_shift: coeff.scale(binom(t, u))}))
            u += 1

    def term3(self, i, j, k):
        """{H_ji(lambda)_{lambda+mu} u_k}."""
        out = self.new()
        Km = self.Km
        for r, ell_r in self.W.local.rows[j][i].coeffs.items():
            for t, z in self.rho(k, ell_r).coeffs.items():
                self._nu_power(t, r, z, out)
        for p, q in self.W.terms:
            pj, qi = p[j], q[i]
            if pj.is_zero() or qi.is_zero():
                continue
            # {p_{x+d} u_k} applied to (lambda + d)^{-1} q
            Rq = _resolvent(self.alg, qi, self.Kl + 2)
            for t, w in self.rho(k, pj).coeffs.items():
                u = 0
                while t - u >= -Km and (t < 0 or u <= t):
                    if u == 0:
                        piece = Rq
                    else:
                        piece = self._lam({0: qi}).shift_apply(u - 1)
                    out.add_term(t - u, piece.times(w).scale(binom(t, u)))
                    u += 1
            # {((lambda+d)^{-1} q)_{x+d} u_k} applied to p: (-mu-d)^{-1} (lambda+mu+d)^t p
            for t, z in self.rho(k, qi).coeffs.items():
                u = 0
                while t - u - 1 >= -Km and (t < 0 or u <= t):
                    base = self._lam({0: pj}).shift_apply(u)
                    v = 0
                    while t - u - 1 - v >= -Km:
                        sign = -1 if v % 2 == 0 else 1
                        out.add_term(t - u - 1 - v, base.times(z).scale(sign * binom(t, u)))
                        base = base.derivative()
                        v += 1
                    u += 1
        return out

    def jacobi(self, i, j, k):
        return self.term1(i, j, k) - self.term2(i, j, k) - self.term3(i, j, k)


def check_jacobi(S, depths=None, triples=None):
    """Jacobi identity on generator triples, one report line per triple."""
    cfg = RunConfig.from_env()
    Kl, Km = depths if depths is not None else (cfg.depth_lambda, cfg.depth_mu)
    rep = CheckReport("jacobi %s" % S.name)
    eng = _JacobiEngine(S, Kl, Km)
    ell = S.ell
    if triples is None:
        triples = [(i, j, k) for i in range(ell) for j in range(ell) for k in range(ell)]
    for (i, j, k) in triples:
        J = eng.jacobi(i, j, k)
        lam_depth = J.lambda_depth()
        first = J.first_nonzero(Kl, Km)
        detail = "depth=(%d,%d)" % (Kl, Km)
        ok = first is None
        if lam_depth is not None and lam_depth < Kl:
            ok = False
            detail += " insufficient lambda precision %d" % lam_depth
        if first is not None:
            s, kk, c = first
            detail += " mu^%d lambda^%d: %s" % (s, kk, c)
        rep.add("JACOBI (%d,%d,%d)" % (i + 1, j + 1, k + 1), ok, detail)
    if not S.is_local():
        rep.notes.append("admissibility assumed for rational structures")
    return rep


def jacobi_terms(S, i, j, k, depths=None):
    """The three Jacobi terms (for inspection and cross-checks)."""
    cfg = RunConfig.from_env()
    Kl, Km = depths if depths is not None else (cfg.depth_lambda, cfg.depth_mu)
    eng = _JacobiEngine(S, Kl, Km)
    return eng.term1(i, j, k), eng.term2(i, j, k), eng.term3(i, j, k)


def check_compatibility(S0, S1, depths=None):
    """Jacobi for the sum structure, which is the mixed condition on generators."""
    rep = check_jacobi(S0 + S1, depths)
    rep.title = "compatibility %s, %s" % (S0.name, S1.name)
    return rep


# ---------------------------------------------------------------------------
# bracket with entries of an inverse operator


def _series_in_mu_times(lam_series, mu_series, out, scale=1):
    for s, e in mu_series.coeffs.items():
        out.add_term(s, lam_series.times(e).scale(scale))


def verify_inverse_identity(S, C, samples, depths=None):
    """Check {a_lambda (C^-1)_ij(mu)} against the closed formula in terms of C.

    The right side is -sum (C^-1)_ir(lambda+mu+d) {a_lambda c_rt;n} (mu+d)^n (C^-1)_tj(mu),
    where c_rt;n is the coefficient of d^n in C_rt.
    """
    cfg = RunConfig.from_env()
    Kl, Km = depths if depths is not None else (cfg.depth_lambda, cfg.depth_mu)
    m = C.shape[0]
    slack = max(C.max_order(), 1) + 3
    Cinv = invert(C, Km + 2 * slack)
    lam_target = Kl + Km + 2 * slack
    rep = CheckReport("inverse identity %s" % S.name)
    alg = S.algebra
    for a in samples:
        for i in range(m):
            for j in range(m):
                lhs = DoubleSeries(alg, {}, Km)
                for s, gam in Cinv.rows[i][j].coeffs.items():
                    lhs.add_term(s, master_bracket(S, a, gam, lam_target))
                rhs = DoubleSeries(alg, {}, Km)
                for r in range(m):
                    for t in range(m):
                        inner = DoubleSeries(alg, {}, Km + 2 * slack)
                        for n, c in C.rows[r][t].coeffs.items():
                            A = master_bracket(S, a, c, lam_target)
                            if A.is_zero():
                                continue
                            B = Cinv.rows[t][j].symbol().shift_apply(n, Km + 2 * slack)
                            _series_in_mu_times(A, B, inner)
                        if not inner.coeffs:
                            continue
                        for e, kappa in Cinv.rows[i][r].coeffs.items():
                            for s, Y in inner.coeffs.items():
                                u = 0
                                while s + e - u >= -Km and (e < 0 or u <= e):
                                    piece = Y.shift_apply(u).times(kappa).scale(-binom(e, u))
                                    rhs.add_term(s + e - u, piece)
                                    u += 1
                diff = lhs - rhs
                first = diff.first_nonzero(Kl, Km)
                detail = "depth=(%d,%d)" % (Kl, Km)
                if first is not None:
                    detail += " mu^%d lambda^%d: %s" % first
                rep.add("INVERSE a=%s (%d,%d)" % (a, i + 1, j + 1), first is None, detail)
    return rep


__all__ = [
    "PVAStructure", "LambdaSeries", "DoubleSeries", "master_bracket", "check_skewsymmetry",
    "triple_bracket", "check_jacobi", "check_compatibility", "verify_inverse_identity",
    "jacobi_terms", "CheckReport", "UnsupportedStructure",
]
