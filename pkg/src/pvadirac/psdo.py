"""Scalar and matrix pseudodifferential operators with fraction coefficients.

A PseudoOp is sum_k coeffs[k] * d^k (coefficients on the left).  Its depth K
means every coefficient of power >= -K is known; depth None means the operator
is exact (a finite sum).  Compositions track how truncation propagates, so an
operator computed from truncated inputs reports an honest depth.
"""

from fractions import Fraction

from .config import default_depth
from .diffring import DiffFrac, DiffPoly, make_frac, total_derivative
from .series import LambdaSeries, Precision, binom, min_depth


class DimensionMismatch(ValueError):
    pass


class Degenerate(ArithmeticError):
    """No invertible pivot was found at the working depth."""


def _is_elem(x):
    return isinstance(x, (DiffPoly, DiffFrac))


class _DerivCache:
    """Successive total derivatives of one element."""

    def __init__(self, x):
        self.ders = [x]

    def __getitem__(self, j):
        while len(self.ders) <= j:
            self.ders.append(total_derivative(self.ders[-1]))
        return self.ders[j]


class PseudoOp:
    """Truncated Laurent series in d^{-1} with coefficients in the fraction field."""

    __slots__ = ("algebra", "coeffs", "depth")

    def __init__(self, algebra, coeffs=None, depth=None):
        self.algebra = algebra
        self.depth = depth
        lo = None if depth is None else -depth
        self.coeffs = {k: c for k, c in (coeffs or {}).items()
                       if not c.is_zero() and (lo is None or k >= lo)}

    # constructors
    @classmethod
    def mult(cls, x):
        return cls(x.algebra, {0: x})

    @classmethod
    def d(cls, algebra, k=1):
        return cls(algebra, {k: algebra.one()})

    @classmethod
    def zero(cls, algebra):
        return cls(algebra, {})

    @classmethod
    def one(cls, algebra):
        return cls(algebra, {0: algebra.one()})

    # queries
    def order(self):
        return max(self.coeffs) if self.coeffs else None

    def lowest(self):
        return min(self.coeffs) if self.coeffs else None

    def is_zero(self):
        return not self.coeffs

    def is_exact(self):
        return self.depth is None

    def is_differential(self):
        return self.depth is None and all(k >= 0 for k in self.coeffs)

    def __getitem__(self, k):
        return self.coeffs.get(k, self.algebra.zero())

    def truncate(self, depth):
        if depth is None:
            return self
        return PseudoOp(self.algebra, self.coeffs, min_depth(self.depth, depth))

    # linear structure
    def __add__(self, other):
        t = dict(self.coeffs)
        for k, c in other.coeffs.items():
            t[k] = t[k] + c if k in t else c
        return PseudoOp(self.algebra, t, min_depth(self.depth, other.depth))

    def __neg__(self):
        return PseudoOp(self.algebra, {k: -c for k, c in self.coeffs.items()}, self.depth)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PseudoOp(self.algebra, {k: v.scale(c) for k, v in self.coeffs.items()}, self.depth)

    def left_mult(self, x):
        """x o P for a function x."""
        return PseudoOp(self.algebra, {k: x * c for k, c in self.coeffs.items()}, self.depth)

    def apply(self, f):
        """Apply a differential operator to a function."""
        if not self.is_differential():
            raise ValueError("only differential operators may be applied to functions")
        ders = _DerivCache(f)
        out = self.algebra.zero()
        for k, c in self.coeffs.items():
            out = out + c * ders[k]
        return out

    def symbol(self, target=None):
        """The symbol P(lambda) as a LambdaSeries."""
        return LambdaSeries(self.algebra, dict(self.coeffs), self.depth)

    def equals(self, other, depth=None):
        if depth is None:
            depth = min_depth(self.depth, other.depth)
        for s in (self, other):
            if depth is None and s.depth is not None:
                raise Precision("exact comparison of a truncated operator")
            if depth is not None and s.depth is not None and s.depth < depth:
                raise Precision("operator known to depth %d, asked %d" % (s.depth, depth))
        diff = self - other
        return all(depth is not None and k < -depth for k in diff.coeffs)

    def first_difference(self, other, depth=None):
        diff = self - other
        ks = [k for k in diff.coeffs if depth is None or k >= -depth]
        if not ks:
            return None
        k = max(ks)
        return k, diff.coeffs[k]

    def __eq__(self, other):
        if not isinstance(other, PseudoOp):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        return "PseudoOp(%s)" % self

    def __str__(self):
        return format_op(self)


def format_op(P):
    if not P.coeffs:
        body = "0"
    else:
        parts = []
        for k in sorted(P.coeffs, reverse=True):
            c = str(P.coeffs[k])
            if k == 0:
                parts.append("(%s)" % c)
            elif k == 1:
                parts.append("(%s)*d" % c)
            elif k == -1:
                parts.append("(%s)*dinv" % c)
            elif k > 0:
                parts.append("(%s)*d^%d" % (c, k))
            else:
                parts.append("(%s)*dinv^%d" % (c, -k))
        body = " + ".join(parts)
    if P.depth is not None:
        body += " + O(d^%d)" % (-P.depth - 1)
    return body


# ---------------------------------------------------------------------------
# scalar calculus


def _compose_depth(P, Q, target):
    """Depth of P o Q: truncation of either input, and the expansion window."""
    if P.is_zero() and P.depth is None or Q.is_zero() and Q.depth is None:
        return None, False
    infinite = any(k < 0 for k in P.coeffs)
    cands = []
    oq, op = Q.order(), P.order()
    if P.depth is not None:
        cands.append(P.depth - (oq if oq is not None else 0))
    if Q.depth is not None:
        cands.append(Q.depth - (op if op is not None else 0))
    if infinite or cands:
        cands.append(target if target is not None else default_depth())
    return (min(cands) if cands else None), infinite


def compose_scalar(P, Q, target=None):
    depth, _ = _compose_depth(P, Q, target)
    if P.is_zero() or Q.is_zero():
        return PseudoOp(P.algebra, {}, depth)
    lo = None if depth is None else -depth
    t = {}
    caches = {l: _DerivCache(b) for l, b in Q.coeffs.items()}
    for k, a in P.coeffs.items():
        for l in Q.coeffs:
            cache = caches[l]
            j = 0
            while True:
                p = k + l - j
                if k >= 0 and j > k:
                    break
                if lo is not None and p < lo:
                    break
                bj = cache[j]
                if not bj.is_zero():
                    v = (a * bj).scale(binom(k, j))
                    t[p] = t[p] + v if p in t else v
                elif j > 0:
                    break
                j += 1
    return PseudoOp(P.algebra, t, depth)


def adjoint_scalar(P, target=None):
    """(a d^n)* = (-d)^n o a, summed."""
    infinite = any(k < 0 for k in P.coeffs)
    depth = P.depth
    if infinite:
        depth = min_depth(depth, target if target is not None else default_depth())
    lo = None if depth is None else -depth
    t = {}
    for k, a in P.coeffs.items():
        cache = _DerivCache(a)
        sign = -1 if k % 2 else 1
        j = 0
        while True:
            if k >= 0 and j > k:
                break
            p = k - j
            if lo is not None and p < lo:
                break
            aj = cache[j]
            if aj.is_zero() and j > 0:
                break
            v = aj.scale(sign * binom(k, j))
            t[p] = t[p] + v if p in t else v
            j += 1
    return PseudoOp(P.algebra, t, depth)


def symbol_shift_apply(P, f, target=None):
    """P(lambda + d) applied to f, as a LambdaSeries in lambda."""
    if isinstance(f, LambdaSeries):
        return apply_to_series(P, f, target)
    infinite = any(k < 0 for k in P.coeffs)
    depth = P.depth
    if infinite:
        depth = min_depth(depth, target if target is not None else default_depth())
    lo = None if depth is None else -depth
    cache = _DerivCache(f)
    t = {}
    for k, a in P.coeffs.items():
        j = 0
        while True:
            if k >= 0 and j > k:
                break
            p = k - j
            if lo is not None and p < lo:
                break
            fj = cache[j]
            if fj.is_zero():
                break
            v = (a * fj).scale(binom(k, j))
            t[p] = t[p] + v if p in t else v
            j += 1
    return LambdaSeries(P.algebra, t, depth)


def apply_to_series(P, X, target=None):
    """P(lambda + d) applied to a LambdaSeries X (lambda treated as a scalar)."""
    out = LambdaSeries(P.algebra, {}, None)
    for s, x in X.coeffs.items():
        tgt = None if target is None else target + s
        out = out + symbol_shift_apply(P, x, tgt).shift(s)
    if X.depth is not None:
        o = P.order()
        out = out.truncate(X.depth - (o if o is not None else 0))
    if target is not None and out.depth is not None:
        out = out.truncate(target)
    return out


def invert_scalar(P, depth=None):
    """Inverse in the skewfield by leading-coefficient recursion."""
    K = depth if depth is not None else default_depth()
    if P.is_zero():
        raise Degenerate("zero operator is not invertible")
    N = P.order()
    a = P.coeffs[N]
    alg = P.algebra
    ainv = make_frac(alg.one(), a) if isinstance(a, DiffPoly) else make_frac(a.den, a.num)
    if len(P.coeffs) == 1 and P.depth is None and (N == 0 or a.is_quasiconstant()):
        return PseudoOp(alg, {-N: ainv})
    goal = K if P.depth is None else min(K, P.depth + 2 * N)
    resid_depth = goal + N
    Q = PseudoOp(alg, {}, None)
    R = PseudoOp(alg, {0: alg.one()})
    for _ in range(resid_depth + 2):
        ks = [k for k in R.coeffs if k >= -resid_depth]
        if not ks:
            break
        k = max(ks)
        if k > 0:
            raise Degenerate("residual has positive order; leading coefficient mismatch")
        term = PseudoOp(alg, {k - N: ainv * R.coeffs[k]})
        Q = Q + term
        R = R - compose_scalar(P, term, resid_depth)
    else:
        raise Degenerate("inversion recursion did not converge")
    return PseudoOp(alg, Q.coeffs, goal)


# ---------------------------------------------------------------------------
# matrices


class MatrixOp:
    """Rectangular grid of PseudoOp entries over one algebra."""

    def __init__(self, rows, algebra=None):
        self.rows = [list(r) for r in rows]
        if algebra is None:
            algebra = self.rows[0][0].algebra
        self.algebra = algebra
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise DimensionMismatch("ragged matrix")

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @classmethod
    def identity(cls, algebra, n):
        return cls([[PseudoOp.one(algebra) if i == j else PseudoOp.zero(algebra)
                     for j in range(n)] for i in range(n)], algebra)

    @classmethod
    def zeros(cls, algebra, r, c):
        return cls([[PseudoOp.zero(algebra) for _ in range(c)] for _ in range(r)], algebra)

    @classmethod
    def diag_mult(cls, elems):
        alg = elems[0].algebra
        n = len(elems)
        return cls([[PseudoOp.mult(elems[i]) if i == j else PseudoOp.zero(alg)
                     for j in range(n)] for i in range(n)], alg)

    @classmethod
    def column(cls, elems, algebra=None):
        alg = algebra or elems[0].algebra
        return cls([[PseudoOp.mult(e)] for e in elems], alg)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @property
    def depth(self):
        return min_depth(*[e.depth for r in self.rows for e in r])

    def is_differential(self):
        return all(e.is_differential() for r in self.rows for e in r)

    def max_order(self):
        os_ = [e.order() for r in self.rows for e in r if not e.is_zero()]
        return max(os_) if os_ else 0

    def map(self, fn):
        return MatrixOp([[fn(e) for e in r] for r in self.rows], self.algebra)

    def truncate(self, depth):
        return self.map(lambda e: e.truncate(depth))

    def transpose(self):
        r, c = self.shape
        return MatrixOp([[self.rows[i][j] for i in range(r)] for j in range(c)], self.algebra)

    def submatrix(self, rows, cols):
        return MatrixOp([[self.rows[i][j] for j in cols] for i in rows], self.algebra)

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch("%s vs %s" % (self.shape, other.shape))
        return MatrixOp([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
                        self.algebra)

    def __neg__(self):
        return self.map(lambda e: -e)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self.map(lambda e: e.scale(c))

    def apply(self, vec):
        """Apply a differential matrix to a vector of functions."""
        r, c = self.shape
        if len(vec) != c:
            raise DimensionMismatch("vector length %d, matrix has %d columns" % (len(vec), c))
        out = []
        for i in range(r):
            acc = self.algebra.zero()
            for j in range(c):
                e = self.rows[i][j]
                if not e.is_zero():
                    acc = acc + e.apply(vec[j])
            out.append(acc)
        return out

    def equals(self, other, depth=None):
        if self.shape != other.shape:
            return False
        return all(a.equals(b, depth) for r1, r2 in zip(self.rows, other.rows)
                   for a, b in zip(r1, r2))

    def first_difference(self, other, depth=None):
        for i, (r1, r2) in enumerate(zip(self.rows, other.rows)):
            for j, (a, b) in enumerate(zip(r1, r2)):
                d = a.first_difference(b, depth)
                if d is not None:
                    return (i, j) + d
        return None

    def __eq__(self, other):
        if not isinstance(other, MatrixOp):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __str__(self):
        r, c = self.shape
        lines = []
        for i in range(r):
            for j in range(c):
                e = self.rows[i][j]
                if not e.is_zero():
                    lines.append("[%d][%d] = %s" % (i + 1, j + 1, e))
        return "\n".join(lines) if lines else "0"


def compose(P, Q, target=None):
    if isinstance(P, PseudoOp) and isinstance(Q, PseudoOp):
        return compose_scalar(P, Q, target)
    if isinstance(P, PseudoOp) or isinstance(Q, PseudoOp):
        raise DimensionMismatch("cannot compose scalar with matrix operator")
    (r, k1), (k2, c) = P.shape, Q.shape
    if k1 != k2:
        raise DimensionMismatch("%s o %s" % (P.shape, Q.shape))
    rows = []
    for i in range(r):
        row = []
        for j in range(c):
            acc = None
            for k in range(k1):
                a, b = P.rows[i][k], Q.rows[k][j]
                if a.is_zero() and a.depth is None or b.is_zero() and b.depth is None:
                    continue
                term = compose_scalar(a, b, target)
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else PseudoOp.zero(P.algebra))
        rows.append(row)
    return MatrixOp(rows, P.algebra)


def adjoint(P, target=None):
    if isinstance(P, PseudoOp):
        return adjoint_scalar(P, target)
    r, c = P.shape
    return MatrixOp([[adjoint_scalar(P.rows[i][j], target) for i in range(r)] for j in range(c)],
                    P.algebra)


def _invert_matrix_at(M, target):
    n, c = M.shape
    alg = M.algebra
    left = [list(r) for r in M.rows]
    right = [list(r) for r in MatrixOp.identity(alg, n).rows]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not left[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise Degenerate("no invertible pivot in column %d at depth %d" % (col + 1, target))
        left[col], left[piv] = left[piv], left[col]
        right[col], right[piv] = right[piv], right[col]
        inv = invert_scalar(left[col][col], target)
        left[col] = [compose_scalar(inv, e, target) for e in left[col]]
        right[col] = [compose_scalar(inv, e, target) for e in right[col]]
        for r in range(n):
            if r == col or left[r][col].is_zero():
                continue
            f = left[r][col]
            left[r] = [a - compose_scalar(f, b, target) for a, b in zip(left[r], left[col])]
            right[r] = [a - compose_scalar(f, b, target) for a, b in zip(right[r], right[col])]
    return MatrixOp(right, alg)


def invert(M, depth=None):
    """Two-sided inverse up to the requested depth; raises Degenerate."""
    K = depth if depth is not None else default_depth()
    if isinstance(M, PseudoOp):
        return invert_scalar(M, K)
    n, c = M.shape
    if n != c:
        raise DimensionMismatch("only square matrices can be inverted")
    if n == 1:
        return MatrixOp([[invert_scalar(M.rows[0][0], K)]], M.algebra)
    slack = 2 * max(M.max_order(), 1) * n + 2
    for attempt in range(4):
        target = K + slack * (attempt + 1)
        out = _invert_matrix_at(M, target)
        d = out.depth
        if d is None or d >= K:
            return out.truncate(K)
    raise Degenerate("inverse could not be resolved to depth %d" % K)


class FractionPair:
    """Fractional decomposition A o B^{-1} with A, B matrix differential operators."""

    def __init__(self, A, B, name=None):
        if not (A.is_differential() and B.is_differential()):
            raise ValueError("fraction pair entries must be differential operators")
        if B.shape[0] != B.shape[1] or A.shape[1] != B.shape[0]:
            raise DimensionMismatch("fraction pair shapes %s, %s" % (A.shape, B.shape))
        self.A = A
        self.B = B
        self.name = name

    @classmethod
    def trivial(cls, H):
        return cls(H, MatrixOp.identity(H.algebra, H.shape[1]))

    def operator(self, depth=None):
        K = depth if depth is not None else default_depth()
        binv = invert(self.B, K + max(self.A.max_order(), 0) + 2)
        return compose(self.A, binv, K + self.A.max_order() + 2).truncate(K)


class FractionReport:
    def __init__(self, ok, depth, difference=None):
        self.ok = ok
        self.depth = depth
        self.difference = difference

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "FRACTION PASS depth=%d" % self.depth
        i, j, k, c = self.difference
        return "FRACTION FAIL depth=%d entry (%d,%d) d^%d: %s" % (self.depth, i + 1, j + 1, k, c)


def verify_fractional(pair, M, depth=None):
    """Does A o B^{-1} agree with M entrywise down to d^{-depth}?"""
    K = depth if depth is not None else default_depth()
    L = pair.operator(K)
    if M.depth is not None and M.depth < K:
        raise Precision("target operator known only to depth %d" % M.depth)
    diff = L.first_difference(M, K)
    return FractionReport(diff is None, K, diff)


def is_skewadjoint(H, depth=None):
    K = depth if depth is not None else default_depth()
    if H.is_differential():
        return H.equals(-adjoint(H))
    A = adjoint(H, K)
    return H.truncate(K).equals(-A, min_depth(K, H.depth, A.depth))


def right_divide_by_d(G):
    """Write a differential matrix G as Q o d + g with g a function matrix."""
    alg = G.algebra
    Q = G.map(lambda e: PseudoOp(alg, {k - 1: c for k, c in e.coeffs.items() if k >= 1}))
    g = G.map(lambda e: PseudoOp(alg, {0: e[0]}))
    return Q, g



# ---------------------------------------------------------------------------
# weakly non-local matrices


class WeaklyNonlocal:
    """local + sum_a p_a d^{-1} q_a^T with local a differential matrix.

    Entry (r, c) is local[r][c] + sum_a p_a[r] o d^{-1} o q_a[c].  This form is
    closed under the operations used for constraint reduction with C = K d and
    it allows exact symbols, which the Jacobi checks rely on.
    """

    def __init__(self, local, terms=()):
        if not local.is_differential():
            raise ValueError("local part must be a differential matrix")
        r, c = local.shape
        self.local = local
        self.algebra = local.algebra
        self.terms = []
        for p, q in terms:
            p = list(p)
            q = list(q)
            if len(p) != r or len(q) != c:
                raise DimensionMismatch("non-local term does not fit %s" % (local.shape,))
            if all(x.is_zero() for x in p) or all(x.is_zero() for x in q):
                continue
            self.terms.append((p, q))

    @property
    def shape(self):
        return self.local.shape

    def is_local(self):
        return not self.terms

    def to_matrix(self, depth=None):
        K = depth if depth is not None else default_depth()
        if not self.terms:
            return self.local
        alg = self.algebra
        dinv = PseudoOp.d(alg, -1)
        rows = [list(r) for r in self.local.rows]
        for p, q in self.terms:
            for a, pa in enumerate(p):
                if pa.is_zero():
                    continue
                left = PseudoOp.mult(pa)
                for b, qb in enumerate(q):
                    if qb.is_zero():
                        continue
                    op = compose_scalar(left, compose_scalar(dinv, PseudoOp.mult(qb), K), K)
                    rows[a][b] = rows[a][b] + op
        return MatrixOp(rows, alg)

    def __add__(self, other):
        return WeaklyNonlocal(self.local + other.local, self.terms + other.terms)

    def __neg__(self):
        return WeaklyNonlocal(-self.local, [([-x for x in p], q) for p, q in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return WeaklyNonlocal(self.local.scale(c), [([x.scale(c) for x in p], q)
                                                    for p, q in self.terms])

    def adjoint(self):
        return WeaklyNonlocal(adjoint(self.local), [(q, [-x for x in p]) for p, q in self.terms])

    def transform(self, fn, algebra=None):
        """Apply an element map (e.g. quotient projection) to every coefficient."""
        alg = algebra or self.algebra
        local = MatrixOp([[PseudoOp(alg, {k: fn(c) for k, c in e.coeffs.items()}) for e in r]
                          for r in self.local.rows], alg)
        terms = [([fn(x) for x in p], [fn(x) for x in q]) for p, q in self.terms]
        return WeaklyNonlocal(local, terms)

    def compressed(self):
        """Merge rank-one terms sharing q (exactly) and then p (up to a rational factor)."""
        byq = []
        for p, q in self.terms:
            for item in byq:
                if item[1] == q:
                    item[0] = [a + b for a, b in zip(item[0], p)]
                    break
            else:
                byq.append([list(p), list(q)])
        out = []
        for p, q in byq:
            if all(x.is_zero() for x in p):
                continue
            for item in out:
                c = _ratio(p, item[0])
                if c is not None:
                    item[1] = [a + b.scale(c) for a, b in zip(item[1], q)]
                    break
            else:
                out.append([p, q])
        return WeaklyNonlocal(self.local, [(p, q) for p, q in out])

    def submatrix(self, rows, cols):
        return WeaklyNonlocal(self.local.submatrix(rows, cols),
                              [([p[i] for i in rows], [q[j] for j in cols]) for p, q in self.terms])

    def symbol_apply(self, r, c, X, target=None):
        """Entry (r, c) evaluated at lambda + d on a LambdaSeries or function X."""
        if not isinstance(X, LambdaSeries):
            X = LambdaSeries(self.algebra, {0: X})
        out = apply_to_series(self.local.rows[r][c], X, target)
        if self.terms:
            dinv = PseudoOp.d(self.algebra, -1)
            for p, q in self.terms:
                if p[r].is_zero() or q[c].is_zero():
                    continue
                out = out + apply_to_series(dinv, X.times(q[c]), target).times(p[r])
        return out

    def equals(self, other, depth=None):
        K = depth if depth is not None else default_depth()
        if not self.terms and not other.terms:
            return self.local.equals(other.local)
        return self.to_matrix(K + 1).equals(other.to_matrix(K + 1), K)

    def __str__(self):
        out = [str(self.local)]
        for p, q in self.terms:
            out.append("+ [%s] dinv [%s]" % (", ".join(map(str, p)), ", ".join(map(str, q))))
        return "\n".join(out)


def _ratio(p, base):
    """Rational c with p = c * base, or None."""
    c = None
    for a, b in zip(p, base):
        if b.is_zero():
            if not a.is_zero():
                return None
            continue
        if c is None:
            lm, lc = b.leading()
            c = a.terms.get(lm, 0) / lc if hasattr(a, "terms") else None
            if not c:
                return None
        if a != b.scale(c):
            return None
    return c


def constant_matrix_inverse(K):
    """Inverse of a square matrix of rationals (lists), or Degenerate."""
    n = len(K)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(K)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise Degenerate("constant matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def constant_times_d(C):
    """If C = K o d with K a constant rational matrix, return K; else None."""
    if not C.is_differential():
        return None
    K = []
    for row in C.rows:
        krow = []
        for e in row:
            if e.is_zero():
                krow.append(Fraction(0))
                continue
            if set(e.coeffs) != {1} or not e.coeffs[1].is_constant():
                return None
            krow.append(e.coeffs[1].constant_value())
        K.append(krow)
    return K


def dinv_sandwich(X, Kinv, Y):
    """X o d^{-1} o Kinv o Y as a WeaklyNonlocal, for differential X, Y and constant Kinv."""
    alg = X.algebra
    Km = MatrixOp([[PseudoOp(alg, {0: alg.const(x)}) for x in row] for row in Kinv], alg)
    Y2 = compose(Km, Y)
    Q, g = right_divide_by_d(X)
    Qs, gs = right_divide_by_d(adjoint(Y2))
    S = -adjoint(Qs)
    y = gs.transpose()
    local = compose(Q, Y2) + compose(g, S)
    m = X.shape[1]
    terms = []
    for a in range(m):
        p = [g.rows[r][a][0] for r in range(X.shape[0])]
        q = [y.rows[a][c][0] for c in range(Y.shape[1])]
        terms.append((p, q))
    return WeaklyNonlocal(local, terms)


def wnl_sandwich(L, W, R):
    """L o W o R for differential matrices L, R and a WeaklyNonlocal W."""
    alg = W.algebra
    out = WeaklyNonlocal(compose(compose(L, W.local), R))
    for p, q in W.terms:
        X = compose(L, MatrixOp.column(p, alg))
        Y = compose(MatrixOp([[PseudoOp.mult(x) for x in q]], alg), R)
        out = out + dinv_sandwich(X, [[Fraction(1)]], Y)
    return out


__all__ = [
    "PseudoOp", "MatrixOp", "FractionPair", "FractionReport", "compose", "adjoint",
    "symbol_shift_apply", "apply_to_series", "invert", "invert_scalar", "verify_fractional",
    "is_skewadjoint", "right_divide_by_d", "WeaklyNonlocal", "dinv_sandwich",
    "constant_times_d", "constant_matrix_inverse", "wnl_sandwich", "Degenerate", "DimensionMismatch",
]
