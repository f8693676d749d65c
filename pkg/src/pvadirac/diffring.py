"""Exact differential algebra of jet polynomials and their fractions.

A jet variable u_i^(n) is stored as the pair (i, n) with i >= 0.  Quasiconstant
symbol number q is stored as (-1 - q, 0); quasiconstants are killed by every
partial derivative and by the total derivative.  A monomial is a tuple of
((var), exponent) pairs sorted by variable rank, and a DiffPoly is a sparse map
from monomials to Fraction coefficients.
"""

from fractions import Fraction
from functools import lru_cache

ONE_MONO = ()


class HelmholtzViolation(ValueError):
    """The vector is not the variational derivative of any density."""


class NonPolynomialInput(ValueError):
    """A polynomial was required but a fraction was supplied."""


class NotExact(ValueError):
    """The element is not a total derivative."""


class DenominatorVanishes(ZeroDivisionError):
    """A denominator became zero under quotient projection."""


# ---------------------------------------------------------------------------
# monomials


def var_rank(v):
    g, n = v
    if g >= 0:
        return g * 100000 + n
    return 10 ** 9 + (-1 - g)


def is_jet(v):
    return v[0] >= 0


@lru_cache(maxsize=None)
def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda t: var_rank(t[0])))


def mono_from_dict(d):
    return tuple(sorted(((v, e) for v, e in d.items() if e), key=lambda t: var_rank(t[0])))


def mono_degree(m):
    """Degree counted in jet variables only."""
    return sum(e for v, e in m if v[0] >= 0)


def mono_key(m):
    """Graded lexicographic sort key; larger key means larger monomial."""
    return (sum(e for _, e in m), tuple((-var_rank(v), e) for v, e in m))


def mono_divides(a, b):
    """True if monomial a divides monomial b."""
    db = dict(b)
    return all(db.get(v, 0) >= e for v, e in a)


def mono_div(b, a):
    d = dict(b)
    for v, e in a:
        d[v] -= e
    return mono_from_dict(d)


def mono_gcd(a, b):
    db = dict(b)
    return mono_from_dict({v: min(e, db[v]) for v, e in a if v in db})


def mono_lcm(a, b):
    d = dict(a)
    for v, e in b:
        d[v] = max(d.get(v, 0), e)
    return mono_from_dict(d)


@lru_cache(maxsize=None)
def mono_derivative(m):
    """Total derivative of a monomial as a tuple of (monomial, int) pairs."""
    out = {}
    for idx, (v, e) in enumerate(m):
        if v[0] < 0:
            continue
        d = dict(m)
        d[v] = e - 1
        w = (v[0], v[1] + 1)
        d[w] = d.get(w, 0) + 1
        key = mono_from_dict(d)
        out[key] = out.get(key, 0) + e
    return tuple(out.items())


@lru_cache(maxsize=None)
def mono_partial(m, v):
    """Partial derivative of a monomial in variable v as (coeff, monomial)."""
    for w, e in m:
        if w == v:
            d = dict(m)
            d[v] = e - 1
            return e, mono_from_dict(d)
    return 0, None


# ---------------------------------------------------------------------------
# algebra descriptor


class Algebra:
    """Generator names and quasiconstant symbols of a differential algebra."""

    def __init__(self, names, quasiconstants=(), constraints=None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        self.names = names
        self.quasiconstants = tuple(quasiconstants)
        self.constraints = constraints

    @property
    def ell(self):
        return len(self.names)

    def key(self):
        return (self.names, self.quasiconstants)

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "Algebra(%r, %r)" % (list(self.names), list(self.quasiconstants))

    def index(self, name):
        return self.names.index(name)

    def gen(self, i, n=0):
        """The jet variable u_i^(n); i may be an index or a generator name."""
        if isinstance(i, str):
            i = self.index(i)
        if not 0 <= i < self.ell:
            raise IndexError("generator index %d out of range" % i)
        if n < 0:
            raise ValueError("derivative order must be >= 0")
        return DiffPoly(self, {(((i, n), 1),): Fraction(1)})

    def quasi(self, name):
        q = self.quasiconstants.index(name) if isinstance(name, str) else name
        return DiffPoly(self, {(((-1 - q, 0), 1),): Fraction(1)})

    def const(self, c):
        c = Fraction(c)
        return DiffPoly(self, {ONE_MONO: c} if c else {})

    def zero(self):
        return DiffPoly(self, {})

    def one(self):
        return self.const(1)

    def var_name(self, v):
        g, n = v
        if g < 0:
            return self.quasiconstants[-1 - g]
        base = self.names[g]
        if n <= 3:
            return base + "'" * n
        return "%s^(%d)" % (base, n)

    def with_constraints(self, ctx):
        return Algebra(self.names, self.quasiconstants, ctx)


def _coerce(alg, x):
    if isinstance(x, (DiffPoly, DiffFrac)):
        return x
    if isinstance(x, (int, Fraction)):
        return alg.const(x)
    return NotImplemented


# ---------------------------------------------------------------------------
# polynomials


class DiffPoly:
    """Sparse polynomial in jet variables and quasiconstants, exact rational."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra, terms=None):
        self.algebra = algebra
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    # basic queries
    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def constant_value(self):
        return self.terms.get(ONE_MONO, Fraction(0))

    def is_quasiconstant(self):
        return all(v[0] < 0 for m in self.terms for v, _ in m)

    def is_polynomial(self):
        return True

    @property
    def num(self):
        return self

    @property
    def den(self):
        return self.algebra.one()

    def variables(self):
        return {v for m in self.terms for v, _ in m}

    def jet_variables(self):
        return {v for v in self.variables() if v[0] >= 0}

    def max_order(self, i=None):
        orders = [n for g, n in self.jet_variables() if i is None or g == i]
        return max(orders) if orders else -1

    def degree(self):
        return max((mono_degree(m) for m in self.terms), default=0)

    def leading(self):
        """Leading (monomial, coefficient) in graded lexicographic order."""
        m = max(self.terms, key=mono_key)
        return m, self.terms[m]

    def homogeneous_parts(self):
        parts = {}
        for m, c in self.terms.items():
            parts.setdefault(mono_degree(m), {})[m] = c
        return {d: DiffPoly(self.algebra, t) for d, t in parts.items()}

    def content_monomial(self):
        it = iter(self.terms)
        g = next(it)
        for m in it:
            g = mono_gcd(g, m)
            if not g:
                break
        return g

    # arithmetic
    def __add__(self, other):
        other = _coerce(self.algebra, other)
        if other is NotImplemented or isinstance(other, DiffFrac):
            return NotImplemented
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return DiffPoly(self.algebra, t)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = _coerce(self.algebra, other)
        if other is NotImplemented or isinstance(other, DiffFrac):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return DiffPoly(self.algebra, {})
        return DiffPoly(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, DiffFrac):
            return NotImplemented
        if not isinstance(other, DiffPoly):
            return NotImplemented
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return DiffPoly(self.algebra, t)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return make_frac(self.algebra.one(), self ** (-k))
        out = self.algebra.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return make_frac(self, other)

    def __rtruediv__(self, other):
        return make_frac(_coerce(self.algebra, other), self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.const(other)
        if isinstance(other, DiffFrac):
            return other == self
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return "DiffPoly(%s)" % self

    def __str__(self):
        return format_poly(self)


def format_poly(p):
    if not p.terms:
        return "0"
    alg = p.algebra
    parts = []
    for m in sorted(p.terms, key=mono_key, reverse=True):
        c = p.terms[m]
        factors = []
        for v, e in m:
            name = alg.var_name(v)
            factors.append(name if e == 1 else "%s^%d" % (name, e))
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not factors:
            body = str(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = str(a) + "*" + "*".join(factors)
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += " %s %s" % (sign, body)
    return out


def exact_divide(f, g):
    """Return q with f = q*g, or None when g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if f.is_zero():
        return f.algebra.zero()
    lm, lc = g.leading()
    rem = dict(f.terms)
    q = {}
    steps = 0
    while rem:
        steps += 1
        if steps > 5000:
            return None
        m = max(rem, key=mono_key)
        if not mono_divides(lm, m):
            return None
        c = rem[m] / lc
        qm = mono_div(m, lm)
        q[qm] = q.get(qm, 0) + c
        for gm, gc in g.terms.items():
            k = mono_mul(qm, gm)
            val = rem.get(k, 0) - c * gc
            if val:
                rem[k] = val
            else:
                rem.pop(k, None)
    return DiffPoly(f.algebra, q)


# ---------------------------------------------------------------------------
# fractions


def make_frac(num, den):
    """Normalized num/den; returns a DiffPoly when the denominator is constant."""
    if isinstance(num, DiffFrac) or isinstance(den, DiffFrac):
        a = num if isinstance(num, DiffFrac) else DiffFrac._raw(num, num.algebra.one())
        b = den if isinstance(den, DiffFrac) else DiffFrac._raw(den, den.algebra.one())
        return make_frac(a.num * b.den, a.den * b.num)
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return num.algebra.zero()
    if den.is_constant():
        return num.scale(1 / den.constant_value())
    g = mono_gcd(num.content_monomial(), den.content_monomial())
    if g:
        num = DiffPoly(num.algebra, {mono_div(m, g): c for m, c in num.terms.items()})
        den = DiffPoly(den.algebra, {mono_div(m, g): c for m, c in den.terms.items()})
    if den.is_constant():
        return num.scale(1 / den.constant_value())
    if len(den.terms) > 1:
        q = exact_divide(num, den)
        if q is not None:
            return q
    _, lc = den.leading()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return DiffFrac._raw(num, den)


class DiffFrac:
    """Quotient num/den of jet polynomials; den is monic in grlex order."""

    __slots__ = ("num", "den", "algebra")

    @classmethod
    def _raw(cls, num, den):
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        obj.algebra = num.algebra
        return obj

    def __init__(self, num, den):
        r = make_frac(num, den)
        if isinstance(r, DiffPoly):
            r = DiffFrac._raw(r, r.algebra.one())
        self.num, self.den, self.algebra = r.num, r.den, r.algebra

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_constant()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def is_quasiconstant(self):
        return self.num.is_quasiconstant() and self.den.is_quasiconstant()

    def constant_value(self):
        return self.num.constant_value() / self.den.constant_value()

    def variables(self):
        return self.num.variables() | self.den.variables()

    def jet_variables(self):
        return self.num.jet_variables() | self.den.jet_variables()

    def max_order(self, i=None):
        return max(self.num.max_order(i), self.den.max_order(i))

    def __add__(self, other):
        other = _coerce(self.algebra, other)
        if other is NotImplemented:
            return other
        if isinstance(other, DiffPoly):
            return make_frac(self.num + other * self.den, self.den)
        if self.den == other.den:
            return make_frac(self.num + other.num, self.den)
        if len(self.den.terms) == 1 and len(other.den.terms) == 1:
            (m1, c1), = self.den.terms.items()
            (m2, c2), = other.den.terms.items()
            m = mono_lcm(m1, m2)
            alg = self.algebra
            f1 = DiffPoly(alg, {mono_div(m, m1): 1 / c1})
            f2 = DiffPoly(alg, {mono_div(m, m2): 1 / c2})
            return make_frac(self.num * f1 + other.num * f2, DiffPoly(alg, {m: Fraction(1)}))
        q = exact_divide(self.den, other.den)
        if q is not None:
            return make_frac(self.num + other.num * q, self.den)
        q = exact_divide(other.den, self.den)
        if q is not None:
            return make_frac(self.num * q + other.num, other.den)
        return make_frac(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return DiffFrac._raw(-self.num, self.den)

    def __sub__(self, other):
        other = _coerce(self.algebra, other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return make_frac(self.num.scale(c), self.den)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, DiffPoly):
            return make_frac(self.num * other, self.den)
        if isinstance(other, DiffFrac):
            return make_frac(self.num * other.num, self.den * other.den)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return make_frac(self, other)

    def __rtruediv__(self, other):
        return make_frac(_coerce(self.algebra, other), self)

    def __pow__(self, k):
        if k < 0:
            return make_frac(self.den ** (-k), self.num ** (-k))
        return make_frac(self.num ** k, self.den ** k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.const(other)
        if isinstance(other, DiffPoly):
            return (self.num - other * self.den).is_zero()
        if isinstance(other, DiffFrac):
            return (self.num * other.den - other.num * self.den).is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return "DiffFrac(%s)" % self

    def __str__(self):
        return "(%s)/(%s)" % (self.num, self.den)


def as_frac(x):
    """View any element as (num, den)."""
    if isinstance(x, DiffFrac):
        return x.num, x.den
    return x, x.algebra.one()


def elem_str(x):
    return str(x)


# ---------------------------------------------------------------------------
# derivations


def total_derivative(f, times=1):
    """The total derivative applied `times` times."""
    for _ in range(times):
        f = _total_derivative_once(f)
    return f


def _total_derivative_once(f):
    if isinstance(f, DiffFrac):
        a, b = f.num, f.den
        return make_frac(_total_derivative_once(a) * b - a * _total_derivative_once(b), b * b)
    t = {}
    for m, c in f.terms.items():
        for m2, k in mono_derivative(m):
            t[m2] = t.get(m2, 0) + c * k
    return DiffPoly(f.algebra, t)


def _plain_partial(f, v):
    t = {}
    for m, c in f.terms.items():
        k, m2 = mono_partial(m, v)
        if k:
            t[m2] = t.get(m2, 0) + c * k
    return DiffPoly(f.algebra, t)


class ConstraintContext:
    """Constraints u_{l-m+a} + p_a = 0 with each p_a free of the eliminated generators.

    The last m generators are eliminated; `quotient` is the algebra of the first
    l - m generators on which projected elements live.
    """

    def __init__(self, algebra, p):
        self.algebra = algebra
        self.p = [_coerce(algebra, x) for x in p]
        self.m = len(self.p)
        self.keep = algebra.ell - self.m
        if self.keep < 0:
            raise ValueError("more constraints than generators")
        for pa in self.p:
            if not isinstance(pa, DiffPoly):
                raise NonPolynomialInput("constraint densities must be polynomial")
            for g, n in pa.jet_variables():
                if g >= self.keep:
                    raise ValueError("p depends on an eliminated generator")
        self.quotient = Algebra(algebra.names[: self.keep], algebra.quasiconstants)
        self._dp = {}

    def thetas(self):
        alg = self.algebra
        return [alg.gen(self.keep + a) + self.p[a] for a in range(self.m)]

    def dp(self, a, n):
        """The n-th total derivative of p_a (ambient algebra), cached."""
        key = (a, n)
        if key not in self._dp:
            self._dp[key] = total_derivative(self.p[a], n)
        return self._dp[key]


def partial_derivative(f, i, n, ctx=None, modified=None):
    """Partial derivative by u_i^(n).

    With a ConstraintContext (passed, or attached to the algebra) the modified
    partial derivative of the quotient is used, and i must be a kept generator.
    """
    alg = f.algebra
    if ctx is None and modified is not False:
        ctx = alg.constraints
    if modified is False:
        ctx = None
    limit = ctx.keep if ctx is not None else alg.ell
    if not 0 <= i < limit:
        raise IndexError("generator index %d out of range" % i)
    if n < 0:
        return alg.zero()
    if isinstance(f, DiffFrac):
        a, b = f.num, f.den
        da = partial_derivative(a, i, n, ctx, modified)
        db = partial_derivative(b, i, n, ctx, modified)
        return make_frac(da * b - a * db, b * b)
    out = _plain_partial(f, (i, n))
    if ctx is None:
        return out
    for a in range(ctx.m):
        gen = ctx.keep + a
        for (g, k) in f.jet_variables():
            if g != gen:
                continue
            coeff = _plain_partial(ctx.dp(a, k), (i, n))
            if not coeff.is_zero():
                out = out - coeff * _plain_partial(f, (g, k))
    return out


def frechet(F, algebra=None):
    """Frechet derivative of a vector as an m x l differential MatrixOp."""
    from .psdo import MatrixOp, PseudoOp
    alg = algebra or F[0].algebra
    rows = []
    for f in F:
        f = _coerce(alg, f)
        row = []
        for i in range(alg.ell):
            coeffs = {}
            top = f.max_order(i)
            for n in range(top + 1):
                d = partial_derivative(f, i, n, modified=False)
                if not d.is_zero():
                    coeffs[n] = d
            row.append(PseudoOp(alg, coeffs))
        rows.append(row)
    return MatrixOp(rows, algebra=alg)


def _euler(f, i, ctx):
    top = f.max_order(i) if ctx is None else _max_order_modified(f, i, ctx)
    total = f.algebra.zero()
    for n in range(top, -1, -1):
        # Horner form of sum_n (-d)^n partial_n
        total = -total_derivative(total) + partial_derivative(f, i, n, ctx, modified=ctx is not None)
    return total


def _max_order_modified(f, i, ctx):
    top = f.max_order(i)
    for a in range(ctx.m):
        k = f.max_order(ctx.keep + a)
        if k >= 0:
            top = max(top, k + ctx.p[a].max_order(i))
    return top


def variational_derivative(f, mode="ordinary", ctx=None):
    """Vector of variational derivatives of a polynomial density.

    mode "tilde" uses the modified partial derivatives of a constraint context
    and returns the l - m components of the quotient.
    """
    if isinstance(f, DiffFrac):
        if not f.is_polynomial():
            raise NonPolynomialInput("variational derivative needs a polynomial density")
        f = f.num.scale(1 / f.den.constant_value())
    if mode == "ordinary":
        return [_euler(f, i, None) for i in range(f.algebra.ell)]
    if mode != "tilde":
        raise ValueError("mode must be 'ordinary' or 'tilde'")
    ctx = ctx or f.algebra.constraints
    if ctx is None:
        raise ValueError("tilde mode needs a constraint context")
    return [_euler(f, i, ctx) for i in range(ctx.keep)]


def is_self_adjoint_frechet(xi):
    from .psdo import adjoint
    D = frechet(xi, xi[0].algebra)
    return D.equals(adjoint(D))


def homotopy_reconstruct(xi, algebra=None):
    """Density g with variational derivative xi, or HelmholtzViolation."""
    alg = algebra or xi[0].algebra
    vec = []
    for x in xi:
        x = _coerce(alg, x)
        if isinstance(x, DiffFrac):
            if not x.is_polynomial():
                raise NonPolynomialInput("homotopy reconstruction needs polynomial input")
            x = x.num.scale(1 / x.den.constant_value())
        vec.append(x)
    if len(vec) != alg.ell:
        raise ValueError("gradient length must equal the number of generators")
    if not is_self_adjoint_frechet(vec):
        raise HelmholtzViolation("Frechet derivative of the vector is not self-adjoint")
    g = alg.zero()
    for i, x in enumerate(vec):
        ui = alg.gen(i)
        for d, part in x.homogeneous_parts().items():
            g = g + (ui * part).scale(Fraction(1, d + 1))
    if variational_derivative(g) != vec:
        raise HelmholtzViolation("reconstructed density does not reproduce the gradient")
    return g


def antiderivative(f):
    """Polynomial g with total derivative f; NotExact otherwise."""
    if isinstance(f, DiffFrac):
        if not f.is_polynomial():
            raise NonPolynomialInput("antiderivative needs a polynomial")
        f = f.num.scale(1 / f.den.constant_value())
    alg = f.algebra
    g = alg.zero()
    for d, part in f.homogeneous_parts().items():
        if d == 0:
            raise NotExact("term of degree zero is not a total derivative")
        acc = alg.zero()
        for (i, k) in part.jet_variables():
            if k < 1:
                continue
            pk = _plain_partial(part, (i, k))
            for j in range(k):
                acc = acc + alg.gen(i, j) * _signed_derivative(pk, k - 1 - j)
        g = g + acc.scale(Fraction(1, d))
    if total_derivative(g) != f:
        raise NotExact("element is not a total derivative")
    return g


def _signed_derivative(f, n):
    out = total_derivative(f, n)
    return -out if n % 2 else out


def is_total_derivative(f):
    try:
        antiderivative(f)
        return True
    except NotExact:
        return False


def densities_equal_mod_d(f, g):
    """Equality modulo total derivatives and constants via variational derivatives."""
    return variational_derivative(f - g) == [f.algebra.zero()] * f.algebra.ell


# ---------------------------------------------------------------------------
# quotient projection


def quotient_project(x, ctx):
    """Substitute u_{l-m+a}^(n) -> -d^n p_a; result lives over ctx.quotient."""
    from .psdo import MatrixOp, PseudoOp
    if isinstance(x, MatrixOp):
        return MatrixOp([[quotient_project(e, ctx) for e in row] for row in x.rows],
                        algebra=ctx.quotient)
    if isinstance(x, PseudoOp):
        return PseudoOp(ctx.quotient, {k: quotient_project(c, ctx) for k, c in x.coeffs.items()},
                        depth=x.depth)
    if isinstance(x, (list, tuple)):
        return [quotient_project(e, ctx) for e in x]
    if isinstance(x, DiffFrac):
        num = _project_poly(x.num, ctx)
        den = _project_poly(x.den, ctx)
        if den.is_zero():
            raise DenominatorVanishes("denominator %s projects to zero" % x.den)
        return make_frac(num, den)
    return _project_poly(x, ctx)


def _rehome(p, alg):
    return DiffPoly(alg, p.terms)


def _project_poly(f, ctx):
    q = ctx.quotient
    cache = {}
    out = {}
    for m, c in f.terms.items():
        val = DiffPoly(q, {ONE_MONO: c})
        keep_part = {}
        for v, e in m:
            if v[0] >= ctx.keep:
                a, n = v[0] - ctx.keep, v[1]
                if (a, n) not in cache:
                    cache[(a, n)] = -_rehome(ctx.dp(a, n), q)
                val = val * cache[(a, n)] ** e
            else:
                keep_part[v] = e
        if keep_part:
            val = val * DiffPoly(q, {mono_from_dict(keep_part): Fraction(1)})
        for m2, c2 in val.terms.items():
            out[m2] = out.get(m2, 0) + c2
    return DiffPoly(q, out)


def lift(x, algebra):
    """View an element of a quotient algebra inside the ambient algebra."""
    if isinstance(x, DiffFrac):
        return make_frac(_rehome(x.num, algebra), _rehome(x.den, algebra))
    return _rehome(x, algebra)


__all__ = [
    "Algebra", "ConstraintContext", "DiffPoly", "DiffFrac", "make_frac", "exact_divide",
    "total_derivative", "partial_derivative", "frechet", "variational_derivative",
    "homotopy_reconstruct", "antiderivative", "quotient_project", "lift",
    "densities_equal_mod_d", "is_total_derivative",
    "HelmholtzViolation", "NonPolynomialInput", "NotExact", "DenominatorVanishes",
]
