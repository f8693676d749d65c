"""Association relations and the Lenard-Magri recursion.

A density h and a vector P are associated through H = A o B^{-1} when some
F satisfies delta h / delta u = B F and P = A F.  Local structures use the
trivial pair (H, 1).

Indexing: the seed g_0 lies in the kernel direction of the first structure
(H0 delta g_0 = 0) and the recorded flows satisfy
    P_n = H1 delta g_n = H0 delta g_{n+1}.
"""

from dataclasses import dataclass, field

from .diffring import (
    DiffFrac, DiffPoly, HelmholtzViolation, NotExact, antiderivative, exact_divide,
    homotopy_reconstruct, make_frac, total_derivative, variational_derivative,
)
from .psdo import FractionPair


class NoWitness(ArithmeticError):
    """B F = xi has no solution the triangular solver can find."""


class Mismatch(ValueError):
    """A witness exists but A F differs from the given vector."""


class NonPolynomialGradient(ValueError):
    """The candidate variational derivative has non-polynomial entries."""


@dataclass
class Association:
    h: object
    P: list
    F: list
    pair: FractionPair


@dataclass
class HierarchyState:
    densities: list
    flows: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    structures: tuple = ()
    involution: list = field(default_factory=list)

    @property
    def steps(self):
        """(g_n, P_n, F_n) triples; the last density has no flow yet."""
        out = []
        for n, g in enumerate(self.densities):
            P = self.flows[n] if n < len(self.flows) else None
            F = self.witnesses[n] if n < len(self.witnesses) else None
            out.append((g, P, F))
        return out


def pair_of(S):
    if S.frac is not None:
        return S.frac
    if not S.is_local():
        raise NoWitness("structure %s has no fraction pair" % S.name)
    return FractionPair.trivial(S.H)


def _is_zero(x):
    return x.is_zero()


def _as_poly(x):
    if isinstance(x, DiffFrac):
        if not x.is_polynomial():
            return None
        return x.num.scale(1 / x.den.constant_value())
    return x


def _integrate(f, times):
    """times-fold antiderivative with zero integration constants."""
    g = _as_poly(f)
    if g is None:
        raise NoWitness("cannot integrate the fraction %s" % (f,))
    for _ in range(times):
        try:
            g = antiderivative(g)
        except NotExact as exc:
            raise NoWitness(str(exc)) from exc
    return g


def _divide(f, a):
    if isinstance(f, DiffPoly) and isinstance(a, DiffPoly):
        q = exact_divide(f, a)
        if q is not None:
            return q
    return make_frac(f, a) if isinstance(f, DiffPoly) else f / a


def solve_pivot(Q, rhs):
    """Solve Q F = rhs for a scalar differential operator Q."""
    alg = Q.algebra
    if rhs.is_zero():
        return alg.zero()
    coeffs = Q.coeffs
    top = max(coeffs)
    a = coeffs[top]
    if top == 0:
        return _divide(rhs, a)
    if len(coeffs) == 1:
        q = _as_poly(_divide(rhs, a))
        if q is None:
            raise NoWitness("%s is not polynomial" % _divide(rhs, a))
        return _integrate(q, top)
    if top == 1 and set(coeffs) == {0, 1}:
        b = coeffs[0]
        da = total_derivative(a)
        if not da.is_zero():
            k = exact_divide(b, da) if isinstance(b, DiffPoly) else None
            if k is not None and k.is_constant():
                k = k.constant_value()
                if k.denominator == 1 and k >= 0:
                    k = int(k)
                    inner = _integrate(rhs * a ** (k - 1) if k >= 1 else _divide(rhs, a), 1)
                    return _divide(inner, a ** k) if k else inner
    raise NoWitness("unsupported pivot %s" % Q)


def solve_witness(B, xi, completion=None):
    """Solve B F = xi by repeatedly eliminating equations with one unknown.

    `completion`, when given, is a callable (F_known dict) -> list of
    (row operators dict j -> PseudoOp, rhs) extra equations used for unknowns
    that B leaves undetermined.  Returns the list F.
    """
    r, c = B.shape
    known = {}
    rows = [{j: B.rows[i][j] for j in range(c) if not B.rows[i][j].is_zero()} for i in range(r)]
    rhs = list(xi)

    def sweep(eqs):
        progress = True
        while progress:
            progress = False
            for ops, b in eqs:
                unknown = [j for j in ops if j not in known]
                if len(unknown) != 1:
                    continue
                j = unknown[0]
                res = b
                for jj, op in ops.items():
                    if jj != j:
                        res = res - op.apply(known[jj])
                known[j] = solve_pivot(ops[j], res)
                progress = True

    eqs = list(zip(rows, rhs))
    sweep(eqs)
    if len(known) < c and completion is not None:
        extra = completion(known)
        sweep(extra)
        eqs = eqs + extra
    if len(known) < c:
        missing = [j + 1 for j in range(c) if j not in known]
        raise NoWitness("components %s are undetermined" % missing)
    for i, (ops, b) in enumerate(eqs):
        res = b
        for j, op in ops.items():
            res = res - op.apply(known[j])
        if not res.is_zero():
            raise NoWitness("equation %d is inconsistent: residual %s" % (i + 1, res))
    return [known[j] for j in range(c)]


def apply_matrix(A, F):
    out = []
    for row in A.rows:
        acc = A.algebra.zero()
        for op, f in zip(row, F):
            if not op.is_zero():
                acc = acc + op.apply(f)
        out.append(acc)
    return out


def _equal(a, b):
    return (a - b).is_zero()


def check_associated(S, h, P):
    """Association of the density h with P through the fraction pair of S."""
    pair = pair_of(S)
    xi = variational_derivative(h)
    F = solve_witness(pair.B, xi)
    AF = apply_matrix(pair.A, F)
    for i, (x, y) in enumerate(zip(AF, P)):
        if not _equal(x, y):
            raise Mismatch("component %d: A F = %s but P = %s" % (i + 1, x, y))
    return Association(h, list(P), F, pair)


def _completion(S0pair, S1):
    """Extra equations (S1 xi)_r = 0 at the zero rows r of the first pair."""
    if S0pair.B.shape[0] != S0pair.B.shape[1]:
        return None
    zero_rows = [i for i, row in enumerate(S0pair.A.rows) if all(e.is_zero() for e in row)]
    if not zero_rows or not S1.is_local():
        return None
    trivial_b = all((e.is_zero() if i != j else e.coeffs == {0: S1.algebra.one()})
                    for i, row in enumerate(S0pair.B.rows) for j, e in enumerate(row))
    if not trivial_b:
        return None
    H = S1.H

    def extra(known):
        eqs = []
        for r in zero_rows:
            ops = {j: H.rows[r][j] for j in range(H.shape[1]) if not H.rows[r][j].is_zero()}
            eqs.append((ops, S1.algebra.zero()))
        return eqs
    return extra


def lenard_step(S0, S1, g_prev):
    """(P, g_next, F) with P = S1 delta g_prev = S0 delta g_next, both verified."""
    pair1 = pair_of(S1)
    xi_prev = variational_derivative(g_prev)
    F = solve_witness(pair1.B, xi_prev)
    P = [_as_poly(x) if _as_poly(x) is not None else x for x in apply_matrix(pair1.A, F)]
    pair0 = pair_of(S0)
    F0 = solve_witness(pair0.A, P, completion=_completion(pair0, S1))
    xi = apply_matrix(pair0.B, F0)
    poly = [_as_poly(x) for x in xi]
    if any(x is None for x in poly):
        raise NonPolynomialGradient("candidate gradient %s is not polynomial"
                                    % ", ".join(map(str, xi)))
    g_next = homotopy_reconstruct(poly, S0.algebra)
    check_associated(S1, g_prev, P)
    check_associated(S0, g_next, P)
    return P, g_next, F


class StepFailure(RuntimeError):
    def __init__(self, step, exc):
        super().__init__("step %d: %s: %s" % (step, type(exc).__name__, exc))
        self.step = step
        self.cause = exc


def run_hierarchy(S0, S1, seed, steps):
    """Iterate lenard_step; records densities g_0..g_steps and flows P_0..P_{steps-1}."""
    state = HierarchyState([seed], structures=(S0, S1))
    g = seed
    for n in range(steps):
        try:
            P, g, F = lenard_step(S0, S1, g)
        except (NoWitness, Mismatch, HelmholtzViolation, NonPolynomialGradient) as exc:
            raise StepFailure(n, exc) from exc
        state.flows.append(P)
        state.witnesses.append(F)
        state.densities.append(g)
    state.involution = involution_table(state)
    return state


def involution_table(state):
    """[(m, n, ok)]: is delta g_m . P_n a total derivative?"""
    out = []
    for m, g in enumerate(state.densities):
        xi = variational_derivative(g)
        for n, P in enumerate(state.flows):
            polys = [_as_poly(x) for x in P]
            if any(x is None for x in polys):
                out.append((m, n, False))
                continue
            integrand = g.algebra.zero()
            for a, b in zip(xi, polys):
                integrand = integrand + a * b
            zero = [g.algebra.zero()] * g.algebra.ell
            out.append((m, n, variational_derivative(integrand) == zero))
    return out


def leading_symbol(P, component, generator=None):
    """(order, coefficient) of the highest derivative of the generator appearing linearly."""
    gen = component if generator is None else generator
    f = _as_poly(P[component])
    best = None
    for m, c in f.terms.items():
        if len(m) != 1:
            continue
        (v, e), = m
        if e != 1 or v[0] != gen:
            continue
        if best is None or v[1] > best[0]:
            best = (v[1], c)
    return best


__all__ = [
    "Association", "HierarchyState", "NoWitness", "Mismatch", "NonPolynomialGradient",
    "StepFailure", "check_associated", "lenard_step", "run_hierarchy", "leading_symbol",
    "solve_witness", "solve_pivot", "apply_matrix", "involution_table", "pair_of",
]
