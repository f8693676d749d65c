"""Expression parser for differential functions and scalar operators.

Grammar (usual precedence, * and / bind tighter than + and -):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | post
    post   := atom ("'" | '^' INT | '^(' INT ')')*
    atom   := INT | NAME | '(' expr ')'

`d` and `dinv` are the derivation and its inverse; `*` is composition between
operators and multiplication between functions; `f^(n)` is the n-th derivative
and `f^n` a power.  A function on the left of an operator acts by multiplication.
"""

import re
from fractions import Fraction

from .diffring import DiffFrac, DiffPoly, make_frac, total_derivative
from .psdo import (
    MatrixOp, PseudoOp, WeaklyNonlocal, compose_scalar, dinv_sandwich,
)


class ParseError(SyntaxError):
    """Malformed input, with 1-based line and column."""

    def __init__(self, message, line=1, col=1):
        super().__init__("line %d, column %d: %s" % (line, col, message))
        self.line = line
        self.col = col
        self.message = message


class UnknownSymbol(ParseError):
    """A name that is neither a generator, a quasiconstant, d nor dinv."""


_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S)")


def tokenize(text, line=1, col0=1):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        col = col0 + pos
        if m.group(1):
            toks.append(("int", int(m.group(1)), line, col))
        elif m.group(2):
            toks.append(("name", m.group(2), line, col))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()'":
                raise ParseError("unexpected character %r" % ch, line, col)
            toks.append(("op", ch, line, col))
        pos = m.end()
    toks.append(("end", None, line, col0 + len(text)))
    return toks


class OpValue:
    """Scalar operator local + sum X_a o dinv o Y_a with X_a, Y_a differential.

    When a product would need two dinv factors the value falls back to a
    truncated PseudoOp (`trunc`), which is still usable but not weakly non-local.
    """

    def __init__(self, algebra, local=None, sandwiches=(), trunc=None):
        self.algebra = algebra
        self.local = local if local is not None else PseudoOp.zero(algebra)
        self.sandwiches = list(sandwiches)
        self.trunc = trunc

    @classmethod
    def of(cls, x):
        if isinstance(x, OpValue):
            return x
        return cls(x.algebra, PseudoOp.mult(x))

    def pseudo(self, depth):
        if self.trunc is not None:
            return self.trunc.truncate(depth)
        out = self.local
        dinv = PseudoOp.d(self.algebra, -1)
        for X, Y in self.sandwiches:
            out = out + compose_scalar(X, compose_scalar(dinv, Y, depth + 4), depth + 4)
        return out.truncate(depth) if self.sandwiches else out

    def __add__(self, other):
        if self.trunc is not None or other.trunc is not None:
            return OpValue(self.algebra, trunc=self.pseudo(_DEPTH[0]) + other.pseudo(_DEPTH[0]))
        return OpValue(self.algebra, self.local + other.local, self.sandwiches + other.sandwiches)

    def __neg__(self):
        if self.trunc is not None:
            return OpValue(self.algebra, trunc=-self.trunc)
        return OpValue(self.algebra, -self.local, [(-X, Y) for X, Y in self.sandwiches])

    def scale(self, c):
        if self.trunc is not None:
            return OpValue(self.algebra, trunc=self.trunc.scale(c))
        return OpValue(self.algebra, self.local.scale(c),
                       [(X.scale(c), Y) for X, Y in self.sandwiches])

    def compose(self, other):
        alg = self.algebra
        if self.trunc is None and other.trunc is None:
            loc = compose_scalar(self.local, other.local)
            sw = [(compose_scalar(self.local, X), Y) for X, Y in other.sandwiches]
            sw += [(X, compose_scalar(Y, other.local)) for X, Y in self.sandwiches]
            if not (self.sandwiches and other.sandwiches):
                return OpValue(alg, loc, sw)
        K = _DEPTH[0]
        return OpValue(alg, trunc=compose_scalar(self.pseudo(K + 4), other.pseudo(K + 4), K + 2)
                       .truncate(K))

    def is_weakly_nonlocal(self):
        return self.trunc is None

    def normalized(self):
        """(local PseudoOp, [(p, q)]) with each nonlocal piece p dinv q."""
        alg = self.algebra
        local = self.local
        terms = []
        for X, Y in self.sandwiches:
            w = dinv_sandwich(MatrixOp([[X]], alg), [[Fraction(1)]], MatrixOp([[Y]], alg))
            local = local + w.local.rows[0][0]
            terms.extend((p[0], q[0]) for p, q in w.terms)
        return local, terms


# working depth for non-weakly-non-local fallbacks; set by the model loader
_DEPTH = [8]


def set_fallback_depth(K):
    _DEPTH[0] = K


class _Parser:
    def __init__(self, text, algebra, line=1, col=1, functions_only=False):
        self.toks = tokenize(text, line, col)
        self.i = 0
        self.alg = algebra
        self.functions_only = functions_only

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.take()
        if t[0] != kind or (value is not None and t[1] != value):
            raise ParseError("expected %s" % (value or kind), t[2], t[3])
        return t

    def parse(self):
        v = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError("unexpected %r" % (t[1],), t[2], t[3])
        return v

    def expr(self):
        v = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            w = self.term()
            v = _add(v, w) if op == "+" else _add(v, _neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            t = self.take()
            w = self.unary()
            if t[1] == "*":
                v = _mul(v, w)
            else:
                if isinstance(w, OpValue) or isinstance(v, OpValue) and not _is_number(w):
                    raise ParseError("division by an operator", t[2], t[3])
                v = _div(v, w, t)
        return v

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return _neg(self.unary())
        if t[0] == "op" and t[1] == "+":
            self.take()
            return self.unary()
        return self.post()

    def post(self):
        v = self.atom()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "'":
                self.take()
                v = _derive(v, 1, t)
            elif t[0] == "op" and t[1] == "^":
                self.take()
                n = self.peek()
                if n[0] == "op" and n[1] == "(":
                    self.take()
                    k = self.expect("int")[1]
                    self.expect("op", ")")
                    v = _derive(v, k, t)
                elif n[0] == "int":
                    self.take()
                    v = _power(v, n[1], t)
                elif n[0] == "op" and n[1] == "-":
                    self.take()
                    k = self.expect("int")[1]
                    if not isinstance(v, OpValue):
                        v = make_frac(self.alg.one(), v ** k)
                    elif _is_d(v) and v.local.coeffs[1] == self.alg.one():
                        v = _dinv_power(self.alg, k)
                    else:
                        raise ParseError("negative power of an operator", t[2], t[3])
                else:
                    raise ParseError("expected exponent", n[2], n[3])
            else:
                return v

    def atom(self):
        t = self.take()
        if t[0] == "int":
            return self.alg.const(t[1])
        if t[0] == "name":
            name = t[1]
            if name in ("d", "dinv"):
                if self.functions_only:
                    raise ParseError("operator %s in a function expression" % name, t[2], t[3])
                if name == "d":
                    return OpValue(self.alg, PseudoOp.d(self.alg, 1))
                return OpValue(self.alg, PseudoOp.zero(self.alg),
                               [(PseudoOp.one(self.alg), PseudoOp.one(self.alg))])
            if name in self.alg.names:
                return self.alg.gen(name)
            if name in self.alg.quasiconstants:
                return self.alg.quasi(name)
            raise UnknownSymbol("unknown symbol %r" % name, t[2], t[3])
        if t[0] == "op" and t[1] == "(":
            v = self.expr()
            self.expect("op", ")")
            return v
        if t[0] == "end":
            raise ParseError("unexpected end of expression", t[2], t[3])
        raise ParseError("unexpected %r" % (t[1],), t[2], t[3])


def _is_number(x):
    return isinstance(x, DiffPoly) and x.is_constant()


def _is_d(v):
    return isinstance(v, OpValue) and v.trunc is None and not v.sandwiches and \
        set(v.local.coeffs) == {1} and v.local.coeffs[1].is_constant()


def _dinv_power(alg, k):
    v = OpValue(alg, PseudoOp.one(alg))
    dinv = OpValue(alg, PseudoOp.zero(alg), [(PseudoOp.one(alg), PseudoOp.one(alg))])
    for _ in range(k):
        v = v.compose(dinv)
    return v


def _add(a, b):
    if isinstance(a, OpValue) or isinstance(b, OpValue):
        return OpValue.of(a) + OpValue.of(b)
    return a + b


def _neg(a):
    return -a


def _mul(a, b):
    if isinstance(a, OpValue) or isinstance(b, OpValue):
        return OpValue.of(a).compose(OpValue.of(b))
    return a * b


def _div(a, b, tok):
    if isinstance(b, DiffPoly) and b.is_zero():
        raise ParseError("division by zero", tok[2], tok[3])
    if _is_number(b):
        return a.scale(1 / b.constant_value())
    return a / b


def _derive(v, k, tok):
    if isinstance(v, OpValue):
        raise ParseError("derivative of an operator", tok[2], tok[3])
    return total_derivative(v, k)


def _power(v, n, tok):
    if isinstance(v, OpValue):
        out = OpValue(v.algebra, PseudoOp.one(v.algebra))
        for _ in range(n):
            out = out.compose(v)
        return out
    return v ** n


def parse_function(text, algebra, line=1, col=1):
    """Parse a differential function (polynomial or fraction)."""
    v = _Parser(text, algebra, line, col, functions_only=True).parse()
    if not isinstance(v, (DiffPoly, DiffFrac)):
        raise ParseError("expected a function", line, col)
    return v


def parse_operator(text, algebra, line=1, col=1):
    """Parse a scalar operator expression into an OpValue."""
    return OpValue.of(_Parser(text, algebra, line, col).parse())


def assemble(entries, algebra, shape):
    """Build a WeaklyNonlocal matrix (or None, with a MatrixOp) from OpValue entries.

    entries maps (r, c) -> OpValue.  Returns (wnl, matrix); wnl is None when some
    entry is not weakly non-local.
    """
    r, c = shape
    if any(not v.is_weakly_nonlocal() for v in entries.values()):
        K = _DEPTH[0]
        rows = [[entries[(i, j)].pseudo(K) if (i, j) in entries else PseudoOp.zero(algebra)
                 for j in range(c)] for i in range(r)]
        return None, MatrixOp(rows, algebra)
    rows = [[PseudoOp.zero(algebra) for _ in range(c)] for _ in range(r)]
    terms = []
    zero = algebra.zero()
    for (i, j), v in sorted(entries.items()):
        loc, tms = v.normalized()
        rows[i][j] = rows[i][j] + loc
        for p, q in tms:
            pv = [zero] * r
            qv = [zero] * c
            pv[i] = p
            qv[j] = q
            terms.append((pv, qv))
    return WeaklyNonlocal(MatrixOp(rows, algebra), terms).compressed(), None


def format_function(x):
    if isinstance(x, DiffFrac):
        return "(%s)/(%s)" % (x.num, x.den)
    return str(x)


def format_scalar_op(P):
    """Differential PseudoOp as parseable text."""
    if P.is_zero():
        return "0"
    parts = []
    for k in sorted(P.coeffs, reverse=True):
        c = format_function(P.coeffs[k])
        if k == 0:
            parts.append("(%s)" % c)
        elif k == 1:
            parts.append("(%s)*d" % c)
        elif k > 0:
            parts.append("(%s)*d^%d" % (c, k))
        else:
            raise ValueError("only differential operators have a finite text form")
    return " + ".join(parts)


def format_wnl_entry(W, i, j):
    parts = []
    loc = W.local.rows[i][j]
    if not loc.is_zero():
        parts.append(format_scalar_op(loc))
    for p, q in W.terms:
        if p[i].is_zero() or q[j].is_zero():
            continue
        parts.append("(%s)*dinv*(%s)" % (format_function(p[i]), format_function(q[j])))
    return " + ".join(parts) if parts else "0"


__all__ = [
    "ParseError", "UnknownSymbol", "OpValue", "parse_function", "parse_operator", "assemble",
    "format_scalar_op", "format_wnl_entry", "format_function", "set_fallback_depth",
]
