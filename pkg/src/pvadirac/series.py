"""Truncated Laurent series in one parameter (lambda) and in two (lambda, mu).

A series with depth K knows every coefficient of power >= -K; depth None means
the series is exact (a Laurent polynomial).
"""

from fractions import Fraction
from functools import lru_cache

from .diffring import total_derivative


@lru_cache(maxsize=None)
def binom(k, j):
    """Generalized binomial coefficient C(k, j) for integer k and j >= 0."""
    if j < 0:
        return 0
    out = Fraction(1)
    for t in range(j):
        out = out * (k - t) / (t + 1)
    return int(out)


def min_depth(*ds):
    ds = [d for d in ds if d is not None]
    return min(ds) if ds else None


class Precision(ValueError):
    """A comparison asked for coefficients below the known depth."""


class LambdaSeries:
    """Sum of coeffs[k] * lambda^k for k >= -depth."""

    __slots__ = ("algebra", "coeffs", "depth")

    def __init__(self, algebra, coeffs=None, depth=None):
        self.algebra = algebra
        self.depth = depth
        lo = None if depth is None else -depth
        self.coeffs = {k: c for k, c in (coeffs or {}).items()
                       if not c.is_zero() and (lo is None or k >= lo)}

    @classmethod
    def const(cls, x):
        return cls(x.algebra, {0: x})

    def top(self):
        return max(self.coeffs) if self.coeffs else None

    def is_zero(self):
        return not self.coeffs

    def __getitem__(self, k):
        return self.coeffs.get(k, self.algebra.zero())

    def truncate(self, depth):
        if depth is None:
            return self
        return LambdaSeries(self.algebra, self.coeffs, min_depth(self.depth, depth))

    def __add__(self, other):
        t = dict(self.coeffs)
        for k, c in other.coeffs.items():
            t[k] = t[k] + c if k in t else c
        return LambdaSeries(self.algebra, t, min_depth(self.depth, other.depth))

    def __neg__(self):
        return LambdaSeries(self.algebra, {k: -c for k, c in self.coeffs.items()}, self.depth)

    def __sub__(self, other):
        return self + (-other)

    def times(self, x):
        """Multiply every coefficient by the element x."""
        return LambdaSeries(self.algebra, {k: x * c for k, c in self.coeffs.items()}, self.depth)

    def scale(self, c):
        return LambdaSeries(self.algebra, {k: v.scale(c) for k, v in self.coeffs.items()}, self.depth)

    def shift(self, n):
        """Multiply by lambda^n."""
        depth = None if self.depth is None else self.depth - n
        return LambdaSeries(self.algebra, {k + n: c for k, c in self.coeffs.items()}, depth)

    def __mul__(self, other):
        if not isinstance(other, LambdaSeries):
            return self.times(other)
        depth = None
        if self.depth is not None or other.depth is not None:
            t1, t2 = self.top(), other.top()
            cands = []
            if self.depth is not None and t2 is not None:
                cands.append(self.depth - t2)
            if other.depth is not None and t1 is not None:
                cands.append(other.depth - t1)
            if not cands:
                cands = [d for d in (self.depth, other.depth) if d is not None]
            depth = min(cands)
        lo = None if depth is None else -depth
        t = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                if lo is not None and k < lo:
                    continue
                t[k] = t[k] + c1 * c2 if k in t else c1 * c2
        return LambdaSeries(self.algebra, t, depth)

    def derivative(self):
        return LambdaSeries(self.algebra, {k: total_derivative(c) for k, c in self.coeffs.items()},
                            self.depth)

    def shift_apply(self, n, target=None):
        """(lambda + d)^n applied to the series, d acting on coefficients.

        For n < 0 the geometric expansion in lambda^{-1} is truncated at -target.
        """
        if n >= 0:
            depth = None if self.depth is None else self.depth - n
            lo = None if depth is None else -depth
            t = {}
            for k, c in self.coeffs.items():
                der = c
                for j in range(n + 1):
                    p = k + n - j
                    if lo is None or p >= lo:
                        v = der.scale(binom(n, j))
                        t[p] = t[p] + v if p in t else v
                    der = total_derivative(der)
            return LambdaSeries(self.algebra, t, depth)
        depth = min_depth(self.depth, target)
        if depth is None:
            raise ValueError("negative shift needs a target depth")
        lo = -depth
        t = {}
        for k, c in self.coeffs.items():
            der = c
            j = 0
            while k + n - j >= lo:
                p = k + n - j
                v = der.scale(binom(n, j))
                t[p] = t[p] + v if p in t else v
                der = total_derivative(der)
                j += 1
        return LambdaSeries(self.algebra, t, depth)

    def neg_shift_substitute(self, target=None):
        """Replace lambda by (-lambda - d) acting on each coefficient."""
        out = LambdaSeries(self.algebra, {}, None)
        for k, c in self.coeffs.items():
            term = LambdaSeries(self.algebra, {0: c}, None).shift_apply(k, target)
            out = out + (term if k % 2 == 0 else -term)
        if self.depth is not None:
            out = out.truncate(self.depth)
        return out.truncate(target)

    def equals(self, other, depth=None):
        if depth is None:
            depth = min_depth(self.depth, other.depth)
        for s in (self, other):
            if depth is None and s.depth is not None:
                raise Precision("exact comparison of a truncated series")
            if depth is not None and s.depth is not None and s.depth < depth:
                raise Precision("series known to depth %d, asked %d" % (s.depth, depth))
        return (self - other).first_nonzero(depth) is None

    def first_nonzero(self, depth=None):
        """Highest power with a nonzero coefficient within the window, or None."""
        for k in sorted(self.coeffs, reverse=True):
            if depth is not None and k < -depth:
                break
            return k
        return None

    def __eq__(self, other):
        if not isinstance(other, LambdaSeries):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        return "LambdaSeries(%s)" % self

    def __str__(self):
        return format_series(self.coeffs, "lambda", self.depth)


def format_series(coeffs, var, depth):
    if not coeffs:
        body = "0"
    else:
        parts = []
        for k in sorted(coeffs, reverse=True):
            c = str(coeffs[k])
            if k == 0:
                parts.append("(%s)" % c)
            elif k == 1:
                parts.append("(%s)*%s" % (c, var))
            else:
                parts.append("(%s)*%s^%d" % (c, var, k))
        body = " + ".join(parts)
    if depth is not None:
        body += " + O(%s^%d)" % (var, -depth - 1)
    return body


class DoubleSeries:
    """Sum over mu-powers s >= -depth_mu of coeffs[s] (a LambdaSeries) * mu^s.

    This is the truncated image of the two-parameter space under the expansion
    |mu| > |lambda|.
    """

    def __init__(self, algebra, coeffs=None, depth_mu=None):
        self.algebra = algebra
        self.depth_mu = depth_mu
        lo = None if depth_mu is None else -depth_mu
        self.coeffs = {s: c for s, c in (coeffs or {}).items()
                       if not c.is_zero() and (lo is None or s >= lo)}

    def __add__(self, other):
        t = dict(self.coeffs)
        for s, c in other.coeffs.items():
            t[s] = t[s] + c if s in t else c
        return DoubleSeries(self.algebra, t, min_depth(self.depth_mu, other.depth_mu))

    def __neg__(self):
        return DoubleSeries(self.algebra, {s: -c for s, c in self.coeffs.items()}, self.depth_mu)

    def __sub__(self, other):
        return self + (-other)

    def add_term(self, s, series):
        """In-place accumulate series * mu^s (ignored below the mu window)."""
        if self.depth_mu is not None and s < -self.depth_mu:
            return
        if s in self.coeffs:
            self.coeffs[s] = self.coeffs[s] + series
        else:
            self.coeffs[s] = series

    def lambda_depth(self):
        return min_depth(*[c.depth for c in self.coeffs.values()])

    def first_nonzero(self, depth_lambda=None, depth_mu=None):
        """(mu power, lambda power, coefficient) of the first nonzero entry in the window."""
        for s in sorted(self.coeffs, reverse=True):
            if depth_mu is not None and s < -depth_mu:
                break
            ser = self.coeffs[s]
            k = ser.first_nonzero(depth_lambda)
            if k is not None:
                return s, k, ser.coeffs[k]
        return None

    def is_zero(self, depth_lambda=None, depth_mu=None):
        return self.first_nonzero(depth_lambda, depth_mu) is None

    def equals(self, other, depth_lambda=None, depth_mu=None):
        return (self - other).is_zero(depth_lambda, depth_mu)

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for s in sorted(self.coeffs, reverse=True):
            parts.append("[%s]*mu^%d" % (self.coeffs[s], s))
        return " + ".join(parts)


__all__ = ["LambdaSeries", "DoubleSeries", "binom", "Precision", "min_depth"]
