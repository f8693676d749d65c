"""Line-oriented model files and the built-in sl3 minimal nilpotent model.

    [algebra]
    generators = u, v
    quasiconstants = c            (optional)

    [structure NAME]
    H[i][j] = <operator expression>      (1-based; missing mirror entries are
                                          filled by skewadjointness)
    fraction = FNAME                     (optional fraction pair to attach)

    [matrix MNAME]
    H[i][j] = <differential operator>    (plain matrix, no skewadjointness; usable as base)

    [fraction FNAME]
    size = n                             (optional, default: number of generators)
    over = CNAME                         (optional: entries live on the quotient)
    A[i][j] = ...  or  base = NAME with M[i][j] = ...   (A = base o B + M;
                                                         NAME a structure or matrix)
    B[i][j] = ...

    [constraints CNAME]
    theta[a] = <function expression>

Lines starting with '#' are comments.
"""

import os
import re
from dataclasses import dataclass, field

from .config import RunConfig
from .diffring import Algebra, DiffPoly, quotient_project
from .dirac import ConstraintSet
from .parse import (
    OpValue, ParseError, UnknownSymbol, assemble, format_wnl_entry, parse_function,
    parse_operator, set_fallback_depth,
)
from .psdo import (
    FractionPair, MatrixOp, PseudoOp, WeaklyNonlocal, adjoint, adjoint_scalar, compose,
)
from .pva import PVAStructure


class NotSkewadjoint(ValueError):
    """A structure in a model file is not skewadjoint."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else "line %d: %s" % (line, message))
        self.line = line


_SECTION = re.compile(r"^\[\s*(algebra|structure|matrix|fraction|constraints)(?:\s+([A-Za-z_][\w]*))?\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z]+)\[(\d+)\](?:\[(\d+)\])?$")


@dataclass
class ModelFile:
    algebra: Algebra
    structures: dict = field(default_factory=dict)
    fraction_pairs: dict = field(default_factory=dict)
    constraint_sets: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)

    def structure(self, name):
        if name not in self.structures:
            raise UnknownSymbol("no structure named %r" % name)
        return self.structures[name]

    def constraints(self, name):
        if name not in self.constraint_sets:
            raise UnknownSymbol("no constraint set named %r" % name)
        return self.constraint_sets[name]

    def fraction(self, name):
        if name not in self.fraction_pairs:
            raise UnknownSymbol("no fraction pair named %r" % name)
        return self.fraction_pairs[name]


class _Section:
    def __init__(self, kind, name, line):
        self.kind = kind
        self.name = name
        self.line = line
        self.keys = {}      # key -> (value, line, col)
        self.entries = {}   # (letter, i, j) -> (text, line, col)


def _split_sections(text):
    sections = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if m is None or (m.group(1) != "algebra" and not m.group(2)):
                raise ParseError("bad section header %r" % stripped, lineno, 1)
            cur = _Section(m.group(1), m.group(2), lineno)
            sections.append(cur)
            continue
        if cur is None:
            raise ParseError("assignment outside a section", lineno, 1)
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, 1)
        lhs, rhs = line.split("=", 1)
        key = lhs.strip()
        col = len(lhs) + 2 + (len(rhs) - len(rhs.lstrip()))
        value = rhs.strip()
        if not value:
            raise ParseError("empty value", lineno, col)
        m = _ENTRY.match(key)
        if m:
            i = int(m.group(2))
            j = int(m.group(3)) if m.group(3) else None
            k = (m.group(1), i, j)
            if k in cur.entries:
                raise ParseError("duplicate entry %s" % key, lineno, 1)
            cur.entries[k] = (value, lineno, col)
        else:
            if key in cur.keys:
                raise ParseError("duplicate key %s" % key, lineno, 1)
            cur.keys[key] = (value, lineno, col)
    return sections


def _names(value):
    return [x.strip() for x in value.split(",") if x.strip()]


def _parse_algebra(sec):
    if "generators" not in sec.keys:
        raise ParseError("[algebra] needs generators", sec.line, 1)
    gens = _names(sec.keys["generators"][0])
    quasi = _names(sec.keys["quasiconstants"][0]) if "quasiconstants" in sec.keys else []
    bad = [n for n in gens + quasi if n in ("d", "dinv") or not re.match(r"^[A-Za-z_]\w*$", n)]
    if bad:
        raise ParseError("invalid generator name %r" % bad[0], sec.keys["generators"][1], 1)
    for k in sec.keys:
        if k not in ("generators", "quasiconstants"):
            raise ParseError("unknown key %r in [algebra]" % k, sec.keys[k][1], 1)
    return Algebra(gens, quasi)


def _neg_adjoint(v, K):
    if not v.is_weakly_nonlocal():
        return OpValue(v.algebra, trunc=-adjoint_scalar(v.trunc, K))
    return OpValue(v.algebra, -adjoint_scalar(v.local),
                   [(adjoint_scalar(Y), adjoint_scalar(X)) for X, Y in v.sandwiches])


def _matrix_entries(sec, letter, alg, size):
    out = {}
    lines = {}
    for (lt, i, j), (text, line, col) in sec.entries.items():
        if lt != letter:
            continue
        if j is None or not (1 <= i <= size and 1 <= j <= size):
            raise ParseError("index out of range for %s[%s][%s]" % (lt, i, j), line, 1)
        out[(i - 1, j - 1)] = parse_operator(text, alg, line, col)
        lines[(i - 1, j - 1)] = line
    return out, lines


def _check_letters(sec, allowed):
    for (lt, i, j), (_, line, _) in sec.entries.items():
        if lt not in allowed:
            raise ParseError("unexpected entry %s[..] in [%s %s]" % (lt, sec.kind, sec.name),
                             line, 1)


def _parse_structure(sec, alg, K):
    _check_letters(sec, ("H",))
    for k in sec.keys:
        if k != "fraction":
            raise ParseError("unknown key %r in structure" % k, sec.keys[k][1], 1)
    ell = alg.ell
    entries, lines = _matrix_entries(sec, "H", alg, ell)
    for (i, j) in list(entries):
        if (j, i) not in entries:
            entries[(j, i)] = _neg_adjoint(entries[(i, j)], K)
            lines[(j, i)] = lines[(i, j)]
    wnl, mat = assemble(entries, alg, (ell, ell))
    if wnl is not None:
        H = wnl.to_matrix(K)
        skew = -wnl.adjoint()
        diff = wnl.local.first_difference(-adjoint(wnl.local))
        if diff is None and wnl.terms:
            diff = H.first_difference(skew.to_matrix(K), K)
    else:
        H = mat
        diff = H.first_difference(-adjoint(H, K), K - 2)
    if diff is not None:
        i, j = diff[0], diff[1]
        raise NotSkewadjoint("structure %s is not skewadjoint at entry (%d,%d)"
                             % (sec.name, i + 1, j + 1), lines.get((i, j), sec.line))
    return PVAStructure(sec.name, None if wnl is not None else H, wnl=wnl, depth=K)


def _parse_matrix(sec, alg):
    _check_letters(sec, ("H",))
    if sec.keys:
        k = next(iter(sec.keys))
        raise ParseError("unknown key %r in matrix" % k, sec.keys[k][1], 1)
    entries, _ = _matrix_entries(sec, "H", alg, alg.ell)
    return _local_matrix(entries, alg, alg.ell, sec)


def _parse_constraints(sec, alg):
    _check_letters(sec, ("theta",))
    idx = sorted(i for (_, i, _) in sec.entries)
    if idx != list(range(1, len(idx) + 1)):
        raise ParseError("constraints must be theta[1..m]", sec.line, 1)
    thetas = []
    for i in idx:
        text, line, col = sec.entries[("theta", i, None)]
        f = parse_function(text, alg, line, col)
        if not isinstance(f, DiffPoly):
            raise ParseError("constraints must be polynomial", line, col)
        thetas.append(f)
    return ConstraintSet(thetas, alg, name=sec.name)


def _parse_fraction(sec, alg, model, K):
    _check_letters(sec, ("A", "B", "M"))
    for k in sec.keys:
        if k not in ("size", "over", "base"):
            raise ParseError("unknown key %r in fraction" % k, sec.keys[k][1], 1)
    size = int(sec.keys["size"][0]) if "size" in sec.keys else alg.ell
    ctx = None
    falg = alg
    if "over" in sec.keys:
        cname, line, col = sec.keys["over"]
        if cname not in model.constraint_sets:
            raise UnknownSymbol("no constraint set named %r" % cname, line, col)
        ctx = model.constraint_sets[cname].context()
        falg = ctx.quotient
    A, _ = _matrix_entries(sec, "A", falg, size)
    B, _ = _matrix_entries(sec, "B", falg, size)
    M, _ = _matrix_entries(sec, "M", falg, size)
    Bm = _local_matrix(B, falg, size, sec)
    if "base" in sec.keys:
        if A:
            raise ParseError("give either A entries or base with M entries", sec.line, 1)
        sname, line, col = sec.keys["base"]
        if sname in model.matrices:
            base = model.matrices[sname]
        elif sname in model.structures:
            S = model.structures[sname]
            if not S.is_local():
                raise ParseError("fraction base must be a local structure", line, col)
            base = S.H
        else:
            raise UnknownSymbol("no structure or matrix named %r" % sname, line, col)
        top = list(range(size))
        base = base.submatrix(top, top)
        if ctx is not None:
            base = quotient_project(base, ctx)
        Am = compose(base, Bm) + _local_matrix(M, falg, size, sec)
    else:
        if M:
            raise ParseError("M entries need a base structure", sec.line, 1)
        Am = _local_matrix(A, falg, size, sec)
    return FractionPair(Am, Bm, name=sec.name)


def _local_matrix(entries, alg, size, sec):
    rows = [[PseudoOp.zero(alg) for _ in range(size)] for _ in range(size)]
    for (i, j), v in entries.items():
        if v.sandwiches or not v.is_weakly_nonlocal():
            raise ParseError("fraction entries must be differential operators", sec.line, 1)
        rows[i][j] = v.local
    return MatrixOp(rows, alg)


def parse_model(source, config=None):
    """Parse model text (or a path, or the built-in name 'sl3min') into a ModelFile."""
    cfg = config or RunConfig.from_env()
    text = _resolve_source(source)
    K = cfg.depth_d
    set_fallback_depth(K)
    sections = _split_sections(text)
    algs = [s for s in sections if s.kind == "algebra"]
    if len(algs) != 1:
        raise ParseError("exactly one [algebra] section is required", 1, 1)
    alg = _parse_algebra(algs[0])
    model = ModelFile(alg)
    seen = set()
    for sec in sections:
        if sec.kind == "algebra":
            continue
        if sec.name in seen:
            raise ParseError("duplicate section name %r" % sec.name, sec.line, 1)
        seen.add(sec.name)
    for sec in sections:
        if sec.kind == "structure":
            model.structures[sec.name] = _parse_structure(sec, alg, K)
        elif sec.kind == "constraints":
            model.constraint_sets[sec.name] = _parse_constraints(sec, alg)
        elif sec.kind == "matrix":
            model.matrices[sec.name] = _parse_matrix(sec, alg)
    for sec in sections:
        if sec.kind == "fraction":
            model.fraction_pairs[sec.name] = _parse_fraction(sec, alg, model, K)
    for sec in sections:
        if sec.kind == "structure" and "fraction" in sec.keys:
            fname, line, col = sec.keys["fraction"]
            if fname not in model.fraction_pairs:
                raise UnknownSymbol("no fraction pair named %r" % fname, line, col)
            model.structures[sec.name].frac = model.fraction_pairs[fname]
    return model


def _resolve_source(source):
    if source == "sl3min":
        return SL3MIN
    if source == "sl3red":
        return SL3RED
    if "\n" not in source and os.path.exists(source):
        with open(source) as fh:
            return fh.read()
    if "\n" not in source and not source.lstrip().startswith("["):
        raise FileNotFoundError("no model file %r" % source)
    return source


# ---------------------------------------------------------------------------
# emission


def emit_algebra(alg):
    out = ["[algebra]", "generators = " + ", ".join(alg.names)]
    if alg.quasiconstants:
        out.append("quasiconstants = " + ", ".join(alg.quasiconstants))
    return "\n".join(out)


def emit_structure(name, W):
    """A [structure] section for a WeaklyNonlocal (or differential MatrixOp)."""
    if isinstance(W, MatrixOp):
        W = WeaklyNonlocal(W)
    r, c = W.shape
    out = ["[structure %s]" % name]
    for i in range(r):
        for j in range(c):
            text = format_wnl_entry(W, i, j)
            if text != "0":
                out.append("H[%d][%d] = %s" % (i + 1, j + 1, text))
    return "\n".join(out)


def emit_model(alg, structures):
    """A full model document for named weakly non-local structures on alg."""
    parts = [emit_algebra(alg)]
    for name, W in structures:
        parts.append(emit_structure(name, W))
    return "\n\n".join(parts) + "\n"


SL3MIN = """\
# W-algebra of sl3 at the minimal nilpotent, generators L, psi_p, psi_m, phi
[algebra]
generators = L, psi_p, psi_m, phi

[structure H0]
H[1][1] = -2*d
H[2][3] = -1

[structure H1]
H[1][1] = d*L + L*d - 1/2*d^3
H[1][2] = 1/2*d*psi_p + psi_p*d
H[1][3] = 1/2*d*psi_m + psi_m*d
H[1][4] = phi*d
H[2][1] = d*psi_p + 1/2*psi_p*d
H[2][3] = -1/2*(d*phi + phi*d) - 1/3*phi^2 + L - d^2
H[2][4] = -3*psi_p
H[3][1] = d*psi_m + 1/2*psi_m*d
H[3][2] = -1/2*(d*phi + phi*d) + 1/3*phi^2 - L + d^2
H[3][4] = 3*psi_m
H[4][4] = 6*d

[constraints phi]
theta[1] = phi

# A1^D = A1 + M o N^{-1}
[fraction AD1]
size = 3
base = H1
M[1][3] = phi*d*psi_m^2
M[2][3] = -3*psi_p*psi_m^2
M[3][3] = 3*psi_m^3
B[1][1] = psi_p^2
B[2][1] = -1/3*(psi_p*d + 2*psi_p')*phi
B[2][2] = psi_m
B[3][2] = psi_p
B[3][3] = 2*(psi_m*d + 2*psi_m')

# H1^D = A1bar + Mbar o Nbar^{-1} on the quotient by phi
[fraction HD1]
size = 3
base = H1
over = phi
M[2][3] = -3*psi_p*psi_m^2
M[3][3] = 3*psi_m^3
B[1][1] = psi_p^2
B[2][2] = psi_m
B[3][2] = psi_p
B[3][3] = 2*(psi_m*d + 2*psi_m')
"""


SL3RED = """\
# reduced sl3 structures on the quotient by phi, generators L, psi_p, psi_m
[algebra]
generators = L, psi_p, psi_m

[structure H0C]
H[1][1] = -2*d
H[2][3] = -1

[matrix A1bar]
H[1][1] = d*L + L*d - 1/2*d^3
H[1][2] = 1/2*d*psi_p + psi_p*d
H[1][3] = 1/2*d*psi_m + psi_m*d
H[2][1] = d*psi_p + 1/2*psi_p*d
H[2][3] = L - d^2
H[3][1] = d*psi_m + 1/2*psi_m*d
H[3][2] = -L + d^2

[structure H1D]
H[1][1] = d*L + L*d - 1/2*d^3
H[1][2] = 1/2*d*psi_p + psi_p*d
H[1][3] = 1/2*d*psi_m + psi_m*d
H[2][1] = d*psi_p + 1/2*psi_p*d
H[2][2] = 3/2*psi_p*dinv*psi_p
H[2][3] = L - d^2 - 3/2*psi_p*dinv*psi_m
H[3][1] = d*psi_m + 1/2*psi_m*d
H[3][2] = -L + d^2 - 3/2*psi_m*dinv*psi_p
H[3][3] = 3/2*psi_m*dinv*psi_m
fraction = HD1

# H1D = A1bar + Mbar o Nbar^{-1}
[fraction HD1]
base = A1bar
M[2][3] = -3*psi_p*psi_m^2
M[3][3] = 3*psi_m^3
B[1][1] = psi_p^2
B[2][2] = psi_m
B[3][2] = psi_p
B[3][3] = 2*(psi_m*d + 2*psi_m')
"""


def sl3min(config=None):
    return parse_model(SL3MIN, config)


def sl3red(config=None):
    return parse_model(SL3RED, config)


__all__ = [
    "ModelFile", "NotSkewadjoint", "parse_model", "emit_structure", "emit_model",
    "emit_algebra", "SL3MIN", "SL3RED", "sl3min", "sl3red",
]
