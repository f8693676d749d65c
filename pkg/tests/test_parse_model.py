from fractions import Fraction

import pytest

from pvadirac.diffring import Algebra, make_frac
from pvadirac.model import NotSkewadjoint, emit_model, parse_model
from pvadirac.parse import ParseError, UnknownSymbol, parse_function, parse_operator
from pvadirac.psdo import MatrixOp, PseudoOp

A = Algebra(["u", "v"], quasiconstants=["c"])
u, v = A.gen(0), A.gen(1)


def test_function_grammar():
    assert parse_function("u'' + 2*u^2", A) == A.gen(0, 2) + (u * u).scale(2)
    assert parse_function("u^(3)", A) == A.gen(0, 3)
    assert parse_function("(u*v)'", A) == A.gen(0, 1) * v + u * A.gen(1, 1)
    assert parse_function("u/2 - v", A) == u.scale(Fraction(1, 2)) - v
    assert parse_function("u/v", A) == make_frac(u, v)
    assert parse_function("u^-1", A) == make_frac(A.one(), u)
    assert parse_function("-c*u", A) == -(A.quasi("c") * u)


def test_operator_grammar():
    assert parse_operator("d*u", A).pseudo(4).equals(PseudoOp(A, {1: u, 0: A.gen(0, 1)}))
    assert parse_operator("d^3 - u", A).pseudo(4).equals(PseudoOp(A, {3: A.one(), 0: -u}))
    w = parse_operator("u*dinv*u", A)
    assert w.is_weakly_nonlocal()
    assert w.pseudo(5).equals(PseudoOp(A, {-1 - k: (u * A.gen(0, k)).scale((-1) ** k)
                                           for k in range(5)}, 5), 5)
    assert parse_operator("d^-2", A).pseudo(4).equals(PseudoOp(A, {-2: A.one()}), 4)
    assert parse_operator("d*dinv", A).pseudo(4).equals(PseudoOp.one(A), 4)
    assert not parse_operator("dinv*u*dinv", A).is_weakly_nonlocal()


@pytest.mark.parametrize("text, col", [
    ("u + ", 5),
    ("u $ v", 3),
    ("u + w", 5),
    ("(u + v", 7),
])
def test_parse_errors_report_position(text, col):
    with pytest.raises(ParseError) as info:
        parse_function(text, A, line=3)
    assert info.value.line == 3
    assert info.value.col == col


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parse_function("w", A)
    with pytest.raises(ParseError):
        parse_function("d*u", A)


MODEL = """\
[algebra]
generators = u, v

[structure H]
H[1][1] = d
H[1][2] = u*d

[constraints t]
theta[1] = v + u'
"""


def test_mirror_entries_filled():
    m = parse_model(MODEL)
    H = m.structure("H").H
    # -(u d)^* = d o u = u d + u'
    assert H.rows[1][0].equals(PseudoOp(m.algebra, {1: m.algebra.gen(0),
                                                     0: m.algebra.gen(0, 1)}))
    assert m.constraints("t").thetas == [m.algebra.gen(1) + m.algebra.gen(0, 1)]


def test_not_skewadjoint_reports_line():
    text = "[algebra]\ngenerators = u\n\n[structure H]\nH[1][1] = d^2\n"
    with pytest.raises(NotSkewadjoint) as info:
        parse_model(text)
    assert info.value.line == 5


def test_model_errors():
    with pytest.raises(ParseError) as info:
        parse_model("[algebra]\ngenerators = u\n[structure H]\nH[1][1] = d +\n")
    assert info.value.line == 4
    with pytest.raises(ParseError):
        parse_model("[structure H]\nH[1][1] = d\n")
    with pytest.raises(ParseError):
        parse_model("[algebra]\ngenerators = u\n[structure H]\nH[2][1] = d\n")
    with pytest.raises(UnknownSymbol):
        parse_model(MODEL).structure("K")
    with pytest.raises(FileNotFoundError):
        parse_model("no_such_model.pva")


def test_round_trip_local_and_nonlocal(sl3_reduced_model):
    m = sl3_reduced_model
    for name in ("H0C", "H1D"):
        W = m.structure(name).wnl
        again = parse_model(emit_model(m.algebra, [(name, W)])).structure(name).wnl
        assert again.equals(W, 8)
        assert len(again.terms) == len(W.terms)


def test_model_from_path(tmp_path):
    path = tmp_path / "toy.pva"
    path.write_text(MODEL)
    assert set(parse_model(str(path)).structures) == {"H"}


def test_fraction_sections(sl3, sl3_reduced_model):
    pair = sl3.fraction("HD1")
    assert pair.A.shape == (3, 3) and tuple(pair.A.algebra.names) == ("L", "psi_p", "psi_m")
    red = sl3_reduced_model
    assert red.structure("H1D").frac is red.fraction("HD1")
    assert red.fraction("HD1").A.equals(pair.A)
    assert isinstance(red.matrices["A1bar"], MatrixOp)


def test_fraction_with_explicit_entries():
    text = MODEL + "\n[fraction F]\nsize = 1\nA[1][1] = 1\nB[1][1] = d\n"
    pair = parse_model(text).fraction("F")
    assert pair.B.rows[0][0].coeffs == {1: pair.B.algebra.one()}
    with pytest.raises(ParseError):
        parse_model(MODEL + "\n[fraction F]\nA[1][1] = dinv\nB[1][1] = 1\n")
