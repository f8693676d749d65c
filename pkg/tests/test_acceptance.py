"""Acceptance suite for the sl3 minimal nilpotent example.

Each test prints one line "CRITERION n: PASS|FAIL detail" and the lines are
repeated in the terminal summary.  Run standalone with
    python3 tests/test_acceptance.py
"""

import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from pvadirac.config import RunConfig
from pvadirac.diffring import densities_equal_mod_d, quotient_project, variational_derivative
from pvadirac.dirac import NotInvertible, constraint_matrix, dirac_modify, dirac_reduce
from pvadirac.hierarchy import check_associated, leading_symbol, run_hierarchy
from pvadirac.model import sl3min, sl3red
from pvadirac.parse import parse_function
from pvadirac.psdo import (
    MatrixOp, PseudoOp, adjoint, invert, is_skewadjoint, verify_fractional, wnl_sandwich,
)
from pvadirac.pva import PVAStructure, check_compatibility, check_jacobi
from pvadirac.sl3 import G0, G1, P0, P1, PBAR1

# pinned tolerances
DEPTH_D = 8
JACOBI_DEPTHS = (6, 6)
AMBIENT_TRIPLES = 64
REDUCED_TRIPLES = 27
BUDGET_STRUCTURES = 60.0
BUDGET_REDUCED_JACOBI = 300.0
MIN_PROPERTY_CASES = 100

RESULTS = {}
HERE = os.path.dirname(os.path.abspath(__file__))


def record(n, ok, detail):
    line = "CRITERION %d: %s %s" % (n, "PASS" if ok else "FAIL", detail)
    RESULTS[n] = line
    print(line)
    return ok


@pytest.fixture(scope="module")
def cfg():
    return RunConfig(depth_d=DEPTH_D, depth_lambda=JACOBI_DEPTHS[0], depth_mu=JACOBI_DEPTHS[1])


@pytest.fixture(scope="module")
def model(cfg):
    return sl3min(cfg)


@pytest.fixture(scope="module")
def expected(cfg):
    return sl3red(cfg)


def reduce_at(model, depth):
    return dirac_reduce(model.structure("H1"), model.constraints("phi"), depth,
                        companion=model.structure("H0"))


@pytest.fixture(scope="module")
def reduction(model):
    return reduce_at(model, DEPTH_D)


@pytest.fixture(scope="module")
def reduced_structures(model, reduction):
    HC = PVAStructure("H0C", reduction.H_C)
    HD = reduction.reduced("H1D")
    HD.frac = model.fraction("HD1")
    return HC, HD


def _vec(texts, alg):
    return [parse_function(t, alg) for t in texts]


def _jacobi_ok(S, depths, count):
    rep = check_jacobi(S, depths)
    return rep.passed and len(rep.lines) == count, rep


def test_criterion_1_structures(model):
    t0 = time.perf_counter()
    H0, H1 = model.structure("H0"), model.structure("H1")
    skew = is_skewadjoint(H0.H) and is_skewadjoint(H1.H)
    j0, r0 = _jacobi_ok(H0, JACOBI_DEPTHS, AMBIENT_TRIPLES)
    j1, r1 = _jacobi_ok(H1, JACOBI_DEPTHS, AMBIENT_TRIPLES)
    comp = check_compatibility(H0, H1, JACOBI_DEPTHS)
    elapsed = time.perf_counter() - t0
    ok = skew and j0 and j1 and comp.passed and elapsed < BUDGET_STRUCTURES
    assert record(1, ok, "skew=%s jacobi H0 %d/%d H1 %d/%d compat=%s in %.1fs (budget %.0fs)"
                  % (skew, sum(l[1] for l in r0.lines), AMBIENT_TRIPLES,
                     sum(l[1] for l in r1.lines), AMBIENT_TRIPLES, comp.passed,
                     elapsed, BUDGET_STRUCTURES))


def test_criterion_2_constraint_matrix(model):
    alg = model.algebra
    phi = model.constraints("phi")
    C1 = constraint_matrix(model.structure("H1"), phi, DEPTH_D)
    C0 = constraint_matrix(model.structure("H0"), phi, DEPTH_D)
    six_d = MatrixOp([[PseudoOp(alg, {1: alg.const(6)})]], alg)
    raised = False
    try:
        dirac_modify(model.structure("H0"), phi, DEPTH_D)
    except NotInvertible:
        raised = True
    ok = C1.equals(six_d) and C0.rows[0][0].is_zero() and raised
    assert record(2, ok, "C(H1)=%s C(H0)=%s NotInvertible=%s"
                  % (C1.rows[0][0], C0.rows[0][0], raised))


def _central(res, model, depth):
    D = model.constraints("phi").D_theta
    W = res.H_tilde_wnl
    ident = MatrixOp.identity(model.algebra, 4)
    left = wnl_sandwich(D, W, ident).to_matrix(depth)
    right = wnl_sandwich(ident, W, adjoint(D)).to_matrix(depth)
    return all(e.is_zero() for M in (left, right) for row in M.rows for e in row)


def test_criterion_3_centrality(model, reduction):
    ok = _central(reduction, model, DEPTH_D)
    assert record(3, ok, "D o H~ = 0 and H~ o D* = 0 entrywise at depth %d" % DEPTH_D)


def test_criterion_4_reduced_structures(reduction, expected):
    alg = expected.algebra
    L = alg.gen(0)
    d = PseudoOp.d(alg)
    zero = PseudoOp.zero(alg)
    one = PseudoOp.one(alg)
    H0C = MatrixOp([[d.scale(-2), zero, zero], [zero, zero, -one], [zero, one, zero]], alg)
    hc = reduction.H_C.equals(H0C)
    hd = reduction.H_D_wnl.equals(expected.structure("H1D").wnl, DEPTH_D)
    # spot-check two entries against the series (lambda + d)^{-1} expanded by hand
    entry = reduction.H_D.rows[2][1]
    psp, psm = alg.gen(1), alg.gen(2)
    tail = {-1 - k: (psm * alg.gen(1, k)).scale(Fraction(-3, 2) * (-1) ** k)
            for k in range(DEPTH_D)}
    want = PseudoOp(alg, tail, DEPTH_D) + PseudoOp(alg, {0: -L, 2: alg.one()})
    spot = entry.equals(want, DEPTH_D)
    tail22 = {-1 - k: (psp * alg.gen(1, k)).scale(Fraction(3, 2) * (-1) ** k)
              for k in range(DEPTH_D)}
    spot = spot and reduction.H_D.rows[1][1].equals(PseudoOp(alg, tail22, DEPTH_D), DEPTH_D)
    ok = hc and hd and spot
    assert record(4, ok, "H0^C exact=%s H1^D depth %d=%s entry spot-checks=%s"
                  % (hc, DEPTH_D, hd, spot))


def test_criterion_5_fractions(model, reduction):
    a = verify_fractional(model.fraction("AD1"), reduction.A_D, DEPTH_D)
    b = verify_fractional(model.fraction("HD1"), reduction.H_D, DEPTH_D)
    try:
        invert(model.fraction("HD1").B, DEPTH_D)
        nondeg = True
    except Exception:
        nondeg = False
    ok = a.ok and b.ok and nondeg
    assert record(5, ok, "(M,N): %s; (Mbar,Nbar): %s; Nbar invertible=%s" % (a, b, nondeg))


def test_criterion_6_reduced_jacobi(reduced_structures):
    t0 = time.perf_counter()
    HC, HD = reduced_structures
    counts = []
    ok = True
    for S in (HC, HD, HC + HD):
        good, rep = _jacobi_ok(S, JACOBI_DEPTHS, REDUCED_TRIPLES)
        ok = ok and good
        counts.append("%s %d/%d" % (S.name, sum(l[1] for l in rep.lines), REDUCED_TRIPLES))
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < BUDGET_REDUCED_JACOBI
    assert record(6, ok, "%s in %.1fs (budget %.0fs)"
                  % (", ".join(counts), elapsed, BUDGET_REDUCED_JACOBI))


@pytest.fixture(scope="module")
def ambient_run(model):
    return run_hierarchy(model.structure("H0"), model.structure("H1"),
                         parse_function(G0, model.algebra), 2)


@pytest.fixture(scope="module")
def reduced_run(reduced_structures):
    HC, HD = reduced_structures
    return run_hierarchy(HC, HD, HD.algebra.gen(0), 3)


def test_criterion_7_hierarchy(model, ambient_run, reduced_run, reduced_structures):
    alg = model.algebra
    p0 = ambient_run.flows[0] == _vec(P0, alg)
    p1 = ambient_run.flows[1] == _vec(P1, alg)
    g1 = densities_equal_mod_d(ambient_run.densities[1], parse_function(G1, alg))
    q = reduced_structures[1].algebra
    pb = reduced_run.flows[1] == _vec(PBAR1, q)
    ok = p0 and p1 and g1 and pb
    assert record(7, ok, "P0=%s P1=%s g1 mod d=%s reduced t1 flow=%s" % (p0, p1, g1, pb))


def test_criterion_8_associations(model, ambient_run, reduced_structures):
    # Lenard-Magri indexing: h_{n-1} <-> H1 P_n and h_n <-> H0 P_n.  With the seed g_0 in
    # the kernel direction of H0 this gives P_0 = H0 delta g_0 and P_{n+1} = the t_n flow.
    H0, H1 = model.structure("H0"), model.structure("H1")
    HD = reduced_structures[1]
    ctx = model.constraints("phi").context()
    g = ambient_run.densities
    P = [H0.H.apply(variational_derivative(g[0]))] + ambient_run.flows

    def bar(x):
        return quotient_project(x, ctx)

    cases = [("(H0, g0, P0)", H0, g[0], P[0]),
             ("(H1, g0, P1)", H1, g[0], P[1]),
             ("(H1^D, gbar0, (Pbar1)_1)", HD, bar(g[0]), bar(P[1][:3])),
             ("(H0, g1, P1)", H0, g[1], P[1]),
             ("(H1, g1, P2)", H1, g[1], P[2]),
             ("(H1^D, gbar1, (Pbar2)_1)", HD, bar(g[1]), bar(P[2][:3]))]
    out = []
    ok = True
    for label, S, h, Pn in cases:
        try:
            a = check_associated(S, h, Pn)
            out.append("%s F=(%s)" % (label, ", ".join(map(str, a.F))))
        except Exception as exc:
            ok = False
            out.append("%s %s: %s" % (label, type(exc).__name__, exc))
    assert record(8, ok, "; ".join(out))


def test_criterion_9_leading_symbols(reduced_run):
    parts = []
    ok = True
    for n, P in enumerate(reduced_run.flows[:3]):
        syms = [leading_symbol(P, i) for i in range(3)]
        orders = [s[0] if s else None for s in syms]
        good = orders == [2 * n + 1] * 3 and abs(syms[0][1]) == Fraction(1, 4 ** n)
        ok = ok and good
        sign = "+" if syms[0][1] > 0 else "-"
        parts.append("n=%d orders %s L-coeff %s (sign %s)" % (n, orders, syms[0][1], sign))
    assert record(9, ok, "; ".join(parts))


def test_criterion_10_properties_and_depth(model):
    cmd = [sys.executable, "-m", "pytest", os.path.join(HERE, "test_properties.py"), "-q",
           "-p", "no:cacheprovider", "--hypothesis-show-statistics"]
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=os.path.dirname(HERE))
    counts = [int(l.split()[1]) for l in proc.stdout.splitlines()
              if "passing examples" in l]
    props = proc.returncode == 0 and counts and min(counts) >= MIN_PROPERTY_CASES
    # every depth-dependent verdict above, re-run at K + 2
    K2 = DEPTH_D + 2
    res = reduce_at(model, K2)
    expected = sl3red(RunConfig(depth_d=K2))
    deep = (res.report.passed and _central(res, model, K2)
            and res.H_D_wnl.equals(expected.structure("H1D").wnl, K2)
            and verify_fractional(model.fraction("AD1"), res.A_D, K2).ok
            and verify_fractional(model.fraction("HD1"), res.H_D, K2).ok)
    deep_depths = (JACOBI_DEPTHS[0] + 2, JACOBI_DEPTHS[1] + 2)
    HC = PVAStructure("H0C", res.H_C)
    HD = res.reduced("H1D")
    for S in (model.structure("H1"), HD, HC + HD):
        deep = deep and check_jacobi(S, deep_depths).passed
    ok = bool(props) and deep
    assert record(10, ok, "property tests=%d, min cases=%s; depth K+2 re-run agrees=%s"
                  % (len(counts), min(counts) if counts else None, deep))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
