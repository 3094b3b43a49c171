"""Acceptance criteria 1-10, each printing one pass/fail line."""
import time
from itertools import combinations
from math import comb

import numpy as np
import pytest

from phigamma import herr, homalg as ha, iwasawa as iw, pgmod
from phigamma.errors import FamilyConstraintViolated
from phigamma.homalg import AbMorphism, ChainMap, CochainComplex, FinAbGroup
from phigamma.oracles import BRUTE_FORCE_LIMIT, brute_force_cohomology

GRID = [(2, 1, 2, 2, 5), (2, 2, 2, 1, 5), (3, 1, 2, 2, 4), (3, 2, 1, 2, 4), (5, 1, 1, 1, 6)]


def factors(H):
    return [h.invariant_factors for h in H]


def report(capsys, k, title, ok, t0, detail=""):
    line = f"CRITERION {k:>2} {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.2f}s) {title}"
    with capsys.disabled():
        print("\n" + line + (f" [{detail}]" if detail and not ok else ""))
    assert ok, detail or title


def family_corpus():
    """Modules for the cross-check, drawn from four families across the grid."""
    out = []
    for params in GRID:
        gp = iw.validate_params(*params)
        cands = [("regular", 0), ("cyclic_quotient", 0), ("cyclic_quotient", 1),
                 ("gamma_character(1)", 0), ("gamma_character(2)", 0), ("beta_unipotent", 0)]
        for name, seed in cands:
            try:
                out.append((params, name, seed, pgmod.builtin_family(gp, name, seed)))
            except FamilyConstraintViolated:
                pass
    return out


def test_criterion_01_relations(capsys):
    t0 = time.perf_counter()
    failures = [(p, c.name) for p in GRID
                for c in iw.check_relations(iw.validate_params(*p), raise_on_failure=False) if not c.passed]
    elapsed = time.perf_counter() - t0
    report(capsys, 1, "relations on the grid", not failures and elapsed < 10, t0, str(failures[:3]))


def test_criterion_02_d_squared(capsys):
    t0 = time.perf_counter()
    bad = [(p, c.witness) for p in GRID
           for c in herr.audit_d_squared(herr.build_c_lambda(iw.validate_params(*p)), raise_on_failure=False)
           if not c.passed]
    report(capsys, 2, "d^2 = 0 for C_Lambda", not bad and time.perf_counter() - t0 < 30, t0, str(bad[:3]))


def test_criterion_03_koszul_strands(capsys):
    t0 = time.perf_counter()
    bad = []
    for p, N in [(2, 2), (3, 2)]:
        for k in (1, 2, 3):
            for r in ha.graded_strand_audit(p, N, k, 6, raise_on_failure=False):
                expected = [()] * len(r.homology)
                if r.degree == 0:
                    expected[-1] = (N,)
                if factors(r.homology) != expected or not r.passed:
                    bad.append((p, N, k, r.degree))
    report(capsys, 3, "Koszul graded strands exact", not bad and time.perf_counter() - t0 < 30, t0, str(bad))


def test_criterion_04_trivial_module(capsys):
    t0 = time.perf_counter()
    bad = []
    for p in GRID:
        gp = iw.validate_params(*p)
        M = pgmod.trivial_module(gp)
        n = gp.n
        HG = ha.cohomology(herr.build_c_gamma(gp, M))
        HP = ha.cohomology(herr.build_c_phi_gamma(gp, M))
        if factors(HG) != [(1,) * comb(n + 1, i) for i in range(n + 2)]:
            bad.append((p, "C_gamma"))
        if factors(HP) != [(1,) * comb(n + 2, i) for i in range(n + 3)]:
            bad.append((p, "C_phi_gamma"))
        if any(not d.is_zero() for d in herr.build_c_gamma(gp, M).differentials):
            bad.append((p, "nonzero differential"))
    report(capsys, 4, "trivial mod-p dimensions", not bad and time.perf_counter() - t0 < 10, t0, str(bad))


def test_criterion_05_fixtures(capsys):
    t0 = time.perf_counter()
    levels = [p for p in GRID if p[1] <= 1] + [(3, 0, 2, 2, 4), (2, 0, 2, 2, 5), (5, 0, 1, 1, 6)]
    bad = []
    for p in levels:
        gp = iw.validate_params(*p)
        mods = [pgmod.regular_module(gp), pgmod.gamma_character(gp, 1, 1 + gp.p)]
        for M in mods:
            bad += [(p, c.name, c.witness) for c in herr.compare_fixtures(gp, M, raise_on_failure=False)
                    if not c.passed]
    report(capsys, 5, "fixtures n=0 and n=1 exact", not bad, t0, str(bad[:3]))


def test_criterion_06_construction_cross_check(capsys):
    t0 = time.perf_counter()
    corpus = family_corpus()
    bad = []
    for params, name, seed, M in corpus:
        gp = M.gp
        A = herr._Actions(M)
        if factors(ha.cohomology(herr.build_c_gamma(gp, M, A))) != \
                factors(ha.cohomology(herr.build_c_gamma_via_fiber(gp, M, A))):
            bad.append((params, name, seed))
    elapsed = time.perf_counter() - t0
    ok = not bad and len(corpus) >= 20 and elapsed < 120
    report(capsys, 6, f"direct = iterated-fiber on {len(corpus)} modules", ok, t0, str(bad))


def test_criterion_07_closed_form(capsys):
    t0 = time.perf_counter()
    gp = iw.validate_params(3, 1, 2, 2, 4)
    M = pgmod.gamma_character(gp, 1)
    worked = factors(ha.cohomology(herr.build_c_gamma(gp, M)))
    bad = [] if worked == [(1,), (2, 1), (2,)] else [("worked example", worked)]
    for p in GRID:
        g = iw.validate_params(*p)
        mods = [pgmod.gamma_character(g, k) for k in (0, 1, 2, -1)] + [pgmod.trivial_module(g, (g.N, 1))]
        for Mk in mods:
            if factors(ha.cohomology(herr.build_c_gamma(g, Mk))) != factors(herr.closed_form_beta_trivial(g, Mk)):
                bad.append(p)
    report(capsys, 7, "closed form on beta-trivial modules", not bad, t0, str(bad))


def test_criterion_08_structural_scalars(capsys):
    t0 = time.perf_counter()
    bad = []
    corpus = family_corpus()
    for params, name, seed, M in corpus:
        gp = M.gp
        A = herr._Actions(M)
        HG = ha.cohomology(herr.build_c_gamma(gp, M, A))
        PC = herr.build_c_phi_gamma(gp, M, "direct", A)
        HP = ha.cohomology(PC)
        if ha.euler_characteristic(HG) != 0:
            bad.append((params, name, "euler"))
        if len(HG) != gp.n + 2 or len(HP) != gp.n + 3 or len(PC.terms) != gp.n + 3:
            bad.append((params, name, "support"))
        if not all(c.passed for c in herr.rho_length_identity(gp, M, A)):
            bad.append((params, name, "length identity"))
    report(capsys, 8, f"euler, length identity, support on {len(corpus)} modules", not bad, t0, str(bad))


def test_criterion_09_level_projection(capsys):
    t0 = time.perf_counter()
    pairs = [((2, 1, 2, 2, 5), (2, 1, 1, 1, 5)), ((3, 1, 2, 2, 4), (3, 1, 1, 1, 4)),
             ((2, 2, 2, 2, 5), (2, 2, 1, 1, 5)), ((3, 2, 2, 2, 4), (3, 2, 1, 1, 4))]
    bad = []
    for hi_p, lo_p in pairs:
        hi, lo = iw.validate_params(*hi_p), iw.validate_params(*lo_p)
        pr = lambda r: iw.project_level(hi, lo, r)  # noqa: E731
        named = {}
        for i in range(1, hi.n + 1):
            named[f"omega_{i}"] = (iw.omega, (i,))
            named[f"W_{i}"] = (iw.big_w, (i,))
            named[f"u_{i}"] = (iw.u_unit, (i,))
            named[f"v_{i}"] = (iw.v_unit, (i,))
        for s in range(hi.n + 1):
            for S in combinations(range(1, hi.n + 1), s):
                named[f"tau_{S}"] = (iw.tau_s, (S,))
        for name, (fn, args) in named.items():
            if pr(fn(hi, *args)) != fn(lo, *args):
                bad.append((hi_p, name))
    report(capsys, 9, "project_level respects distinguished elements", not bad, t0, str(bad))


def _brute_corpus():
    """Deterministic corpus of complexes of total order at most 3^8."""
    rng = np.random.default_rng(2024)
    out = []

    def rand_endo(G):
        M = np.zeros((G.rank, G.rank), dtype=object)
        for r, er in enumerate(G.exponents):
            for c, ec in enumerate(G.exponents):
                M[r, c] = int(rng.integers(0, G.p**er)) * G.p ** max(er - ec, 0)
        return AbMorphism(G, G, M)

    for _ in range(80):
        p = int(rng.choice([2, 3]))
        k = int(rng.integers(1, 4))
        budget = 8 if p == 3 else 12          # p^budget <= 3^8
        fiber = k == 1 and rng.random() < 0.5
        L = budget // (2**k * (2 if fiber else 1))
        exps = []
        while len(exps) < 3:
            e = int(rng.integers(1, 3))
            if sum(exps) + e > L:
                break
            exps.append(e)
        G = FinAbGroup(p, tuple(exps or [1]))
        f = rand_endo(G)
        # polynomials in one endomorphism commute
        ops = [f, f @ f + f, f @ f @ f][:k]
        K = ha.koszul_cochain(G, ops)
        out.append(ha.mapping_fiber(ChainMap(K, K, [f, f])) if fiber else K)
    for p in [(3, 1, 1, 1, 4), (3, 1, 2, 1, 4), (2, 1, 1, 1, 5), (2, 2, 1, 1, 5), (3, 1, 2, 2, 4)]:
        gp = iw.validate_params(*p)
        for M in (pgmod.trivial_module(gp), pgmod.gamma_character(gp, 1, 1 + gp.p)):
            for C in (herr.build_c_gamma(gp, M), herr.build_c_phi_gamma(gp, M)):
                if C.total_order() <= BRUTE_FORCE_LIMIT:
                    out.append(C)
    return out


def test_criterion_10_brute_force(capsys):
    t0 = time.perf_counter()
    corpus = _brute_corpus()
    bad = [i for i, C in enumerate(corpus)
           if factors(brute_force_cohomology(C)) != factors(ha.cohomology(C))]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60 and all(C.total_order() <= BRUTE_FORCE_LIMIT for C in corpus)
    report(capsys, 10, f"SNF = enumeration on {len(corpus)} complexes", ok, t0, str(bad))
