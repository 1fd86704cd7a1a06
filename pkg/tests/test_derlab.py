import itertools
import random

import pytest

from contactk.contact import StructureConstantAlgebra, jacobi_check
from contactk.derlab import (
    BilinearTable,
    SolveOptions,
    biderivation_space,
    check_biderivation,
    first_slot_defect,
    inner_biderivation,
    make_abelian,
    make_heisenberg,
    make_sl2,
    make_super_heisenberg,
    oracle_corpus,
    project_inner,
    second_slot_defect,
    spans_equal,
    superderivation_space,
    verify_theorem,
)
from contactk.errors import ResourceLimitError


def test_corpus_satisfies_jacobi_exhaustively():
    for alg in oracle_corpus():
        rep = jacobi_check(alg, strategy="exhaustive")
        assert rep["verdict"] == "pass", alg.name


def test_jacobi_check_flags_corruption():
    # scale one structure constant of sl2: Jacobi must fail with a witness
    sl2 = make_sl2()
    bad = StructureConstantAlgebra(
        "sl2-corrupt", 5, sl2.parity, sl2.degree, sl2.weight,
        {(0, 1): ((0, 4),), (0, 2): ((1, 1),), (1, 2): ((2, 3),)},
    )
    rep = jacobi_check(bad, strategy="exhaustive")
    assert rep["verdict"] == "fail"
    assert rep["jacobi"]["witness"] is not None


def test_superderivation_dims():
    assert len(superderivation_space(make_abelian(), 0)) == 4
    assert len(superderivation_space(make_sl2(), 0)) == 3
    assert len(superderivation_space(make_heisenberg(), 0)) == 6


def test_superderivation_cap():
    with pytest.raises(ResourceLimitError):
        superderivation_space(make_sl2(), 0, unknown_cap=2)


def test_inner_biderivation_passes_checks():
    sl2 = make_sl2()
    for lam in range(5):
        phi = inner_biderivation(sl2, lam)
        rep = check_biderivation(sl2, phi, strategy="exhaustive", simple=True)
        assert rep["verdict"] == "pass", (lam, rep)


def test_project_inner_fixed_points_exhaustive():
    sl2 = make_sl2()
    for lam in range(5):
        got, residual = project_inner(sl2, inner_biderivation(sl2, lam))
        assert got == lam
        assert residual.is_zero()


def test_project_inner_of_zero_table():
    sl2 = make_sl2()
    lam, residual = project_inner(sl2, BilinearTable(sl2, 0))
    assert lam == 0 and residual.is_zero()


def test_project_inner_reports_nonzero_residual():
    # a table vanishing on the first bracket-support position but nonzero
    # elsewhere projects to lambda 0 with a nonzero residual
    heis = make_heisenberg()
    phi = BilinearTable(heis, 0)
    phi.set_entry(0, 2, 2, 1)
    lam, residual = project_inner(heis, phi)
    assert lam == 0
    assert not residual.is_zero()


def test_biderivation_full_dims():
    assert biderivation_space(make_abelian(), SolveOptions(mode="full")).dimension == 2
    assert biderivation_space(make_abelian(), SolveOptions(mode="full", z2_degree=1)).dimension == 0
    res = biderivation_space(make_sl2(), SolveOptions(mode="full"))
    assert res.dimension == 1
    lam, residual = project_inner(make_sl2(), res.tables[0])
    assert lam != 0 and residual.is_zero()


def test_biderivation_oracle_equivalence_full_vs_blocked():
    for alg in oracle_corpus():
        for g in (0, 1):
            full = biderivation_space(alg, SolveOptions(mode="full", z2_degree=g))
            blocked = biderivation_space(alg, SolveOptions(mode="blocked", z2_degree=g))
            assert full.dimension == blocked.dimension, (alg.name, g)
            assert spans_equal(alg, g, full.tables, blocked.tables), (alg.name, g)


def test_blocked_tables_pass_both_identities_exhaustively():
    for alg in oracle_corpus():
        for g in (0, 1):
            res = biderivation_space(alg, SolveOptions(mode="blocked", z2_degree=g))
            for t in res.tables:
                rep = check_biderivation(alg, t, strategy="exhaustive")
                assert rep["verdict"] == "pass", (alg.name, g)


def test_random_skew_table_fails_derivation_identities():
    sl2 = make_sl2()
    rng = random.Random(7)
    found_invalid = False
    for _ in range(20):
        phi = BilinearTable(sl2, 0)
        for i in range(3):
            for j in range(i, 3):
                if i == j:
                    continue
                for k in range(3):
                    phi.set_entry(i, j, k, rng.randrange(5))
        if phi.is_zero():
            continue
        lam, residual = project_inner(sl2, phi)
        if residual.is_zero():
            continue  # accidentally inner
        found_invalid = True
        bad = any(
            second_slot_defect(phi, a, b, c) or first_slot_defect(phi, a, b, c)
            for a, b, c in itertools.product(range(3), repeat=3)
        )
        assert bad
    assert found_invalid


def test_super_heisenberg_odd_sector_nontrivial():
    sh = make_super_heisenberg()
    res0 = biderivation_space(sh, SolveOptions(mode="full", z2_degree=0))
    res1 = biderivation_space(sh, SolveOptions(mode="full", z2_degree=1))
    assert res0.dimension == 3
    assert res1.dimension == 2
    for t in res0.tables + res1.tables:
        rep = check_biderivation(sh, t, strategy="exhaustive")
        assert rep["verdict"] == "pass"


def test_verify_theorem_sl2():
    rep = verify_theorem(make_sl2())
    assert rep["verdict"] == "verified"
    assert rep["dim_bder_even"] == 1
    assert rep["dim_bder_odd"] == 0
    assert rep["residual_zero"]


def test_verify_theorem_abelian_negative_control():
    rep = verify_theorem(make_abelian())
    assert rep["verdict"] == "not inner-only"
    assert rep["dim_bder_even"] == 2
