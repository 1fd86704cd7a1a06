import random

import numpy as np
import pytest

from contactk.contact import (
    build_contact_algebra,
    centralizer,
    contact_bracket,
    generation_closure,
    generators,
    graded_component,
    ideal_closure_spans,
    jacobi_check,
    weight_decomposition,
    weight_of,
    weight_space_predicates,
)
from contactk.errors import ParameterError, ResourceLimitError
from contactk.superspace import Element, Monomial


@pytest.fixture(scope="module")
def K():
    return build_contact_algebra(3, 2, (1, 1, 1), 5)


def E(space, mono):
    return Element.from_monomial(space, mono)


def test_bracket_examples(K):
    sp = K.space
    one = E(sp, sp.unit)
    xm = E(sp, sp.variable(3))
    assert contact_bracket(one, xm).terms == {sp.unit: 2}
    x1, x2 = E(sp, sp.variable(1)), E(sp, sp.variable(2))
    assert contact_bracket(x1, x2).terms == {sp.unit: 1}
    assert contact_bracket(x2, x1).terms == {sp.unit: 4}
    x1x2 = x1 * x2
    assert contact_bracket(x1x2, x1).terms == {sp.variable(1): 4}


def test_build_rejects_bad_shapes():
    with pytest.raises(ParameterError):
        build_contact_algebra(4, 2, (1, 1, 1, 1), 5)
    with pytest.raises(ParameterError):
        build_contact_algebra(3, 3, (1, 1, 1), 5)
    with pytest.raises(ParameterError):
        build_contact_algebra(3, 2, (1, 1, 1), 3)
    with pytest.raises(ResourceLimitError):
        build_contact_algebra(3, 2, (1, 1, 1), 5, dim_cap=100)


def test_build_dimension_and_derived_span(K):
    # dim of the ambient space is p^(sum heights) * 2^n = 500; the span of
    # all bracket values turns out to be everything at these parameters
    assert K.dim == 500
    assert len(K.basis) == 500


def test_table_entry_count_nonzero(K):
    assert sum(len(ent) for ent in K.table.values()) > 10_000


def test_weight_examples(K):
    sp = K.space
    assert weight_of(sp, sp.unit, K.torus_pairs) == (0, 0)
    assert weight_of(sp, sp.variable(1), K.torus_pairs) == (4, 0)
    assert weight_of(sp, Monomial((0, 0, 0), 0b11), K.torus_pairs) == (0, 0)


def test_weight_decomposition_partitions(K):
    blocks = weight_decomposition(K)
    assert sum(len(v) for v in blocks.values()) == K.dim
    assert len(blocks) <= 15
    # torus generators sit in the zero block
    zero = blocks[(0, 0)]
    for h in K.torus_idx:
        assert h in zero


def test_weight_space_predicates_all_match(K):
    rep = weight_space_predicates(K)
    assert rep["all_match"]
    assert rep["statement_1"]["checked"] == 500
    assert rep["statement_2"]["mismatches"] == 0
    assert rep["statement_3"]["mismatches"] == 0


def test_generators_count_and_membership(K):
    gens = generators(K)
    assert len(gens) == 15
    # n odd variables are there
    sp = K.space
    for j in (4, 5):
        assert K.index[sp.variable(j)] in gens
    assert len(set(gens)) == 15


def test_generation_closure_spans(K):
    spans, rounds = generation_closure(K, generators(K))
    assert spans
    assert rounds >= 1


def test_generation_closure_of_unit_does_not_span(K):
    spans, _ = generation_closure(K, [K.index[K.space.unit]])
    assert not spans


def test_generation_closure_full_basis_trivial(K):
    spans, rounds = generation_closure(K, list(range(K.dim)))
    assert spans and rounds == 0


def test_center_is_trivial(K):
    assert centralizer(K).shape[0] == 0


def test_centralizer_of_degree_minus_one_is_unit_line(K):
    comp = graded_component(K, -1)
    rows = np.zeros((len(comp), K.dim), dtype=np.int64)
    for r, i in enumerate(comp):
        rows[r, i] = 1
    cen = centralizer(K, s_rows=rows)
    assert cen.shape[0] == 1
    assert list(np.flatnonzero(cen[0])) == [K.index[K.space.unit]]


def test_centralizer_including_the_grading_element_is_zero(K):
    # <1, x_m> = 2, so extending the condition set from the degree -1
    # component to all variables x_i kills the unit line as well
    sp = K.space
    rows = np.zeros((5, K.dim), dtype=np.int64)
    for r, i in enumerate(range(1, 6)):
        rows[r, K.index[sp.variable(i)]] = 1
    assert centralizer(K, s_rows=rows).shape[0] == 0
    assert K.bracket_indices(K.index[sp.unit], K.index[sp.variable(3)]) == ((0, 2),)


def test_centralizer_of_zero_subspace_is_everything(K):
    cen = centralizer(K, s_rows=np.zeros((0, K.dim), dtype=np.int64))
    assert cen.shape[0] == K.dim


def test_graded_components(K):
    assert graded_component(K, -2) == [K.index[K.space.unit]]
    assert len(graded_component(K, -1)) == 4
    total = sum(len(graded_component(K, d)) for d in range(-2, 17))
    assert total == K.dim


def test_torus_abelian(K):
    for a in K.torus_idx:
        for b in K.torus_idx:
            assert K.bracket_indices(a, b) == ()


def test_table_additivity_invariants(K):
    # validated at construction; re-assert on a sample for visibility
    for (i, j), ent in list(K.table.items())[::97]:
        for k, _ in ent:
            assert K.parity[k] == (K.parity[i] + K.parity[j]) & 1
            assert K.degree[k] == K.degree[i] + K.degree[j]
            assert K.weight[k] == K.wt_add(K.weight[i], K.weight[j])


def test_jacobi_sampled_clean(K):
    rep = jacobi_check(K, strategy="sampled", samples=20_000, seed=11)
    assert rep["verdict"] == "pass"
    assert rep["antisymmetry"]["failures"] == 0


def test_jacobi_exhaustive_within_weight_blocks(K):
    from contactk.contact import jacobi_triple_defect

    blocks = weight_decomposition(K)
    total = 0
    for idxs in blocks.values():
        for a in idxs:
            for b in idxs:
                for c in idxs:
                    total += 1
                    assert not jacobi_triple_defect(K, a, b, c), (a, b, c)
    assert total == sum(len(v) ** 3 for v in blocks.values())


def test_ideal_closure_probes(K):
    rng = random.Random(5)
    for _ in range(3):
        assert ideal_closure_spans(K, rng.randrange(K.dim))


def test_eigen_equation_detects_corruption(K):
    # corrupting one torus bracket entry must trip the eigen-equation check
    import copy

    bad = copy.copy(K)
    bad.table = dict(K.table)
    h = K.torus_idx[0]
    for (i, j), ent in K.table.items():
        if i == h and ent:
            k, c = ent[0]
            bad.table[(i, j)] = ((k, (c + 1) % 5),) + ent[1:]
            break
    bad._ordered = None
    bad._tensor = None
    with pytest.raises(ParameterError):
        weight_decomposition(bad)
