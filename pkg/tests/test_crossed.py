import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslab.algebra import MatrixBlockAlgebra, expectation_axioms, operator_norm
from cslab.bimodule import bimodular_isometry
from cslab.crossed import (FiniteGroup, GroupAction, averaging_map, build_crossed_product, fourier, freeness_infimum,
                           galois_scan, is_replete, reconstruction_residual, relative_commutant, replete_bimodule,
                           simplicity_probe, subgroup_expectation, support, twisted_bimodule)
from cslab.fixtures import NAMED_ACTIONS, cyclic_translation, s3_translation, trivial_group_action, trivial_z2, z2_swap
from cslab.tolerances import InputDataError, PreconditionError, StructuralError

from oracles import center_dim, crossed_product_regular, span_dim

seeds = st.integers(0, 2 ** 32 - 1)
action_names = st.sampled_from(sorted(NAMED_ACTIONS))


def test_group_table_validation():
    with pytest.raises(StructuralError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(StructuralError):
        FiniteGroup([[0, 1, 2], [1, 2, 0], [2, 1, 0]])
    G = FiniteGroup.symmetric(3)
    assert G.order == 6
    assert all(G.mul[g, G.inv[g]] == G.e for g in range(6))
    assert len(G.subgroups()) == 6
    assert [len(s) for s in FiniteGroup.cyclic(4).subgroups()] == [1, 2, 4]


def test_cocycle_violation_names_the_pair():
    G = FiniteGroup.cyclic(2)
    A = MatrixBlockAlgebra([2])
    # alpha_1 = Ad(diag(1, i)) squares to Ad(diag(1, -1)) != id
    u = np.diag([1.0, 1j])
    with pytest.raises(InputDataError, match=r"\(g, h\) = \(1, 1\)"):
        GroupAction(G, A, [[0], [0]], [[np.eye(2)], [u]])


def test_build_examples():
    B = build_crossed_product(z2_swap())
    assert B.dim == 4
    rep = simplicity_probe(B)
    assert rep.is_simple and rep.block_sizes == [2]
    T = build_crossed_product(trivial_z2("C"))
    rep = simplicity_probe(T)
    assert T.dim == 2 and rep.center_dim == 2 and rep.block_sizes == [1, 1]
    A = MatrixBlockAlgebra([1, 2])
    E = build_crossed_product(trivial_group_action("C+M2"))
    assert E.dim == A.total_dim
    assert simplicity_probe(E).block_sizes == [1, 2]


def test_regular_model_matches_oracle():
    # the regular representation spans the same algebra as the independent permutation model
    B = build_crossed_product(z2_swap())
    ours = [x.regular() for x in B.basis()]
    oracle = crossed_product_regular([[0, 1], [1, 0]])
    assert span_dim(ours) == span_dim(oracle) == 4
    assert center_dim(ours) == center_dim(oracle) == 1


@settings(max_examples=20, deadline=None)
@given(action_names, seeds)
def test_multiplication_law(name, seed):
    B = build_crossed_product(NAMED_ACTIONS[name]())
    rng = np.random.default_rng(seed)
    x, y = B.random_element(rng), B.random_element(rng)
    assert np.abs((x * y).regular() - x.regular() @ y.regular()).max() < 1e-9
    g, h = (int(v) for v in rng.integers(B.group.order, size=2))
    a, b = B.algebra.random_element(rng), B.algebra.random_element(rng)
    lhs = B.u(g, a) * B.u(h, b)
    rhs = B.u(int(B.group.mul[g, h]), a * B.action(g, b))
    assert np.abs((lhs - rhs).vec()).max() < 1e-9
    ug = B.u(g)
    assert np.abs((ug * B.embed(a) * ug.adjoint() - B.embed(B.action(g, a))).vec()).max() < 1e-9


@pytest.mark.parametrize("name", sorted(NAMED_ACTIONS))
def test_expectation_axioms_for_every_fixture(name):
    B = build_crossed_product(NAMED_ACTIONS[name]())
    big = [x.regular() for x in B.basis()]
    sub = [B.embed(e).regular() for e in B.algebra.basis()]
    rep = expectation_axioms(lambda m: B.embed(B.expectation(m)).regular(), big, sub, samples=5)
    assert rep.ok and rep.faithful


def test_fourier_examples():
    B = build_crossed_product(z2_swap())
    a = B.algebra.diag([2.0, -1.0])
    res = fourier(B.embed(a))
    assert res.support == {B.group.e}
    assert res.coefficients[0].allclose(a)
    res = fourier(B.u(1))
    assert res.support == {1}
    assert res.coefficients[1].allclose(B.algebra.unit())
    x = B.random_element(np.random.default_rng(0))
    assert reconstruction_residual(x) <= 1e-12
    assert fourier(B.embed(B.algebra.zero())).support == frozenset()


@settings(max_examples=30, deadline=None)
@given(action_names, seeds)
def test_fourier_completeness_and_support_laws(name, seed):
    B = build_crossed_product(NAMED_ACTIONS[name]())
    rng = np.random.default_rng(seed)
    G = B.group

    def sparse():
        keep = rng.random(G.order) < 0.5
        coeffs = [B.algebra.random_element(rng) if k else B.algebra.zero() for k in keep]
        return B.element(coeffs)

    x, y = sparse(), sparse()
    assert reconstruction_residual(x) <= 1e-12 * (1 + x.norm())
    sx, sy = support(x), support(y)
    prods = {int(G.mul[g, h]) for g in sx for h in sy}
    assert support(x * y) <= prods
    assert support(x.adjoint()) == {int(G.inv[g]) for g in sx}
    for c in fourier(x).coefficients:
        assert operator_norm(c) <= x.norm() + 1e-9


def test_replete_examples():
    B = build_crossed_product(s3_translation())
    G = B.group
    Ye = replete_bimodule(B, {G.e})
    assert len(Ye) == B.algebra.total_dim and is_replete(B, Ye).is_replete
    Yall = replete_bimodule(B, set(range(G.order)))
    assert len(Yall) == B.dim
    a = B.algebra.diag(np.arange(1.0, 7.0))
    X = [B.u(1, a) + B.u(2, a)]
    rep = is_replete(B, X)
    assert rep.support == {1, 2} and not rep.is_replete
    assert rep.dim == 1 and rep.replete_dim == 2 * B.algebra.total_dim


@pytest.mark.parametrize("subset", [{0}, {0, 3}, {1, 2, 5}, set(range(6))])
def test_replete_round_trip(subset):
    B = build_crossed_product(s3_translation())
    rep = is_replete(B, replete_bimodule(B, subset))
    assert rep.support == subset and rep.is_replete


def test_galois_s3():
    B = build_crossed_product(s3_translation())
    rep = galois_scan(B, samples=3, seed=0)
    assert len(rep.nodes) == 6 and rep.ok
    assert [n.order for n in rep.nodes] == [1, 2, 2, 2, 3, 6]
    for n in rep.nodes:
        assert n.support == n.subgroup
        assert n.dim == n.order * B.algebra.total_dim
        assert n.compatibility_residual <= 1e-9


def test_galois_z2_and_z4_chain():
    rep = galois_scan(build_crossed_product(z2_swap()), samples=3)
    assert [n.order for n in rep.nodes] == [1, 2] and rep.ok
    assert rep.edges == [(0, 1)]
    B = build_crossed_product(cyclic_translation(4))
    rep = galois_scan(B, samples=3)
    assert [n.order for n in rep.nodes] == [1, 2, 4] and rep.ok
    assert rep.edges == [(0, 1), (1, 2)]
    # chain compatibility: E = E|_A o E_{A x| Z2} o E_B
    mid = subgroup_expectation(B, rep.nodes[1].subgroup)
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = B.random_element(rng)
        assert operator_norm(B.expectation(x) - B.expectation(mid(x))) < 1e-12


def test_galois_partial_flag():
    rep = galois_scan(build_crossed_product(s3_translation()), samples=1, max_generators=1)
    assert rep.partial and not rep.ok
    assert len(rep.nodes) == 5


def test_relative_commutant_z2_swap():
    B = build_crossed_product(z2_swap())
    rep = relative_commutant(B)
    # brute force: commutant of pi(A) inside the regular model of B
    oracle = 4 - np.linalg.matrix_rank(np.vstack([
        np.column_stack([(B.pi(a) @ x.regular() - x.regular() @ B.pi(a)).ravel() for x in B.basis()])
        for a in B.algebra.basis()]), tol=1e-9)
    assert rep.commutant_dim == oracle == 2
    assert rep.end_abelian
    assert rep.end_dim == 4


def test_relative_commutant_trivial_cases():
    rep = relative_commutant(build_crossed_product(trivial_z2()))
    assert rep.end_dim > 2 and not rep.matches_group_pattern
    rep = relative_commutant(build_crossed_product(trivial_group_action("C+M2")))
    assert rep.end_dim == 2 and rep.commutant_dim == 2


def test_twisted_bimodules_pairwise_distinct():
    act = z2_swap()
    assert bimodular_isometry(twisted_bimodule(act, 0), twisted_bimodule(act, 1)) is None
    act = trivial_z2()
    assert bimodular_isometry(twisted_bimodule(act, 0), twisted_bimodule(act, 1)) is not None


def test_averaging_examples():
    B = build_crossed_product(z2_swap())
    A = B.algebra
    psi, cert = averaging_map(B, [A.unit()])
    x = B.random_element(np.random.default_rng(2))
    assert np.abs((psi(x) - x).vec()).max() < 1e-12
    assert cert.ok()
    psi, cert = averaging_map(B, [A.diag([1, 0]), A.diag([0, 1])])
    assert cert.ok()
    assert operator_norm(psi(B.u(1)).coeffs[1]) < 1e-12
    assert operator_norm(B.expectation(psi(B.unit())) - A.unit()) < 1e-12


def test_averaging_precondition():
    B = build_crossed_product(z2_swap())
    with pytest.raises(PreconditionError):
        averaging_map(B, [B.algebra.diag([1, 0])])


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_averaging_certificate_random_partitions(seed):
    B = build_crossed_product(s3_translation())
    A = B.algebra
    rng = np.random.default_rng(seed)
    us = [A.random_unitary(rng) for _ in range(3)]
    psi, cert = averaging_map(B, [u * (1 / np.sqrt(3)) for u in us], samples=4, seed=seed)
    assert cert.ok()


def test_freeness_examples():
    act = z2_swap()
    res = freeness_infimum(act, 1, np.array([1.0, 1.0]), budget=100, seed=0)
    assert res.value < 1e-12 and res.strategy == "coloring"
    assert not res.identity_flag
    assert freeness_infimum(act, 1, np.zeros(2)).value == 0.0
    triv = trivial_z2()
    res = freeness_infimum(triv, 1, np.array([1.0, 1.0]), budget=300, seed=0)
    assert res.value > 0.4


def test_freeness_trivial_action_oracle():
    # on C^2 with trivial action every average of xi = (s, t) is (s, t) itself
    triv = trivial_z2()
    xi = np.array([0.3, -2.0])
    res = freeness_infimum(triv, 1, xi, budget=200, seed=3)
    assert abs(res.value - 2.0) < 1e-9


@pytest.mark.parametrize("n", [3, 4])
def test_freeness_cyclic_translations(n):
    act = cyclic_translation(n)
    rng = np.random.default_rng(n)
    for g in range(1, n):
        res = freeness_infimum(act, g, rng.normal(size=n), budget=200, seed=g)
        assert res.value < 1e-12


def test_simplicity_examples():
    assert simplicity_probe(build_crossed_product(z2_swap())).is_simple
    rep = simplicity_probe(build_crossed_product(trivial_z2("C")))
    assert not rep.is_simple and rep.center_dim == 2 and rep.witness is not None
    B = build_crossed_product(s3_translation())
    rep = simplicity_probe(B)
    assert rep.is_simple and rep.block_sizes == [6]
    assert center_dim([x.regular() for x in B.basis()]) == 1


def test_free_fixtures_are_simple():
    for make in (z2_swap, lambda: cyclic_translation(3), s3_translation):
        act = make()
        rng = np.random.default_rng(0)
        vals = [freeness_infimum(act, g, rng.normal(size=act.algebra.total_dim), budget=50).value
                for g in range(act.group.order) if g != act.group.e]
        assert max(vals) < 1e-12
        assert simplicity_probe(build_crossed_product(act)).is_simple
