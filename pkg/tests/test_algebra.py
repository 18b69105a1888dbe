import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslab.algebra import (LinearMapOnA, MatrixBlockAlgebra, TraceFunctional, center_analysis, choi_positivity,
                           element_arith, expectation_axioms, matrix_algebra_center, operator_norm, star_closure)
from cslab.crossed import build_crossed_product
from cslab.fixtures import trivial_z2, z2_swap
from cslab.tolerances import ConvergenceError, StructuralError

from oracles import choi_matrix, commutant_dim, crossed_product_regular

block_lists = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3)


def test_label_parsing():
    assert MatrixBlockAlgebra.from_label("C+M2").block_sizes == (1, 2)
    assert MatrixBlockAlgebra.from_label("C^3").block_sizes == (1, 1, 1)
    assert MatrixBlockAlgebra.from_label("M3").total_dim == 9
    with pytest.raises(StructuralError):
        MatrixBlockAlgebra.from_label("Q7")
    with pytest.raises(StructuralError):
        MatrixBlockAlgebra([2, 0])


def test_element_arith_examples():
    A = MatrixBlockAlgebra([1, 1])
    x, y = A.diag([2, 3]), A.diag([5, 7])
    assert element_arith(x, y, "mul").allclose(A.diag([10, 21]))
    rng = np.random.default_rng(0)
    z = A.random_element(rng)
    assert element_arith(A.unit(), z, "mul").allclose(z)
    assert element_arith(element_arith(z, None, "adjoint"), None, "adjoint").allclose(z)
    assert element_arith(z, 2j, "scale").allclose(z * 2j)


def test_parent_mismatch():
    A, B = MatrixBlockAlgebra([2]), MatrixBlockAlgebra([1, 1])
    with pytest.raises(StructuralError):
        element_arith(A.unit(), B.unit(), "add")


def test_operator_norm_examples():
    M2 = MatrixBlockAlgebra([2])
    assert abs(operator_norm(M2.unit()) - 1) < 1e-15
    assert abs(operator_norm(M2.diag([3, -4])) - 4) < 1e-12
    e12 = M2.element([np.array([[0, 1], [0, 0]])])
    assert abs(operator_norm(e12) - 1.0) < 1e-12


@settings(max_examples=40, deadline=None)
@given(block_lists, st.integers(0, 2 ** 32 - 1))
def test_c_star_identity(sizes, seed):
    A = MatrixBlockAlgebra(sizes)
    x = A.random_element(np.random.default_rng(seed))
    n = operator_norm(x)
    assert abs(operator_norm(x.adjoint() * x) - n ** 2) <= 1e-9 * (1 + n ** 2)


@settings(max_examples=30, deadline=None)
@given(block_lists, st.integers(0, 2 ** 32 - 1))
def test_trace_is_tracial_state(sizes, seed):
    A = MatrixBlockAlgebra(sizes)
    rng = np.random.default_rng(seed)
    tau = TraceFunctional(A, rng.uniform(0.1, 1.0, size=len(sizes)))
    x, y = A.random_element(rng), A.random_element(rng)
    assert abs(tau(A.unit()) - 1) < 1e-12
    assert abs(tau(x * y) - tau(y * x)) < 1e-10
    assert tau(x.adjoint() * x).real > 0
    assert abs(tau(x) - tau.coefficients() @ x.vec()) < 1e-12


def test_choi_examples():
    M2 = MatrixBlockAlgebra([2])
    tau = TraceFunctional(M2)
    ident = LinearMapOnA.identity(M2)
    transpose = LinearMapOnA.from_function(lambda x: M2.element([x.blocks[0].T]), M2)
    trace_map = LinearMapOnA.from_function(lambda x: M2.scalar(tau(x)), M2)
    assert choi_positivity(ident).is_cp
    cert = choi_positivity(transpose)
    assert not cert.is_cp
    # eigen-oracle on the full Choi matrix of the transpose
    oracle = np.linalg.eigvalsh(choi_matrix(lambda e: e.T, 2))[0]
    assert abs(cert.min_eigenvalue - oracle) < 1e-12
    assert abs(oracle + 1) < 1e-12
    assert choi_positivity(trace_map).is_cp


@pytest.mark.parametrize("seed", range(5))
def test_choi_agrees_with_psd_inputs(seed):
    rng = np.random.default_rng(seed)
    A = MatrixBlockAlgebra([1, 2])
    k = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    cp = LinearMapOnA.from_function(lambda x: A.from_dense(k.conj().T @ x.dense() @ k), A)
    assert choi_positivity(cp).is_cp
    for _ in range(200):
        p = A.random_positive(rng)
        assert np.linalg.eigvalsh(cp(p).blocks[1])[0] > -1e-9


def test_center_examples():
    rep = center_analysis(MatrixBlockAlgebra([3]))
    assert rep.center_dim == 1 and rep.is_simple
    rep = center_analysis(MatrixBlockAlgebra([1, 2]))
    assert rep.center_dim == 2 and not rep.is_simple
    assert rep.block_sizes == [1, 2]


def test_center_trivial_z2_crossed_product():
    # brute-force commutant of C(X) x| Z2 with trivial action, X = {0, 1}
    mats = crossed_product_regular([[0, 1], [0, 1]])
    flat = np.column_stack([m.ravel() for m in mats])
    eqs = np.vstack([np.column_stack([(b @ s - s @ b).ravel() for b in mats]) for s in mats])
    oracle = flat.shape[1] - np.linalg.matrix_rank(eqs, tol=1e-9)
    assert oracle == 4
    B = build_crossed_product(trivial_z2())
    assert matrix_algebra_center(B.regular_generators()).center_dim == oracle


def test_central_projection_invariants():
    B = build_crossed_product(z2_swap())
    for gens in (B.regular_generators(), [MatrixBlockAlgebra([1, 2, 2]).diag([1, 2, 2, 3, 3]).dense()]):
        rep = matrix_algebra_center(gens)
        ps = rep.projections
        n = ps[0].shape[0]
        assert np.abs(sum(ps) - np.eye(n)).max() < 1e-9
        for i, p in enumerate(ps):
            for j, q in enumerate(ps):
                assert np.abs(p @ q - (p if i == j else 0)).max() < 1e-9
            for g in gens:
                assert np.abs(p @ g - g @ p).max() < 1e-9


def test_projection_order_is_deterministic():
    A = MatrixBlockAlgebra([2, 1, 1])
    r1 = center_analysis(A)
    r2 = center_analysis(A)
    assert r1.block_sizes == [1, 1, 2]
    for p, q in zip(r1.projections, r2.projections):
        assert p.allclose(q, atol=0)


@settings(max_examples=20, deadline=None)
@given(block_lists)
def test_is_simple_iff_one_block(sizes):
    A = MatrixBlockAlgebra(sizes)
    assert center_analysis(A).is_simple == (len(sizes) == 1)
    # commutant oracle of the algebra in its defining representation
    assert commutant_dim([g.dense() for g in A.generators()]) == len(sizes)


def test_star_closure_cap():
    rng = np.random.default_rng(1)
    mats = [rng.normal(size=(6, 6))]
    with pytest.raises(ConvergenceError):
        star_closure(mats, max_rounds=0)


def test_expectation_identity_passes():
    A = MatrixBlockAlgebra([1, 2])
    rep = expectation_axioms(LinearMapOnA.identity(A), None, A.basis())
    assert rep.ok and rep.faithful


def test_expectation_crossed_product():
    B = build_crossed_product(z2_swap())
    big = [x.regular() for x in B.basis()]
    sub = [B.embed(e).regular() for e in B.algebra.basis()]
    rep = expectation_axioms(lambda m: B.embed(B.expectation(m)).regular(), big, sub)
    assert rep.ok and rep.faithful and rep.kernel_dim == 0


def test_expectation_non_subalgebra_slice():
    # coefficient map onto span{e1 u_e, e1 u_g} in C^2 x| Z2, which is not a subalgebra
    B = build_crossed_product(z2_swap())
    A = B.algebra
    e1 = A.diag([1, 0])
    big = [x.regular() for x in B.basis()]
    sub = [B.u(0, e1).regular(), B.u(1, e1).regular()]

    def slice_map(m):
        c = B.from_regular(m).coeffs
        return (B.u(0, e1 * c[0].blocks[0][0, 0]) + B.u(1, e1 * c[1].blocks[0][0, 0])).regular()

    rep = expectation_axioms(slice_map, big, sub)
    names = {f["axiom"] for f in rep.failures}
    assert not rep.ok
    assert "bimodular" in names
    wit = next(f for f in rep.failures if f["axiom"] == "bimodular")["witness"]
    x, a, a2 = wit["x"], wit["a"], wit["a2"]
    assert np.abs(slice_map(a @ x @ a2) - a @ slice_map(x) @ a2).max() > 1e-6


def test_linear_map_algebra():
    A = MatrixBlockAlgebra([2])
    rng = np.random.default_rng(3)
    f = LinearMapOnA(A, A, rng.normal(size=(4, 4)))
    g = LinearMapOnA.identity(A)
    x = A.random_element(rng)
    assert (f @ g)(x).allclose(f(x))
    assert (f + g)(x).allclose(f(x) + x)
    assert (f * 2.0)(x).allclose(f(x) * 2.0)
    assert g.star_residual() < 1e-15
    with pytest.raises(StructuralError):
        LinearMapOnA(A, A, np.eye(3))
