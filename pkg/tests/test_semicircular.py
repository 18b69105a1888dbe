import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslab.algebra import LinearMapOnA, MatrixBlockAlgebra, TraceFunctional, operator_norm
from cslab.bimodule import presented_vector
from cslab.samplers import random_cp_covariance
from cslab.semicircular import (Covariance, TruncatedFock, annihilation, build_T, catalan, central_vectors, creation,
                                fgp_and_generator_check, left_multiplication, required_depth, parse_word,
                                semicircular_operator, spanning_check, traciality_check, word_moment)
from cslab.tolerances import DepthError, InputDataError

from oracles import is_crossing, non_crossing_pairings, svd_null_space

C = MatrixBlockAlgebra([1], "C")
C2 = MatrixBlockAlgebra([1, 1], "C^2")
M2 = MatrixBlockAlgebra([2], "M2")
CM2 = MatrixBlockAlgebra([1, 2], "C+M2")
seeds = st.integers(0, 2 ** 32 - 1)


def m2_trace_cov():
    tau = TraceFunctional(M2)
    return Covariance.from_functions(M2, [[lambda a: M2.scalar(tau(a))]])


def c2_swap_cov():
    return Covariance.from_functions(C2, [[lambda a: C2.element([a.blocks[1], a.blocks[0]])]])


def fock(cov, depth):
    return TruncatedFock(build_T(cov), depth)


def test_build_T_examples():
    T = build_T(Covariance.scalar())
    xi = T.distinguished[0]
    assert T.carrier_dim == 1 and abs(T.ip(xi, xi).vec()[0] - 1) < 1e-12
    T = build_T(Covariance(M2, [[LinearMapOnA.identity(M2)]]))
    assert T.carrier_dim == 4


def test_build_T_trace_covariance_inner_product():
    T = build_T(m2_trace_cov())
    tau = TraceFunctional(M2)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b, c, d = (M2.random_element(rng) for _ in range(4))
        lhs = T.ip(presented_vector(T, 0, a, b), presented_vector(T, 0, c, d))
        rhs = b.adjoint() * M2.scalar(tau(a.adjoint() * c)) * d
        assert operator_norm(lhs - rhs) < 1e-10


def test_build_T_rejects_non_cp():
    transpose = Covariance.from_functions(M2, [[lambda a: M2.element([a.blocks[0].T])]])
    with pytest.raises(InputDataError, match="completely positive"):
        build_T(transpose)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(1, 2))
def test_build_T_postcondition(seed, n):
    cov = random_cp_covariance(CM2, n, np.random.default_rng(seed))
    T = build_T(cov)
    assert T.meta["postcondition_residual"] <= 1e-9
    res = T.check(samples=3, seed=seed)
    assert max(res[k] for k in ("hermitian", "right_linear", "left_adjoint", "commute")) < 1e-9


def test_creation_examples():
    cov = random_cp_covariance(CM2, 2, np.random.default_rng(1))
    F = fock(cov, 2)
    T = F.T
    xi, eta = F.xis
    vac = F.vacuum_vector()
    v = creation(F, xi) @ vac
    w = creation(F, eta) @ vac
    parts = F.split(v)
    assert not np.any(parts[0]) and not np.any(parts[2])
    assert operator_norm(F.ip(v, w) - T.ip(xi, eta)) < 1e-10
    assert np.abs(annihilation(F, xi) @ vac).max() == 0
    contraction = annihilation(F, xi) @ w
    expected = left_multiplication(F, T.ip(xi, eta)) @ vac
    assert np.abs(contraction - expected).max() < 1e-10


def test_creation_is_bimodular():
    cov = random_cp_covariance(CM2, 1, np.random.default_rng(2))
    F = fock(cov, 3)
    T = F.T
    rng = np.random.default_rng(3)
    xi = F.xis[0]
    for _ in range(5):
        a, b = CM2.random_element(rng), CM2.random_element(rng)
        lhs = creation(F, T.lact(a, T.ract(xi, b))).dense()
        rhs = (left_multiplication(F, a) @ creation(F, xi) @ left_multiplication(F, b)).dense()
        assert np.abs(lhs - rhs).max() < 1e-10


def test_semicircular_examples():
    F = fock(Covariance.scalar(), 3)
    X = semicircular_operator(F, 0)
    vac = F.vacuum_vector()
    x1 = F.split(X @ vac)
    assert abs(abs(x1[1][0]) - 1) < 1e-12 and not np.any(x1[0])
    x2 = F.split(X @ (X @ vac))
    assert abs(x2[0][0] - 1) < 1e-12 and abs(abs(x2[2][0]) - 1) < 1e-12 and not np.any(x2[1])
    assert X.adjoint_residual() < 1e-10
    cov = random_cp_covariance(CM2, 2, np.random.default_rng(4))
    F = fock(cov, 2)
    for i in range(2):
        assert semicircular_operator(F, i).adjoint_residual() < 1e-9


def test_word_moment_recovers_covariance():
    cov = random_cp_covariance(CM2, 2, np.random.default_rng(5))
    F = fock(cov, 2)
    rng = np.random.default_rng(6)
    for _ in range(5):
        a = CM2.random_element(rng)
        for i in range(2):
            for j in range(2):
                got = word_moment(F, [i, a, j])
                assert operator_norm(got - cov(i, j, a)) <= 1e-10
    assert operator_norm(word_moment(F, ["X1"])) == 0


def test_catalan_moments():
    F = fock(Covariance.scalar(), 6)
    for k in range(4):
        oracle = sum(1 for p in non_crossing_pairings(2 * k) if not is_crossing(p))
        assert oracle == catalan(k)
        got = word_moment(F, ["X"] * (2 * k)).vec()[0]
        assert abs(got - oracle) < 1e-10
    assert abs(word_moment(F, "X X X X").vec()[0] - 2) < 1e-10
    assert abs(word_moment(F, "X X X X X X").vec()[0] - 5) < 1e-10
    assert abs(word_moment(F, "X X X").vec()[0]) < 1e-12


def test_depth_rejection_and_vacuum_exact_mode():
    F = fock(Covariance.scalar(), 2)
    with pytest.raises(DepthError) as err:
        word_moment(F, "X X X X")
    assert err.value.required_depth == 4
    assert abs(word_moment(F, "X X X X", vacuum_exact=True).vec()[0] - 2) < 1e-10
    with pytest.raises(DepthError):
        word_moment(F, "X X X X X X", vacuum_exact=True)
    assert required_depth(parse_word("X 1 X X", C, 1), vacuum_exact=True) == 2


@settings(max_examples=6, deadline=None)
@given(seeds)
def test_moment_depth_stability(seed):
    rng = np.random.default_rng(seed)
    cov = random_cp_covariance(CM2, 2, rng)
    T = build_T(cov)
    m = int(rng.integers(1, 3))
    word = [CM2.random_element(rng)]
    for _ in range(m):
        word += [int(rng.integers(2)), CM2.random_element(rng)]
    base = word_moment(TruncatedFock(T, m), word)
    deeper = word_moment(TruncatedFock(T, m + 1), word)
    exact = word_moment(TruncatedFock(T, (m + 1) // 2), word, vacuum_exact=True)
    assert operator_norm(base - deeper) < 1e-10
    assert operator_norm(base - exact) < 1e-10


def test_expectation_is_bimodular_projection():
    cov = random_cp_covariance(CM2, 1, np.random.default_rng(7))
    F = fock(cov, 3)
    rng = np.random.default_rng(8)
    a, b, c, x0 = (CM2.random_element(rng) for _ in range(4))
    assert operator_norm(word_moment(F, [a]) - a) < 1e-12
    inner = word_moment(F, [x0, 0, c, 0])
    outer = word_moment(F, [a * x0, 0, c, 0, b])
    assert operator_norm(outer - a * inner * b) < 1e-10
    # unital and positive on X a^* a X
    pos = word_moment(F, [0, c.adjoint() * c, 0])
    for blk in pos.blocks:
        assert np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))[0] > -1e-10


def test_traciality_examples():
    rep = traciality_check(m2_trace_cov())
    assert rep.passed and rep.residual < 1e-12
    assert rep.conjugation_residual < 1e-9
    rep = traciality_check(Covariance(M2, [[LinearMapOnA.identity(M2)]]))
    assert rep.passed and rep.conjugation_residual < 1e-9
    p = M2.element([np.diag([1.0, 0.0])])
    rep = traciality_check(Covariance.from_functions(M2, [[lambda x: p * x * p]]))
    assert rep.passed


def test_traciality_failure_with_witness():
    e21 = M2.element([np.array([[0.0, 0.0], [1.0, 0.0]])])
    cov = Covariance.from_functions(M2, [[lambda x: e21 * x * e21.adjoint()]])
    rep = traciality_check(cov, seed=1)
    assert not rep.passed and rep.residual > 1e-3
    tau = TraceFunctional(M2)
    x, y = rep.witness["x"], rep.witness["y"]
    direct = abs(tau(cov(0, 0, x) * y) - tau(x * cov(0, 0, y)))
    assert abs(direct - rep.residual) < 1e-12
    assert rep.conjugation_residual is None


def test_fgp_examples():
    (rec,) = fgp_and_generator_check(Covariance(M2, [[LinearMapOnA.identity(M2)]]), trials=50)
    assert rec["generator"] and rec["fgp"] and rec["carrier_dim"] == 4
    assert rec["openness_rate"] == 1.0
    (rec,) = fgp_and_generator_check(Covariance.scalar(), trials=10)
    assert rec["carrier_dim"] == 1 and rec["generator"]
    e1 = C2.diag([1, 0])
    (rec,) = fgp_and_generator_check(Covariance.from_functions(C2, [[lambda x: e1 * x * e1]]), trials=10)
    assert rec["generated_dim"] == rec["carrier_dim"] == 1


def _oracle_central_dims(F):
    out = []
    for L in F.levels:
        if L.carrier_dim == 0:
            out.append(0)
            continue
        eqs = np.vstack([L.left[k] - L.right[k] for k in range(F.algebra.total_dim)])
        out.append(svd_null_space(eqs).shape[1])
    return out


@pytest.mark.parametrize("make, depth", [(m2_trace_cov, 2), (Covariance.scalar, 2), (c2_swap_cov, 1)])
def test_central_vectors_match_oracle(make, depth):
    F = fock(make(), depth)
    assert central_vectors(F).level_dims == _oracle_central_dims(F)


def test_central_vector_verdicts():
    rep = central_vectors(fock(m2_trace_cov(), 2))
    assert not rep.irreducible_truncated and rep.level_dims[1] > 0
    rep = central_vectors(fock(Covariance.scalar(), 1))
    assert rep.level_dims == [1, 1] and not rep.irreducible_truncated
    rep = central_vectors(fock(c2_swap_cov(), 1))
    assert rep.level_dims == [2, 0] and rep.irreducible_truncated and not rep.scalar_vacuum_only


def test_spanning_examples():
    rep = spanning_check(fock(random_cp_covariance(CM2, 1, np.random.default_rng(0)), 0))
    assert rep.full and rep.reached == [CM2.total_dim]
    rep = spanning_check(fock(Covariance.scalar(), 3))
    assert rep.reached == [1, 1, 1, 1] and rep.full
    rep = spanning_check(fock(Covariance(M2, [[LinearMapOnA.identity(M2)]]), 2))
    assert rep.full and all(d == 0 for d in rep.deficits)
