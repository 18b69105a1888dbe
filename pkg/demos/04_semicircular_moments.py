"""Operator-valued semicircular systems on a truncated Fock space.

The scalar case reproduces the Catalan numbers.  A random covariance over
C + M2 shows that E(X_i a X_j) recovers eta_ij(a), and the central-vector
test separates the C^2 swap covariance from the M2 trace covariance.
"""
import numpy as np

from cslab import Covariance, MatrixBlockAlgebra, TruncatedFock, build_T, central_vectors, word_moment
from cslab.algebra import TraceFunctional, operator_norm
from cslab.samplers import random_cp_covariance

F = TruncatedFock(build_T(Covariance.scalar()), 6)
print("scalar moments:", [round(float(word_moment(F, ["X"] * (2 * k)).vec()[0].real), 10) for k in range(4)])

A = MatrixBlockAlgebra.from_label("C+M2")
rng = np.random.default_rng(3)
cov = random_cp_covariance(A, 2, rng)
F = TruncatedFock(build_T(cov), 2)
a = A.random_element(rng)
err = max(operator_norm(word_moment(F, [i, a, j]) - cov(i, j, a)) for i in range(2) for j in range(2))
print(f"level dims {F.dims}; max |E(X_i a X_j) - eta_ij(a)| = {err:.1e}")

C2 = MatrixBlockAlgebra([1, 1], "C^2")
M2 = MatrixBlockAlgebra([2], "M2")
tau = TraceFunctional(M2)
swap = Covariance.from_functions(C2, [[lambda x: C2.element([x.blocks[1], x.blocks[0]])]])
trace = Covariance.from_functions(M2, [[lambda x: M2.scalar(tau(x))]])
for name, c in [("C^2 swap", swap), ("M2 trace", trace)]:
    rep = central_vectors(TruncatedFock(build_T(c), 1))
    print(f"{name}: central vectors per level {rep.level_dims}, only Z(A)1 {rep.irreducible_truncated}")
