"""Block algebras, traces and complete positivity.

Builds C + M2, checks the C*-identity on a random element, then contrasts
the identity map with the transpose on M2: both are positive, only the
first is completely positive, and the Choi matrix tells them apart.
"""
import numpy as np

from cslab import LinearMapOnA, MatrixBlockAlgebra, center_analysis, choi_positivity, operator_norm

A = MatrixBlockAlgebra.from_label("C+M2")
rng = np.random.default_rng(0)
x = A.random_element(rng)
print(f"{A.label}: dim {A.total_dim}, blocks {A.block_sizes}")
print(f"||x*x|| - ||x||^2 = {operator_norm(x.adjoint() * x) - operator_norm(x) ** 2:.2e}")

rep = center_analysis(A)
print(f"centre dimension {rep.center_dim}, simple: {rep.is_simple}")

M2 = MatrixBlockAlgebra([2], "M2")
ident = LinearMapOnA.identity(M2)
transpose = LinearMapOnA.from_function(lambda y: M2.element([y.blocks[0].T]), M2)
for name, theta in [("identity", ident), ("transpose", transpose)]:
    cert = choi_positivity(theta)
    print(f"{name:9s}: completely positive {cert.is_cp}, Choi min eigenvalue {cert.min_eigenvalue:+.3f}")
