"""Correspondences, relative tensor products and stable generators.

Separates A (x)_theta A for two inner automorphisms of M2, fuses them and
finds the bimodular unitary onto A (x)_{rho o lambda} A.  Then computes a
Mostow radius for the free module A^2 and checks that random perturbations
within it keep generating.
"""
import numpy as np

from cslab import Correspondence, LinearMapOnA, MatrixBlockAlgebra, bimodular_isometry, fuse, mostow_radius, \
    pp_basis, tensor_by_map
from cslab.bimodule import generates, random_perturbation

M2 = MatrixBlockAlgebra([2], "M2")
rng = np.random.default_rng(1)


def inner(u):
    return LinearMapOnA.from_function(lambda x: u * x * u.adjoint(), M2, star_preserving=True)


lam, rho = inner(M2.random_unitary(rng)), inner(M2.random_unitary(rng))
left = fuse(tensor_by_map(M2, lam), tensor_by_map(M2, rho))
right = tensor_by_map(M2, rho @ lam)
iso = bimodular_isometry(left, right)
print(f"fused carrier dim {left.carrier_dim}, isometry residual {iso.residual:.1e}")

basis = pp_basis(right)
print(f"right Pimsner-Popa basis of size {len(basis.vectors)}, reconstruction residual {basis.residual:.1e}")

F = Correspondence.free(M2, 2)
gens = list(F.distinguished)
delta = mostow_radius(F, gens, "right")
ok = sum(generates(F, [g + random_perturbation(F, delta, rng) for g in gens], "right") for _ in range(500))
print(f"Mostow radius of the standard basis of A^2: {delta:.4f}; {ok}/500 perturbations still generate")
