"""Crossed products by finite groups.

Takes S3 acting on C(S3) by translation: the crossed product is M6, its six
intermediate algebras come from the six subgroups, and averaging over a
colouring of the translation graph kills every non-trivial Fourier slot.
The trivial Z2 action is the contrast case.
"""
import numpy as np

from cslab import build_crossed_product, freeness_infimum, galois_scan, relative_commutant, simplicity_probe
from cslab.fixtures import s3_translation, trivial_z2, z2_swap

act = s3_translation()
B = build_crossed_product(act)
print(f"{B}: dim {B.dim}, simple {simplicity_probe(B).is_simple}")

lattice = galois_scan(B, samples=3)
for node in lattice.nodes:
    print(f"  subgroup {node.subgroup}: dim {node.dim}, compatible expectation ok {node.ok}")

xi = np.random.default_rng(2).normal(size=6)
for g in range(1, 6):
    res = freeness_infimum(act, g, xi, budget=100)
    print(f"  g={g}: average norm {res.value:.1e} via {res.strategy}")

triv = trivial_z2()
res = freeness_infimum(triv, 1, np.ones(2), budget=500)
print(f"trivial Z2: infimum {res.value:.3f}, simple {simplicity_probe(build_crossed_product(triv)).is_simple}")

rc = relative_commutant(build_crossed_product(z2_swap()))
print(f"Z2 swap: dim A' cap B = {rc.commutant_dim}, End(B) dim {rc.end_dim}, abelian {rc.end_abelian}")
