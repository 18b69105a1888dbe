"""Seeded random generators for covariances, endomorphisms and correspondences."""
import itertools

import numpy as np

from . import linalg
from .algebra import AlgElement, LinearMapOnA
from .bimodule import Correspondence, direct_sum
from .semicircular import Covariance


def pinching(algebra, mat):
    """Compress a dense ``dense_size`` matrix onto the block diagonal."""
    return algebra.from_dense(mat)


def random_cp_covariance(algebra, index_count, rng, kraus=2):
    """``eta_ij(a) = P(sum_r K_ri^* a K_rj)`` with Gaussian ``K`` and ``P`` the block pinching."""
    n = algebra.dense_size
    ks = rng.normal(size=(kraus, index_count, n, n)) + 1j * rng.normal(size=(kraus, index_count, n, n))
    ks /= np.sqrt(2.0 * n * kraus)

    def entry(i, j):
        return lambda a: pinching(algebra, sum(k[i].conj().T @ a.dense() @ k[j] for k in ks))

    fns = [[entry(i, j) for j in range(index_count)] for i in range(index_count)]
    return Covariance.from_functions(algebra, fns)


def _multiplicity_patterns(target, sizes):
    """All multiplicity vectors ``m`` with ``sum m_j sizes_j = target``."""
    ranges = [range(target // s + 1) for s in sizes]
    return [m for m in itertools.product(*ranges) if sum(a * s for a, s in zip(m, sizes)) == target]


def random_endomorphism(algebra, rng):
    """A random unital *-endomorphism ``x -> (u_k diag(x_j (x) 1_{m_kj}) u_k^*)_k``."""
    sizes = algebra.block_sizes
    plans = []
    for n in sizes:
        pats = _multiplicity_patterns(n, sizes)
        mult = pats[int(rng.integers(len(pats)))]
        plans.append((mult, linalg.random_unitary(n, rng)))

    def fn(x):
        blocks = []
        for mult, u in plans:
            parts = [np.kron(x.blocks[j], np.eye(m)) for j, m in enumerate(mult) if m]
            d = sum(p.shape[0] for p in parts)
            big = np.zeros((d, d), dtype=complex)
            o = 0
            for p in parts:
                big[o:o + p.shape[0], o:o + p.shape[0]] = p
                o += p.shape[0]
            blocks.append(u @ big @ u.conj().T)
        return AlgElement(algebra, blocks)

    return LinearMapOnA.from_function(fn, algebra, star_preserving=True)


def change_carrier_basis(M, s):
    """Same correspondence in the coordinates ``xi = s xi'`` (``s`` invertible)."""
    si = np.linalg.inv(s)
    return Correspondence(M.algebra, [si @ m @ s for m in M.left], [si @ m @ s for m in M.right],
                          [s.conj().T @ m @ s for m in M.inner], trace=M.trace,
                          distinguished=[si @ v for v in M.distinguished], label=M.label)


def random_correspondence(algebra, rng, max_dim=8):
    """Random direct sum of block bimodules in random (non-orthonormal) coordinates."""
    pairs = [(i, j) for i in range(algebra.n_blocks) for j in range(algebra.n_blocks)]
    dims = {p: algebra.block_sizes[p[0]] * algebra.block_sizes[p[1]] for p in pairs}
    chosen, total = [], 0
    for _ in range(8):
        p = pairs[int(rng.integers(len(pairs)))]
        if total + dims[p] <= max_dim:
            chosen.append(p)
            total += dims[p]
        if total and rng.uniform() < 0.35:
            break
    if not chosen:
        p = min(pairs, key=lambda q: dims[q])
        chosen = [p]
    M = direct_sum(*[Correspondence.block(algebra, i, j) for i, j in chosen])
    m = M.carrier_dim
    s = np.eye(m) + 0.3 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) / np.sqrt(m)
    return change_carrier_basis(M, s)


def random_generators(M, rng, side="bimodule", count=None):
    """Random vectors that generate ``M`` on the given side (more are added until they do)."""
    from .bimodule import generates

    m = M.carrier_dim
    gens = [rng.normal(size=m) + 1j * rng.normal(size=m) for _ in range(count or 1)]
    while not generates(M, gens, side):
        gens.append(rng.normal(size=m) + 1j * rng.normal(size=m))
    return gens
