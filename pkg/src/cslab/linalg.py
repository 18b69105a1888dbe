"""Dense linear-algebra kernels shared by the other modules."""
import numpy as np
import scipy.linalg

# Singular values below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-9


def column_basis(vectors, rtol=RANK_RTOL):
    """Orthonormal basis (columns) of the span of the columns of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.size == 0 or vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    r = int(np.sum(s > rtol * s[0]))
    return u[:, :r]


def rank(vectors, rtol=RANK_RTOL):
    vectors = np.asarray(vectors)
    if vectors.size == 0:
        return 0
    s = np.linalg.svd(vectors, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def null_space(blocks, rtol=1e-10):
    """Common null space of the stacked linear maps in ``blocks``.

    The Gram matrix ``sum B^H B`` is diagonalised instead of the stacked
    matrix, which keeps memory linear in the number of blocks.  Eigenvalues
    below ``rtol`` times the largest are treated as zero.
    """
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    n = blocks[0].shape[1]
    gram = np.zeros((n, n), dtype=complex)
    for b in blocks:
        gram += b.conj().T @ b
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram)
    top = max(abs(w[-1]), 1.0) if w.size else 1.0
    return v[:, w <= rtol * top]


def psd_sqrt(h):
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_inv_sqrt(h):
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v / np.sqrt(w)) @ v.conj().T


def kron_apply(a, b, x):
    """Compute ``kron(a, b) @ x`` without materialising the Kronecker product."""
    m, n = a.shape[1], b.shape[1]
    cols = x.shape[1]
    xr = x.reshape(m, n, cols)
    out = np.einsum("ac,bd,cdr->abr", a, b, xr, optimize=True)
    return out.reshape(a.shape[0] * b.shape[0], cols)


def random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def polar_unitary(t):
    return scipy.linalg.polar(t)[0]
