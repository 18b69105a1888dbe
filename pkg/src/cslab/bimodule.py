"""Finite-dimensional right Hilbert C*-correspondences over a block algebra.

A ``Correspondence`` lives on a carrier ``C^m``.  For every matrix unit
``e_k`` of the base algebra it stores ``left[k]`` (the matrix of
``xi -> e_k |> xi``), ``right[k]`` (``xi -> xi <| e_k``) and ``inner[k]``, so
that the coefficient of ``e_k`` in ``<xi|eta>_A`` is ``xi^H inner[k] eta``.

Composing the A-valued inner product with the faithful trace gives a
positive definite form ``gram``; since the trace is tracial, the adjoint of a
bimodule map for that form coincides with its module adjoint, which is how
adjoints are computed throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .algebra import AlgElement, MatrixBlockAlgebra, TraceFunctional, \
    matrix_algebra_center, operator_norm
from .tolerances import InputDataError, PreconditionError, StructuralError, eps, eps_psd


def unit_product_table(algebra):
    """``table[p, q]`` is the index of ``e_p e_q`` or -1 when the product vanishes."""
    idx = algebra.basis_index()
    pos = {t: k for k, t in enumerate(idx)}
    table = -np.ones((len(idx), len(idx)), dtype=int)
    for p, (b, i, j) in enumerate(idx):
        for q, (b2, i2, j2) in enumerate(idx):
            if b == b2 and j == i2:
                table[p, q] = pos[(b, i, j2)]
    return table


def unit_adjoint_index(algebra):
    idx = algebra.basis_index()
    pos = {t: k for k, t in enumerate(idx)}
    return np.array([pos[(b, j, i)] for (b, i, j) in idx])


class Correspondence:
    """A right Hilbert A-A bimodule with carrier ``C^m``."""

    def __init__(self, algebra, left, right, inner, trace=None, distinguished=(), label="", meta=None):
        k = algebra.total_dim
        left, right, inner = (np.array(t, dtype=complex) for t in (left, right, inner))
        m = left.shape[-1] if left.ndim == 3 else 0
        for name, t in (("left", left), ("right", right), ("inner", inner)):
            if t.shape != (k, m, m):
                raise StructuralError(f"{name} tensor has shape {t.shape}, expected {(k, m, m)}")
            t.flags.writeable = False
        self.algebra = algebra
        self.trace = trace or TraceFunctional(algebra)
        self.left, self.right, self.inner = left, right, inner
        self.gram = np.einsum("k,kij->ij", self.trace.coefficients(), inner)
        self.gram = 0.5 * (self.gram + self.gram.conj().T)
        self.distinguished = tuple(np.asarray(v, dtype=complex) for v in distinguished)
        self.label = label
        self.meta = meta or {}

    def __repr__(self):
        return f"Correspondence({self.label or '?'} over {self.algebra.label}, dim={self.carrier_dim})"

    @property
    def carrier_dim(self):
        return self.left.shape[-1]

    # -- actions and inner products ----------------------------------------
    def lmat(self, a):
        return np.einsum("k,kij->ij", a.vec(), self.left)

    def rmat(self, a):
        return np.einsum("k,kij->ij", a.vec(), self.right)

    def lact(self, a, xi):
        return self.lmat(a) @ xi

    def ract(self, xi, a):
        return self.rmat(a) @ xi

    def ip(self, xi, eta):
        """Right A-valued inner product, conjugate-linear in ``xi``."""
        vals = np.einsum("i,kij,j->k", np.conj(xi), self.inner, eta)
        return self.algebra.from_vector(vals)

    def tau_ip(self, xi, eta):
        return complex(np.conj(xi) @ self.gram @ eta)

    def norm(self, xi):
        return float(np.sqrt(operator_norm(self.ip(xi, xi))))

    def left_ip(self, xi, eta):
        """Left inner product induced by the trace.

        It is the element ``X`` with ``tau(X a) = tau(<eta | a |> xi>_A)`` for all ``a``.
        """
        w = self.trace.weights
        vals = np.array([np.conj(eta) @ self.gram @ (self.left[k] @ xi) for k in range(self.algebra.total_dim)])
        idx = self.algebra.basis_index()
        tr = unit_adjoint_index(self.algebra)
        return self.algebra.from_vector(np.array([vals[tr[k]] / w[idx[k][0]] for k in range(len(idx))]))

    def module_adjoint(self, t, target=None):
        """Adjoint of ``t: self -> target`` (both bimodule-linear)."""
        target = target or self
        return np.linalg.solve(self.gram, t.conj().T @ target.gram)

    def whiten(self):
        """``(h, h_inv)`` with ``h = gram^{1/2}``."""
        return linalg.psd_sqrt(self.gram), linalg.psd_inv_sqrt(self.gram)

    def basis_vectors(self):
        return list(np.eye(self.carrier_dim, dtype=complex))

    # -- invariants ---------------------------------------------------------
    def check(self, samples=10, seed=0):
        """Residuals of the correspondence axioms on random vectors."""
        rng = np.random.default_rng(seed)
        A = self.algebra
        m = self.carrier_dim
        out = dict.fromkeys(["hermitian", "right_linear", "left_adjoint", "unital", "left_mult",
                             "right_mult", "commute"], 0.0)
        lo = float(np.linalg.eigvalsh(self.gram)[0]) if m else 1.0
        out["separation_min_eigenvalue"] = lo
        out["positive"] = 0.0
        one = A.unit()
        for _ in range(samples):
            xi = rng.normal(size=m) + 1j * rng.normal(size=m)
            eta = rng.normal(size=m) + 1j * rng.normal(size=m)
            a, b = A.random_element(rng), A.random_element(rng)
            scale = 1.0 + np.linalg.norm(xi) * np.linalg.norm(eta) * (1 + a.norm()) * (1 + b.norm())
            upd = {
                "hermitian": operator_norm(self.ip(xi, eta).adjoint() - self.ip(eta, xi)),
                "right_linear": operator_norm(self.ip(xi, self.ract(eta, a)) - self.ip(xi, eta) * a),
                "left_adjoint": operator_norm(self.ip(self.lact(a, xi), eta) - self.ip(xi, self.lact(a.adjoint(), eta))),
                "unital": np.linalg.norm(self.lact(one, xi) - xi) + np.linalg.norm(self.ract(xi, one) - xi),
                "left_mult": np.linalg.norm(self.lact(a * b, xi) - self.lact(a, self.lact(b, xi))),
                "right_mult": np.linalg.norm(self.ract(xi, a * b) - self.ract(self.ract(xi, a), b)),
                "commute": np.linalg.norm(self.ract(self.lact(a, xi), b) - self.lact(a, self.ract(xi, b))),
            }
            for key, val in upd.items():
                out[key] = max(out[key], float(val) / scale)
            pos = self.ip(xi, xi)
            out["positive"] = max(out["positive"],
                                  max(0.0, -min(float(np.linalg.eigvalsh(0.5 * (bl + bl.conj().T))[0])
                                                for bl in pos.blocks)))
        return out

    # -- serialisation --------------------------------------------------------
    def to_json(self):
        enc = lambda t: [[[[float(z.real), float(z.imag)] for z in row] for row in mat] for mat in t]  # noqa: E731
        return {
            "label": self.label,
            "algebra": self.algebra.to_json(),
            "carrier_dim": self.carrier_dim,
            "trace_weights": [float(w) for w in self.trace.weights],
            "left_action": enc(self.left),
            "right_action": enc(self.right),
            "inner_product": enc(self.inner),
            "distinguished": [[[float(z.real), float(z.imag)] for z in v] for v in self.distinguished],
        }

    @classmethod
    def from_json(cls, data):
        alg = data["algebra"]
        A = MatrixBlockAlgebra(alg["blocks"], alg.get("label"))
        dec = lambda t: np.array(t, dtype=float)[..., 0] + 1j * np.array(t, dtype=float)[..., 1]  # noqa: E731
        m = int(data["carrier_dim"])
        shape = (A.total_dim, m, m)
        tensors = [dec(data[k]).reshape(shape) if m else np.zeros(shape)
                   for k in ("left_action", "right_action", "inner_product")]
        trace = TraceFunctional(A, data["trace_weights"]) if "trace_weights" in data else None
        vecs = [dec(v) for v in data.get("distinguished", [])]
        return cls(A, *tensors, trace=trace, distinguished=vecs, label=data.get("label", ""))

    # -- standard examples ------------------------------------------------------
    @classmethod
    def trivial(cls, algebra):
        """``A`` over itself; carrier coordinates are the matrix-unit coordinates."""
        return cls.from_endomorphism(algebra, None, label=f"{algebra.label}")

    @classmethod
    def from_endomorphism(cls, algebra, lam=None, label=None):
        """The bimodule ``_lam A_A`` with ``a |> xi <| b = lam(a) xi b``.

        ``lam`` is a unital *-endomorphism given as a ``LinearMapOnA`` or a
        callable on ``AlgElement``; ``None`` means the identity.
        """
        basis = algebra.basis()
        lam = lam or (lambda x: x)
        left = [algebra.left_mult_matrix(lam(e)) for e in basis]
        right = [algebra.right_mult_matrix(e) for e in basis]
        k = algebra.total_dim
        inner = np.zeros((k, k, k), dtype=complex)
        idx = algebra.basis_index()
        pos = {t: n for n, t in enumerate(idx)}
        for (b, l, i) in idx:
            for j in range(algebra.block_sizes[b]):
                inner[pos[(b, i, j)], pos[(b, l, i)], pos[(b, l, j)]] = 1.0
        unit = algebra.unit().vec()
        return cls(algebra, left, right, inner, distinguished=[unit], label=label or f"_lam {algebra.label}")

    @classmethod
    def free(cls, algebra, n):
        """The free module ``A^n`` with the diagonal left action."""
        return direct_sum(*[cls.trivial(algebra)] * n)

    @classmethod
    def block(cls, algebra, i, j):
        """Irreducible bimodule ``M_{n_i x n_j}`` with ``a |> xi <| b = a_i xi b_j``."""
        ni, nj = algebra.block_sizes[i], algebra.block_sizes[j]
        m = ni * nj
        k = algebra.total_dim
        left = np.zeros((k, m, m), dtype=complex)
        right = np.zeros((k, m, m), dtype=complex)
        inner = np.zeros((k, m, m), dtype=complex)
        for kk, (b, p, q) in enumerate(algebra.basis_index()):
            if b == i:
                for s in range(nj):
                    left[kk, p * nj + s, q * nj + s] = 1.0
            if b == j:
                for r in range(ni):
                    right[kk, r * nj + q, r * nj + p] = 1.0
                for r in range(ni):
                    inner[kk, r * nj + p, r * nj + q] = 1.0
        return cls(algebra, left, right, inner, label=f"H[{i},{j}]")


def direct_sum(*mods):
    A = mods[0].algebra
    if any(M.algebra != A for M in mods):
        raise StructuralError("direct sum over different algebras")
    dims = [M.carrier_dim for M in mods]
    n = sum(dims)
    offs = np.cumsum([0] + dims)

    def stack(attr):
        out = np.zeros((A.total_dim, n, n), dtype=complex)
        for M, o, d in zip(mods, offs, dims):
            out[:, o:o + d, o:o + d] = getattr(M, attr)
        return out

    dist = []
    for idx, (M, o) in enumerate(zip(mods, offs)):
        for v in M.distinguished[:1]:
            w = np.zeros(n, dtype=complex)
            w[o:o + len(v)] = v
            dist.append(w)
    return Correspondence(A, stack("left"), stack("right"), stack("inner"), trace=mods[0].trace,
                          distinguished=dist, label="+".join(M.label for M in mods))


# ---------------------------------------------------------------------------
# separation and completion
# ---------------------------------------------------------------------------

@dataclass
class SemiInnerPresentation:
    """Free A-A bimodule on ``symbols`` with ``gram(s, a, t) = <s | a |> t>_A``.

    Elements of the pre-carrier are sums of ``e_p |> s <| e_q``.
    """

    algebra: MatrixBlockAlgebra
    symbols: Sequence[str]
    gram: Callable[[int, AlgElement, int], AlgElement]


def _descend(algebra, trace, pre_gram, apply_left, apply_right, apply_inner, tol_psd=None,
             allow_zero=False, label=""):
    """Quotient a pre-correspondence by the null space of its trace form.

    The quotient carrier gets a trace-orthonormal basis, so its ``gram`` is
    the identity.  Returns the correspondence, the coordinate map ``P``
    (pre-vector -> class coordinates) and the representative map ``R``.
    """
    pre_gram = 0.5 * (pre_gram + pre_gram.conj().T)
    w, q = np.linalg.eigh(pre_gram)
    top = float(w[-1]) if w.size else 0.0
    tol = eps_psd(tol_psd)
    if w.size and w[0] < -tol * max(top, 1.0):
        raise InputDataError(f"semi-inner product is not positive: most negative eigenvalue {w[0]:.3e}")
    keep = w > tol * max(top, 0.0) if top > 0 else np.zeros(w.size, dtype=bool)
    if not np.any(keep) and not allow_zero:
        raise InputDataError("every vector is null: the separated module is zero")
    lam, q = w[keep], q[:, keep]
    rep = q / np.sqrt(lam)
    coords = (q * np.sqrt(lam)).conj().T
    k = algebra.total_dim
    left = np.stack([coords @ apply_left(i, rep) for i in range(k)]) if lam.size else np.zeros((k, 0, 0))
    right = np.stack([coords @ apply_right(i, rep) for i in range(k)]) if lam.size else np.zeros((k, 0, 0))
    inner = np.stack([rep.conj().T @ apply_inner(i, rep) for i in range(k)]) if lam.size else np.zeros((k, 0, 0))
    M = Correspondence(algebra, left, right, inner, trace=trace, label=label)
    return M, coords, rep


def presentation_pre_structure(p):
    """Pre-carrier tensors of a presentation, basis ``(s, p, q) <-> e_p |> s <| e_q``."""
    A = p.algebra
    k = A.total_dim
    n = len(p.symbols)
    dim = n * k * k
    table = unit_product_table(A)
    adj = unit_adjoint_index(A)
    idx = A.basis_index()
    basis = A.basis()
    grams = {(s, t): [p.gram(s, e, t) for e in basis] for s in range(n) for t in range(n)}

    def flat(s, a, b):
        return (s * k + a) * k + b

    left = np.zeros((k, dim, dim), dtype=complex)
    right = np.zeros((k, dim, dim), dtype=complex)
    for r in range(k):
        for s in range(n):
            for a in range(k):
                for b in range(k):
                    if table[r, a] >= 0:
                        left[r, flat(s, table[r, a], b), flat(s, a, b)] = 1.0
                    if table[b, r] >= 0:
                        right[r, flat(s, a, table[b, r]), flat(s, a, b)] = 1.0
    inner = np.zeros((k, dim, dim), dtype=complex)
    pos = {t: i for i, t in enumerate(idx)}
    for s in range(n):
        for t in range(n):
            for a in range(k):
                for a2 in range(k):
                    prod = table[adj[a], a2]
                    if prod < 0:
                        continue
                    g = grams[s, t][prod]
                    for b, (blk, i, j) in enumerate(idx):
                        for b2, (blk2, i2, j2) in enumerate(idx):
                            if blk != blk2:
                                continue
                            val = g.blocks[blk][i, i2]
                            if val != 0:
                                inner[pos[(blk, j, j2)], flat(s, a, b), flat(t, a2, b2)] = val
    return left, right, inner


def separation_completion(p, trace=None, tol_psd=None, allow_zero=False, label=""):
    """Separate the free bimodule of a presentation by the null space of its inner product.

    The returned correspondence carries the classes of ``1 |> s <| 1`` as
    ``distinguished`` vectors and the coordinate map in ``meta["coords"]``.
    """
    A = p.algebra
    trace = trace or TraceFunctional(A)
    left, right, inner = presentation_pre_structure(p)
    pre_gram = np.einsum("k,kij->ij", trace.coefficients(), inner)
    M, coords, rep = _descend(A, trace, pre_gram, lambda i, x: left[i] @ x, lambda i, x: right[i] @ x,
                              lambda i, x: inner[i] @ x, tol_psd, allow_zero, label)
    unit = A.unit().vec()
    k = A.total_dim
    dist = []
    for s in range(len(p.symbols)):
        v = np.zeros(len(p.symbols) * k * k, dtype=complex)
        v[s * k * k:(s + 1) * k * k] = np.outer(unit, unit).ravel()
        dist.append(coords @ v)
    M.distinguished = tuple(dist)
    M.meta.update({"coords": coords, "presentation": p})
    return M


def presented_vector(M, s, a, b):
    """Coordinates of ``a |> s <| b`` in a correspondence from ``separation_completion``."""
    coords = M.meta["coords"]
    k = M.algebra.total_dim
    n = coords.shape[1] // (k * k)
    v = np.zeros(n * k * k, dtype=complex)
    v[s * k * k:(s + 1) * k * k] = np.outer(a.vec(), b.vec()).ravel()
    return coords @ v


def tensor_by_map(algebra, theta, trace=None, allow_zero=False, label=None):
    """``A (x)_theta A`` for a completely positive ``theta``: separation of ``A (.) A``."""
    pres = SemiInnerPresentation(algebra, ["1(x)1"], lambda s, a, t: theta(a))
    return separation_completion(pres, trace=trace, allow_zero=allow_zero, label=label or "A(x)_theta A")


# ---------------------------------------------------------------------------
# relative tensor product
# ---------------------------------------------------------------------------

def fuse(M, N, tol_psd=None):
    """Relative tensor product ``M (x)_A N``.

    The balancing relations are null for the induced inner product, so
    separating the algebraic tensor product removes them.  Since
    ``xi (x) eta = sum u_i (x) <u_i | xi>_A |> eta`` for a right Pimsner-Popa
    basis ``{u_i}`` of ``M``, only the tensors ``u_i (x) eta`` are separated.
    The coordinate map of elementary tensors ``kron(xi, eta)`` is kept in
    ``meta["coords"]``.
    """
    if M.algebra != N.algebra:
        raise StructuralError("cannot fuse correspondences over different algebras")
    A = M.algebra
    k = A.total_dim
    m, n = M.carrier_dim, N.carrier_dim
    label = f"({M.label})(x)({N.label})"
    if m == 0 or n == 0:
        F = Correspondence(A, np.zeros((k, 0, 0)), np.zeros((k, 0, 0)), np.zeros((k, 0, 0)),
                           trace=M.trace, label=label)
        F.meta["coords"] = np.zeros((0, m * n), dtype=complex)
        return F
    if "right_pp" not in M.meta:
        # generic vectors have the largest right spans, so few of them are needed
        rng = np.random.default_rng(0)
        cands = [rng.normal(size=m) + 1j * rng.normal(size=m) for _ in range(m)] + M.basis_vectors()
        M.meta["right_pp"] = np.array(pp_basis(M, "right", candidates=cands, samples=0).vectors)
    us = M.meta["right_pp"]
    p = us.shape[0]
    # gu[q][i, j] is the e_q coefficient of <u_i | u_j>_A
    gu = np.einsum("ia,qab,jb->qij", us.conj(), M.inner, us)
    active = [q for q in range(k) if np.any(gu[q])]
    pre_gram = sum((np.kron(gu[q], N.gram @ N.left[q]) for q in active),
                   np.zeros((p * n, p * n), dtype=complex))
    # wl[r][q][j, i] is the e_q coefficient of <u_j | e_r |> u_i>_A
    wl = np.einsum("ja,qab,rbc,ic->rqji", us.conj(), M.inner, M.left, us)
    idp = np.eye(p)

    def apply_left(r, x):
        return sum((linalg.kron_apply(wl[r, q], N.left[q], x) for q in range(k) if np.any(wl[r, q])),
                   np.zeros((p * n, x.shape[1]), dtype=complex))

    def inner_apply(r, x):
        return sum((linalg.kron_apply(gu[q], N.inner[r] @ N.left[q], x) for q in active),
                   np.zeros_like(x, dtype=complex))

    F, coords, _ = _descend(A, M.trace, pre_gram, apply_left,
                            lambda r, x: linalg.kron_apply(idp, N.right[r], x),
                            inner_apply, tol_psd, allow_zero=True, label=label)
    # kron(xi, eta) -> sum_i e_i (x) <u_i | xi>_A |> eta
    cu = np.einsum("ia,qab->qib", us.conj(), M.inner)
    reduce = sum(np.kron(cu[q], N.left[q]) for q in range(k))
    F.meta["coords"] = coords @ reduce
    if M.distinguished and N.distinguished:
        F.distinguished = (F.meta["coords"] @ np.kron(M.distinguished[0], N.distinguished[0]),)
    return F


# ---------------------------------------------------------------------------
# Pimsner-Popa bases, generation, Mostow radii
# ---------------------------------------------------------------------------

@dataclass
class PPBasis:
    parent: Correspondence
    vectors: list
    side: str
    residual: float


def _right_span(M, vecs):
    return [M.right[k] @ v for v in vecs for k in range(M.algebra.total_dim)]


def _left_span(M, vecs):
    return [M.left[k] @ v for v in vecs for k in range(M.algebra.total_dim)]


def _frame_operator(M, vecs, side):
    A = M.algebra
    m = M.carrier_dim
    s = np.zeros((m, m), dtype=complex)
    if side == "right":
        for x in vecs:
            for k in range(A.total_dim):
                s += np.outer(M.right[k] @ x, np.conj(x) @ M.inner[k])
    else:
        w = M.trace.weights
        idx = A.basis_index()
        tr = unit_adjoint_index(A)
        for x in vecs:
            row = np.conj(x) @ M.gram
            for k, (b, _, _) in enumerate(idx):
                s += np.outer(M.left[k] @ x, row @ M.left[tr[k]]) / w[b]
    return s


def _whitened_frame(M, vecs, side):
    h, hi = M.whiten()
    s = _frame_operator(M, vecs, side)
    st = h @ s @ hi
    return 0.5 * (st + st.conj().T), h, hi


def _greedy_generators(M, candidates, side):
    span = _right_span if side == "right" else _left_span
    chosen = []
    r = 0
    for c in candidates:
        c = np.asarray(c, dtype=complex)
        if not np.any(c):
            continue
        trial = chosen + [c]
        rr = linalg.rank(np.column_stack(span(M, trial)))
        if rr > r:
            chosen, r = trial, rr
        if r == M.carrier_dim:
            break
    return chosen, r


def pp_basis(M, side="right", candidates=None, samples=20, seed=0, tol=None):
    """A Pimsner-Popa basis on the given side.

    Right: ``xi = sum u_i <| <u_i | xi>_A``.  Left: ``xi = sum _A<xi, v_i> |> v_i``
    with the trace-induced left inner product.  Generators are chosen
    greedily from ``candidates`` (default: distinguished vectors, then the
    carrier basis) and normalised by the inverse square root of their frame
    operator.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    m = M.carrier_dim
    if candidates is None:
        candidates = list(M.distinguished) + M.basis_vectors()
    gens, r = _greedy_generators(M, candidates, side)
    if r < m:
        raise PreconditionError("candidates do not generate the module")
    st, h, hi = _whitened_frame(M, gens, side)
    w, v = np.linalg.eigh(st)
    if w[0] <= eps(tol) * max(w[-1], 1.0):
        raise PreconditionError(f"frame operator numerically singular (min eigenvalue {w[0]:.2e})")
    s_inv_half = hi @ ((v / np.sqrt(w)) @ v.conj().T) @ h
    vecs = [s_inv_half @ g for g in gens]
    basis = PPBasis(M, vecs, side, 0.0)
    basis.residual = pp_residual(basis, samples=samples, seed=seed)
    return basis


def pp_reconstruct(basis, xi):
    M = basis.parent
    if basis.side == "right":
        return sum(M.ract(u, M.ip(u, xi)) for u in basis.vectors)
    return sum(M.lact(M.left_ip(xi, v), v) for v in basis.vectors)


def pp_residual(basis, samples=20, seed=0):
    """Worst relative reconstruction error over random vectors and the carrier basis."""
    M = basis.parent
    rng = np.random.default_rng(seed)
    m = M.carrier_dim
    tests = M.basis_vectors() + [rng.normal(size=m) + 1j * rng.normal(size=m) for _ in range(samples)]
    return max(np.linalg.norm(pp_reconstruct(basis, x) - x) / max(np.linalg.norm(x), 1e-300) for x in tests)


def bimodule_span(M, vecs):
    A = M.algebra
    cols = [M.left[k] @ (M.right[l] @ v) for v in vecs
            for k in range(A.total_dim) for l in range(A.total_dim)]
    return np.column_stack(cols) if cols else np.zeros((M.carrier_dim, 0))


def is_algebraic_generator(M, xi):
    """Whether ``span{a |> xi <| b} = M``."""
    xi = np.asarray(xi, dtype=complex)
    if M.carrier_dim == 0:
        return True
    if not np.any(xi):
        return False
    return linalg.rank(bimodule_span(M, [xi])) == M.carrier_dim


def generates(M, vecs, side="bimodule"):
    """Whether ``vecs`` span ``M`` under the actions on the given side."""
    if not len(vecs):
        return M.carrier_dim == 0
    if side == "right":
        cols = _right_span(M, vecs)
    elif side == "left":
        cols = _left_span(M, vecs)
    else:
        return linalg.rank(bimodule_span(M, vecs)) == M.carrier_dim
    return linalg.rank(np.column_stack(cols)) == M.carrier_dim


@dataclass
class SubBimodule:
    module: Correspondence
    inclusion: np.ndarray
    complement_projection: np.ndarray
    is_zero: bool
    is_proper: bool


def generated_subbimodule(M, xi):
    """The sub-bimodule ``K_xi`` spanned by ``a |> xi <| b`` and the projection onto its complement."""
    xi = np.asarray(xi, dtype=complex)
    m = M.carrier_dim
    A = M.algebra
    z = linalg.column_basis(bimodule_span(M, [xi])) if np.any(xi) else np.zeros((m, 0))
    if z.shape[1]:
        w = z @ linalg.psd_inv_sqrt(z.conj().T @ M.gram @ z)
    else:
        w = z
    wl = w.conj().T @ M.gram
    k = A.total_dim
    sub = Correspondence(A, [wl @ M.left[i] @ w for i in range(k)], [wl @ M.right[i] @ w for i in range(k)],
                         [w.conj().T @ M.inner[i] @ w for i in range(k)], trace=M.trace,
                         distinguished=[wl @ xi] if z.shape[1] else [], label=f"K_xi({M.label})")
    comp = np.eye(m) - w @ wl
    return SubBimodule(sub, w, comp, z.shape[1] == 0, z.shape[1] < m)


def _expansion(M, gens, target):
    """Coefficients expressing ``target`` as ``sum c e_p |> g <| e_q``; returns the l1 norm."""
    span = bimodule_span(M, gens)
    c, *_ = np.linalg.lstsq(span, target, rcond=None)
    resid = np.linalg.norm(span @ c - target)
    if resid > 1e-8 * max(np.linalg.norm(target), 1.0):
        raise PreconditionError("generators do not span the target vector")
    return float(np.sum(np.abs(c)))


def mostow_radius(M, gens, side="right"):
    """Perturbation radius within which ``gens`` keep generating ``M``.

    With ``S`` the frame operator of the generators on the given side, the
    minimal-norm module right inverse of the reconstruction map has norm
    ``||S^{-1/2}||``.  Any perturbation whose row operator has norm below
    ``1/(2 ||S^{-1/2}||)`` keeps the reconstruction map onto; a row of ``n``
    vectors each of norm below ``delta`` has norm below ``sqrt(n) delta``.
    Left-side radii are converted to the right norm through the smallest
    trace weight.  The bimodule side expands right and left Pimsner-Popa
    bases in terms of ``a |> g <| b`` and divides the smaller one-sided radius
    by the total coefficient norm.
    """
    gens = [np.asarray(g, dtype=complex) for g in gens]
    if side in ("left", "right"):
        if not generates(M, gens, side):
            raise PreconditionError(f"generators do not generate the module as a {side} module")
        st, _, _ = _whitened_frame(M, gens, side)
        lo = float(np.linalg.eigvalsh(st)[0])
        delta = np.sqrt(lo) / (2.0 * np.sqrt(len(gens)))
        if side == "left":
            delta *= np.sqrt(float(M.trace.weights.min()))
        return float(delta)
    if side != "bimodule":
        raise ValueError("side must be left, right or bimodule")
    if not generates(M, gens, "bimodule"):
        raise PreconditionError("generators do not generate the module as a bimodule")
    right = pp_basis(M, "right")
    left = pp_basis(M, "left")
    d_r = mostow_radius(M, right.vectors, "right")
    d_l = mostow_radius(M, left.vectors, "left")
    total = sum(_expansion(M, gens, u) for u in right.vectors) + sum(_expansion(M, gens, v) for v in left.vectors)
    return float(min(d_l, d_r) / total)


def random_perturbation(M, radius, rng):
    """Random vector with module norm strictly below ``radius``."""
    m = M.carrier_dim
    d = rng.normal(size=m) + 1j * rng.normal(size=m)
    nd = M.norm(d)
    return d * (radius * rng.uniform(0.0, 1.0) / nd) if nd > 0 else d


@dataclass
class OpennessReport:
    trials: int
    successes: int
    radius: float
    composite_delta: float
    failures: list = field(default_factory=list)

    @property
    def rate(self):
        return self.successes / self.trials if self.trials else None


def generator_openness_probe(M, xi, trials, radius, seed=0):
    """Sample perturbations of a generator and count how many still generate."""
    xi = np.asarray(xi, dtype=complex)
    if not is_algebraic_generator(M, xi):
        raise PreconditionError("xi is not an algebraic generator")
    delta = mostow_radius(M, [xi], "bimodule")
    rng = np.random.default_rng(seed)
    ok = 0
    fails = []
    for _ in range(trials):
        p = xi + random_perturbation(M, radius, rng)
        if is_algebraic_generator(M, p):
            ok += 1
        elif len(fails) < 5:
            fails.append(p)
    return OpennessReport(trials, ok, float(radius), delta, fails)


# ---------------------------------------------------------------------------
# bimodule maps
# ---------------------------------------------------------------------------

def intertwiners(M, N):
    """Basis of bimodule maps ``M -> N`` (row-major matrices ``N.dim x M.dim``)."""
    if M.algebra != N.algebra:
        raise StructuralError("correspondences over different algebras")
    m, n = M.carrier_dim, N.carrier_dim
    if m == 0 or n == 0:
        return []
    eqs = []
    for g in M.algebra.generators():
        for act_m, act_n in ((M.lmat(g), N.lmat(g)), (M.rmat(g), N.rmat(g))):
            eqs.append(np.kron(act_n, np.eye(m)) - np.kron(np.eye(n), act_m.T))
    ns = linalg.null_space(eqs)
    return [ns[:, j].reshape(n, m) for j in range(ns.shape[1])]


@dataclass
class EndomorphismAlgebra:
    basis: list
    structure: MatrixBlockAlgebra
    center_dim: int
    residuals: dict

    @property
    def dim(self):
        return len(self.basis)

    @property
    def is_abelian(self):
        return self.center_dim == self.dim


def endomorphism_algebra(M):
    """``End(_A M_A)`` with its block decomposition."""
    basis = intertwiners(M, M)
    h, hi = M.whiten()
    white = [h @ t @ hi for t in basis]
    flat = np.column_stack([t.ravel() for t in basis])
    q = linalg.column_basis(flat)

    def off_span(t):
        return float(np.linalg.norm(t.ravel() - q @ (q.conj().T @ t.ravel())))

    res = {"adjoint": max(off_span(M.module_adjoint(t)) for t in basis),
           "composition": max(off_span(s @ t) for s in basis for t in basis),
           "unit": off_span(np.eye(M.carrier_dim))}
    cen = matrix_algebra_center(white)
    struct = MatrixBlockAlgebra(sorted(cen.block_sizes), label="End")
    return EndomorphismAlgebra(basis, struct, cen.center_dim, res)


@dataclass
class BimodularIsometry:
    unitary: np.ndarray
    residual: float


def bimodular_isometry(M, N, seed=0, tol=None):
    """A unitary bimodule map ``M -> N``, or ``None`` when the two are not isomorphic."""
    if M.algebra != N.algebra:
        raise StructuralError("correspondences over different algebras")
    if M.carrier_dim != N.carrier_dim:
        return None
    if M.carrier_dim == 0:
        return BimodularIsometry(np.zeros((0, 0)), 0.0)
    basis = intertwiners(M, N)
    if not basis:
        return None
    hm, hmi = M.whiten()
    hn, hni = N.whiten()
    white = [hn @ t @ hmi for t in basis]
    stack = np.column_stack([t.ravel() for t in white])
    c, *_ = np.linalg.lstsq(stack, np.eye(M.carrier_dim).ravel(), rcond=None)
    rng = np.random.default_rng(seed)
    tries = [c] + [rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis)) for _ in range(4)]
    for coef in tries:
        t = (stack @ coef).reshape(M.carrier_dim, M.carrier_dim)
        s = np.linalg.svd(t, compute_uv=False)
        if s[-1] > 1e-8 * s[0]:
            u = hni @ linalg.polar_unitary(t) @ hm
            return BimodularIsometry(u, isometry_residual(M, N, u))
    return None


def isometry_residual(M, N, u):
    res = 0.0
    for k in range(M.algebra.total_dim):
        res = max(res, float(np.linalg.norm(N.left[k] @ u - u @ M.left[k], 2)),
                  float(np.linalg.norm(N.right[k] @ u - u @ M.right[k], 2)),
                  float(np.linalg.norm(u.conj().T @ N.inner[k] @ u - M.inner[k], 2)))
    return res
