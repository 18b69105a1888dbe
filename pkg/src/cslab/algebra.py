"""Finite-dimensional C*-algebras as direct sums of full matrix algebras.

An algebra ``MatrixBlockAlgebra([n1, ..., nr])`` is ``M_n1 + ... + M_nr``.
Elements are stored blockwise; the vectorisation used by linear maps
concatenates the row-major flattenings of the blocks, so coordinate ``k``
is the coefficient of the ``k``-th matrix unit.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .tolerances import ConvergenceError, StructuralError, eps, eps_psd


class MatrixBlockAlgebra:
    """The C*-algebra ``M_{n_1}(C) + ... + M_{n_r}(C)``."""

    def __init__(self, block_sizes, label=None):
        sizes = tuple(int(n) for n in block_sizes)
        if not sizes or any(n < 1 for n in sizes):
            raise StructuralError(f"block sizes must be positive and non-empty, got {sizes}")
        self.block_sizes = sizes
        self.label = label or "+".join("C" if n == 1 else f"M{n}" for n in sizes)
        self.total_dim = sum(n * n for n in sizes)
        self.dense_size = sum(sizes)
        self._offsets = np.cumsum([0] + [n * n for n in sizes])
        self._dense_offsets = np.cumsum([0] + list(sizes))
        self._units = None

    @classmethod
    def from_label(cls, label):
        """Parse labels such as ``"C"``, ``"C^3"``, ``"M2"`` or ``"C+M2"``."""
        sizes = []
        for part in label.replace(" ", "").split("+"):
            m = re.fullmatch(r"C(?:\^?(\d+))?|M(\d+)", part)
            if m is None:
                raise StructuralError(f"cannot parse algebra label {label!r}")
            if m.group(2):
                sizes.append(int(m.group(2)))
            else:
                sizes.extend([1] * int(m.group(1) or 1))
        return cls(sizes, label=label)

    def __eq__(self, other):
        return isinstance(other, MatrixBlockAlgebra) and self.block_sizes == other.block_sizes

    def __hash__(self):
        return hash(self.block_sizes)

    def __repr__(self):
        return f"MatrixBlockAlgebra({list(self.block_sizes)}, label={self.label!r})"

    @property
    def n_blocks(self):
        return len(self.block_sizes)

    @property
    def is_simple(self):
        return self.n_blocks == 1

    @property
    def is_commutative(self):
        return all(n == 1 for n in self.block_sizes)

    # -- constructors ----------------------------------------------------
    def element(self, blocks):
        return AlgElement(self, blocks)

    def unit(self):
        return AlgElement(self, [np.eye(n) for n in self.block_sizes])

    def zero(self):
        return AlgElement(self, [np.zeros((n, n)) for n in self.block_sizes])

    def scalar(self, c):
        return self.unit() * c

    def from_vector(self, vec):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if vec.size != self.total_dim:
            raise StructuralError(f"vector of length {vec.size} for algebra of dim {self.total_dim}")
        return AlgElement(self, [vec[self._offsets[k]:self._offsets[k + 1]].reshape(n, n)
                                 for k, n in enumerate(self.block_sizes)])

    def from_dense(self, mat):
        """Read the diagonal blocks of a ``dense_size`` square matrix."""
        o = self._dense_offsets
        return AlgElement(self, [mat[o[k]:o[k + 1], o[k]:o[k + 1]] for k in range(self.n_blocks)])

    def diag(self, values):
        """Element with the given diagonal entries (in dense order)."""
        return self.from_dense(np.diag(np.asarray(values, dtype=complex)))

    def basis(self):
        """Matrix units, in vectorisation order."""
        if self._units is None:
            eye = np.eye(self.total_dim)
            self._units = [self.from_vector(eye[k]) for k in range(self.total_dim)]
        return list(self._units)

    def basis_index(self):
        """List of ``(block, i, j)`` triples in vectorisation order."""
        return [(b, i, j) for b, n in enumerate(self.block_sizes) for i in range(n) for j in range(n)]

    def central_projections(self):
        return [AlgElement(self, [np.eye(n) if k == b else np.zeros((n, n))
                                  for k, n in enumerate(self.block_sizes)])
                for b in range(self.n_blocks)]

    def generators(self):
        """Two elements that generate the algebra as a unital algebra."""
        n = self.dense_size
        d = np.diag(np.arange(1, n + 1, dtype=float))
        s = np.zeros((n, n))
        for k, m in enumerate(self.block_sizes):
            o = self._dense_offsets[k]
            for i in range(m - 1):
                s[o + i, o + i + 1] = s[o + i + 1, o + i] = 1.0
        return [self.from_dense(d), self.from_dense(s)]

    # -- random sampling ---------------------------------------------------
    def random_element(self, rng):
        return AlgElement(self, [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
                                 for n in self.block_sizes])

    def random_positive(self, rng):
        x = self.random_element(rng)
        return x.adjoint() * x

    def random_unitary(self, rng):
        return AlgElement(self, [linalg.random_unitary(n, rng) for n in self.block_sizes])

    # -- matrices of multiplication on the vectorised space -----------------
    def left_mult_matrix(self, a):
        return np.column_stack([(a * e).vec() for e in self.basis()])

    def right_mult_matrix(self, a):
        return np.column_stack([(e * a).vec() for e in self.basis()])

    def to_json(self):
        return {"label": self.label, "blocks": list(self.block_sizes)}


class AlgElement:
    """An element of a ``MatrixBlockAlgebra``, stored as one dense block per summand."""

    __slots__ = ("parent", "blocks")

    def __init__(self, parent, blocks):
        blocks = tuple(np.array(b, dtype=complex) for b in blocks)
        if len(blocks) != parent.n_blocks or any(
                b.shape != (n, n) for b, n in zip(blocks, parent.block_sizes)):
            raise StructuralError(
                f"block shapes {[b.shape for b in blocks]} do not match {parent.block_sizes}")
        for b in blocks:
            b.flags.writeable = False
        self.parent = parent
        self.blocks = blocks

    def _check(self, other):
        if not isinstance(other, AlgElement) or other.parent != self.parent:
            raise StructuralError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgElement(self.parent, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return AlgElement(self.parent, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgElement(self.parent, [-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            self._check(other)
            return AlgElement(self.parent, [a @ b for a, b in zip(self.blocks, other.blocks)])
        return AlgElement(self.parent, [a * other for a in self.blocks])

    def __rmul__(self, other):
        if isinstance(other, AlgElement):
            return other.__mul__(self)
        return AlgElement(self.parent, [other * a for a in self.blocks])

    def adjoint(self):
        return AlgElement(self.parent, [a.conj().T for a in self.blocks])

    @property
    def H(self):
        return self.adjoint()

    def vec(self):
        return np.concatenate([b.ravel() for b in self.blocks])

    def dense(self):
        n = self.parent.dense_size
        out = np.zeros((n, n), dtype=complex)
        o = self.parent._dense_offsets
        for k, b in enumerate(self.blocks):
            out[o[k]:o[k + 1], o[k]:o[k + 1]] = b
        return out

    def norm(self):
        return operator_norm(self)

    def allclose(self, other, atol=1e-9):
        self._check(other)
        return all(np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.blocks, other.blocks))

    def __repr__(self):
        return f"AlgElement({self.parent.label}, {[b.tolist() for b in self.blocks]})"

    def to_json(self):
        return {"algebra": self.parent.label,
                "blocks": [[[[float(z.real), float(z.imag)] for z in row] for row in b]
                           for b in self.blocks]}


def element_arith(x, y, kind):
    """Blockwise arithmetic: ``kind`` is one of add, mul, adjoint, scale.

    For ``adjoint`` the second argument is ignored; for ``scale`` it is a
    complex scalar.
    """
    if kind == "add":
        return x + y
    if kind == "mul":
        x._check(y)
        return x * y
    if kind == "adjoint":
        return x.adjoint()
    if kind == "scale":
        return x * complex(y)
    raise ValueError(f"unknown kind {kind!r}")


def operator_norm(x):
    """C*-norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


class TraceFunctional:
    """A faithful tracial state ``x -> sum_k w_k Tr(x_k)``.

    The default weights give the normalised trace of the block-diagonal
    matrix, ``w_k = 1 / sum(n)``.
    """

    def __init__(self, parent, weights=None):
        if weights is None:
            weights = [1.0 / parent.dense_size] * parent.n_blocks
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (parent.n_blocks,) or np.any(weights <= 0):
            raise StructuralError("trace weights must be positive, one per block")
        total = float(np.dot(weights, parent.block_sizes))
        self.parent = parent
        self.weights = weights / total

    def __call__(self, x):
        return complex(sum(w * np.trace(b) for w, b in zip(self.weights, x.blocks)))

    def coefficients(self):
        """Vector ``t`` with ``tau(x) = t . vec(x)``."""
        return np.concatenate([w * np.eye(n).ravel()
                               for w, n in zip(self.weights, self.parent.block_sizes)])


class LinearMapOnA:
    """A linear map between block algebras, acting on vectorised elements."""

    def __init__(self, domain, codomain, matrix, star_preserving=False):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (codomain.total_dim, domain.total_dim):
            raise StructuralError(
                f"matrix shape {matrix.shape} != ({codomain.total_dim}, {domain.total_dim})")
        matrix.flags.writeable = False
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix
        self.star_preserving = star_preserving

    @classmethod
    def from_function(cls, fn, domain, codomain=None, star_preserving=False):
        codomain = codomain or domain
        cols = [fn(e).vec() for e in domain.basis()]
        return cls(domain, codomain, np.column_stack(cols), star_preserving)

    @classmethod
    def identity(cls, algebra):
        return cls(algebra, algebra, np.eye(algebra.total_dim), star_preserving=True)

    def __call__(self, x):
        if x.parent != self.domain:
            raise StructuralError("argument is not in the domain")
        return self.codomain.from_vector(self.matrix @ x.vec())

    def __matmul__(self, other):
        """Composition ``self o other``."""
        if other.codomain != self.domain:
            raise StructuralError("maps are not composable")
        return LinearMapOnA(other.domain, self.codomain, self.matrix @ other.matrix,
                            self.star_preserving and other.star_preserving)

    def __add__(self, other):
        return LinearMapOnA(self.domain, self.codomain, self.matrix + other.matrix)

    def __mul__(self, c):
        return LinearMapOnA(self.domain, self.codomain, self.matrix * c)

    __rmul__ = __mul__

    def star_residual(self):
        """``max ||theta(x*) - theta(x)*||`` over the matrix units."""
        return max(operator_norm(self(e.adjoint()) - self(e).adjoint()) for e in self.domain.basis())

    def to_json(self):
        return {"domain": self.domain.label, "codomain": self.codomain.label,
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]}


# ---------------------------------------------------------------------------
# complete positivity
# ---------------------------------------------------------------------------

@dataclass
class ChoiCertificate:
    is_cp: bool
    min_eigenvalue: float
    choi_blocks: list = field(repr=False, default_factory=list)


def choi_matrices(fn, domain):
    """Choi matrices ``sum_ij e_ij (x) fn(e_ij)``, one per block of ``domain``.

    ``fn`` maps an ``AlgElement`` of ``domain`` to a dense square matrix.
    """
    out = []
    for b, n in enumerate(domain.block_sizes):
        pieces = {}
        for i in range(n):
            for j in range(n):
                blocks = [np.zeros((m, m)) for m in domain.block_sizes]
                blocks[b] = np.zeros((n, n))
                blocks[b][i, j] = 1.0
                pieces[i, j] = np.asarray(fn(AlgElement(domain, blocks)), dtype=complex)
        out.append(np.block([[pieces[i, j] for j in range(n)] for i in range(n)]))
    return out


def choi_positivity(theta, domain=None, tol_psd=None):
    """Certify complete positivity from the minimal Choi eigenvalue.

    A map on a direct sum is CP iff its restriction to every summand is, so
    one Choi matrix per block suffices.  ``theta`` is a ``LinearMapOnA`` or,
    together with ``domain``, any callable returning dense matrices.
    """
    if isinstance(theta, LinearMapOnA):
        domain = theta.domain
        fn = lambda x: theta(x).dense()  # noqa: E731
    else:
        fn = theta
    blocks = choi_matrices(fn, domain)
    lo = min(float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0]) for c in blocks)
    return ChoiCertificate(lo >= -eps_psd(tol_psd), lo, blocks)


# ---------------------------------------------------------------------------
# *-closure and centres
# ---------------------------------------------------------------------------

def star_closure(mats, max_rounds=20, rtol=linalg.RANK_RTOL):
    """Orthonormal basis (as flattened columns) of the unital *-algebra generated by ``mats``."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    n = mats[0].shape[0]
    seed = [np.eye(n)] + mats + [m.conj().T for m in mats]
    q = linalg.column_basis(np.column_stack([m.ravel() for m in seed]), rtol)
    for _ in range(max_rounds):
        elems = [q[:, k].reshape(n, n) for k in range(q.shape[1])]
        prods = np.column_stack([(a @ b).ravel() for a in elems for b in elems])
        resid = prods - q @ (q.conj().T @ prods)
        scale = max(np.linalg.norm(prods, axis=0).max(), 1.0)
        if np.linalg.norm(resid, axis=0).max() <= 1e-10 * scale:
            return q
        q = linalg.column_basis(np.column_stack([q, resid]), rtol)
    raise ConvergenceError(f"*-closure did not stabilise within {max_rounds} rounds")


@dataclass
class CenterReport:
    center_basis: list
    projections: list
    block_sizes: list
    is_simple: bool
    algebra_dim: int
    residual: float

    @property
    def center_dim(self):
        return len(self.center_basis)


def matrix_algebra_center(mats, max_rounds=20, tol=None):
    """Centre and minimal central projections of the *-algebra generated by ``mats``."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    n = mats[0].shape[0]
    q = star_closure(mats, max_rounds)
    elems = [q[:, k].reshape(n, n) for k in range(q.shape[1])]
    gens = mats + [m.conj().T for m in mats]
    eqs = [np.column_stack([(b @ s - s @ b).ravel() for b in elems]) for s in gens]
    coeffs = linalg.null_space(eqs)
    center = [sum(c * b for c, b in zip(col, elems)) for col in coeffs.T]

    herm = []
    for z in center:
        herm.extend([z + z.conj().T, 1j * (z - z.conj().T)])
    rng = np.random.default_rng(20240917)
    h = sum(rng.uniform(1.0, 2.0) * m for m in herm) if herm else np.eye(n)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    spread = max(float(np.abs(w).max()), 1.0)
    cuts = np.nonzero(np.diff(w) > 1e-7 * spread)[0] + 1
    groups = np.split(np.arange(n), cuts)
    projs = [v[:, g] @ v[:, g].conj().T for g in groups]

    flat = np.column_stack([b.ravel() for b in elems])
    sizes = [int(round(np.sqrt(linalg.rank(np.column_stack([(p @ b).ravel() for b in elems])))))
             for p in projs]
    order = sorted(range(len(projs)), key=lambda k: (
        sizes[k], tuple(np.round(projs[k].real, 8).ravel()) + tuple(np.round(projs[k].imag, 8).ravel())))
    projs = [projs[k] for k in order]
    sizes = [sizes[k] for k in order]

    res = 0.0
    for i, p in enumerate(projs):
        res = max(res, float(np.linalg.norm(p - (flat @ (flat.conj().T @ p.ravel())).reshape(n, n))))
        for g in gens:
            res = max(res, float(np.linalg.norm(p @ g - g @ p)))
        for j, r in enumerate(projs):
            target = p if i == j else 0.0
            res = max(res, float(np.linalg.norm(p @ r - target)))
    res = max(res, float(np.linalg.norm(sum(projs) - np.eye(n))))
    if res > 1e3 * eps(tol):
        raise ConvergenceError(f"central projections inconsistent (residual {res:.2e})")
    return CenterReport(center, projs, sizes, len(center) == 1, q.shape[1], res)


def center_analysis(algebra, elements=None, max_rounds=20, tol=None):
    """Centre of the unital *-subalgebra of ``algebra`` generated by ``elements``.

    ``elements`` defaults to the whole algebra.  Returned centre basis and
    projections are ``AlgElement`` objects of ``algebra``.
    """
    if elements is None:
        elements = algebra.generators()
    for x in elements:
        if x.parent != algebra:
            raise StructuralError("generator not in algebra")
    rep = matrix_algebra_center([x.dense() for x in elements], max_rounds, tol)
    rep.center_basis = [algebra.from_dense(z) for z in rep.center_basis]
    rep.projections = [algebra.from_dense(p) for p in rep.projections]
    return rep


# ---------------------------------------------------------------------------
# conditional expectations
# ---------------------------------------------------------------------------

@dataclass
class ExpectationReport:
    ok: bool
    residuals: dict
    failures: list
    faithful: bool
    kernel_dim: int


def expectation_axioms(expect, big_basis, sub_basis, samples=20, seed=0, tol=None, tol_psd=None):
    """Check that ``expect`` is a faithful conditional expectation onto ``span(sub_basis)``.

    All algebras are given by spanning families of matrices in a faithful
    *-representation (adjoint = conjugate transpose).  ``expect`` maps such a
    matrix to a matrix.  When ``expect`` is a ``LinearMapOnA`` the bases may
    be ``AlgElement`` lists of its domain.
    """
    if isinstance(expect, LinearMapOnA):
        dom = expect.domain
        fn = lambda m: expect(dom.from_dense(m)).dense()  # noqa: E731
        if big_basis is None:
            big_basis = dom.basis()
    else:
        fn = expect
    big = [b.dense() if isinstance(b, AlgElement) else np.asarray(b, dtype=complex) for b in big_basis]
    sub = [b.dense() if isinstance(b, AlgElement) else np.asarray(b, dtype=complex) for b in sub_basis]
    n = big[0].shape[0]
    tol, tol_psd = eps(tol), eps_psd(tol_psd)
    rng = np.random.default_rng(seed)
    sub_q = linalg.column_basis(np.column_stack([s.ravel() for s in sub]))

    def rand(basis):
        c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        return sum(ci * b for ci, b in zip(c, basis))

    failures = []
    res = {"unit": float(np.linalg.norm(fn(np.eye(n)) - np.eye(n), 2))}
    if res["unit"] > tol:
        failures.append({"axiom": "unit", "residual": res["unit"], "witness": None})
    worst = {"range": 0.0, "idempotent": 0.0, "bimodular": 0.0, "positive": 0.0}
    wit = {}
    for _ in range(samples):
        x, a, a2 = rand(big), rand(sub), rand(sub)
        scale = 1.0 + np.linalg.norm(x, 2) * (1.0 + np.linalg.norm(a, 2) * np.linalg.norm(a2, 2))
        ex = fn(x)
        r = np.linalg.norm(ex.ravel() - sub_q @ (sub_q.conj().T @ ex.ravel())) / scale
        checks = {
            "range": r,
            "idempotent": np.linalg.norm(fn(a) - a, 2) / (1.0 + np.linalg.norm(a, 2)),
            "bimodular": np.linalg.norm(fn(a @ x @ a2) - a @ ex @ a2, 2) / scale,
        }
        pos = fn(x.conj().T @ x)
        lo = float(np.linalg.eigvalsh(0.5 * (pos + pos.conj().T))[0])
        checks["positive"] = max(0.0, -lo) / (1.0 + np.linalg.norm(x, 2) ** 2)
        for k, v in checks.items():
            if v > worst[k]:
                worst[k] = float(v)
                wit[k] = {"x": x, "a": a, "a2": a2}
    res.update(worst)
    for k in ("range", "idempotent", "bimodular"):
        if worst[k] > tol:
            failures.append({"axiom": k, "residual": worst[k], "witness": wit[k]})
    if worst["positive"] > tol_psd:
        failures.append({"axiom": "positive", "residual": worst["positive"], "witness": wit["positive"]})

    gram = np.array([[np.trace(fn(p.conj().T @ q)) / n for q in big] for p in big])
    gram = 0.5 * (gram + gram.conj().T)
    w = np.linalg.eigvalsh(gram)
    rank_b = linalg.rank(np.column_stack([b.ravel() for b in big]))
    kernel = int(np.sum(w <= tol_psd * max(w[-1], 1.0))) - (len(big) - rank_b)
    faithful = kernel == 0
    res["faithful_min_eigenvalue"] = float(w[len(big) - rank_b]) if rank_b else 0.0
    if not faithful:
        failures.append({"axiom": "faithful", "residual": kernel, "witness": None})
    return ExpectationReport(not failures, res, failures, faithful, kernel)
