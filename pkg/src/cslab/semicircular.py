"""A-valued semicircular systems on truncated Fock spaces.

A covariance ``eta = (eta_ij)`` defines the correspondence ``T`` spanned by
vectors ``a |> xi_i <| b`` with ``<xi_i | a |> xi_j>_A = eta_ij(a)``.  The Fock
space is ``A + T + T(x)T + ...`` cut at a depth ``d``, and
``X_i = l(xi_i) + l(xi_i)^*`` acts on it.  Words are evaluated against the
vacuum ``1^`` and rejected whenever the truncation could change the answer.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import AlgElement, LinearMapOnA, MatrixBlockAlgebra, TraceFunctional, choi_positivity, \
    operator_norm
from .bimodule import Correspondence, SemiInnerPresentation, fuse, generated_subbimodule, \
    generator_openness_probe, is_algebraic_generator, mostow_radius, pp_basis, presented_vector, \
    separation_completion, tensor_by_map
from .tolerances import DepthError, InputDataError, StructuralError, eps


class Covariance:
    """An ``I x I`` matrix of linear maps ``eta_ij: A -> A``."""

    def __init__(self, algebra, entries, elements=None):
        n = len(entries)
        if n < 1 or any(len(row) != n for row in entries):
            raise StructuralError("covariance entries must form a non-empty square grid")
        for row in entries:
            for m in row:
                if m.domain != algebra or m.codomain != algebra:
                    raise StructuralError("covariance entries must map the algebra to itself")
        self.algebra = algebra
        self.entries = [list(row) for row in entries]
        self.index_count = n
        self.elements = dict(elements or {})

    def __call__(self, i, j, a):
        return self.entries[i][j](a)

    @classmethod
    def from_functions(cls, algebra, fns):
        return cls(algebra, [[LinearMapOnA.from_function(f, algebra) for f in row] for row in fns])

    @classmethod
    def scalar(cls, value=1.0):
        """``A = C`` with one index and ``eta(a) = value * a``."""
        A = MatrixBlockAlgebra([1], label="C")
        return cls(A, [[LinearMapOnA(A, A, [[value]])]])

    def packaged(self, x):
        """Dense matrix of ``eta(x) = sum eta_ij(x) (x) e_ij``, index-major."""
        return np.block([[self.entries[i][j](x).dense() for j in range(self.index_count)]
                         for i in range(self.index_count)])

    def cp_certificate(self, tol_psd=None):
        return choi_positivity(self.packaged, self.algebra, tol_psd)

    def hermitian_residual(self):
        res = 0.0
        for e in self.algebra.basis():
            for i in range(self.index_count):
                for j in range(self.index_count):
                    diff = self.entries[i][j](e.adjoint()) - self.entries[j][i](e).adjoint()
                    res = max(res, operator_norm(diff))
        return res

    def validate(self, tol=None, tol_psd=None):
        """Raise ``InputDataError`` unless the covariance is hermitian and completely positive."""
        h = self.hermitian_residual()
        if h > eps(tol):
            raise InputDataError(f"covariance is not hermitian (residual {h:.3e})")
        cert = self.cp_certificate(tol_psd)
        if not cert.is_cp:
            raise InputDataError(f"covariance is not completely positive "
                                 f"(Choi minimal eigenvalue {cert.min_eigenvalue:.3e})")
        return cert


# ---------------------------------------------------------------------------
# the correspondence T and the Fock space
# ---------------------------------------------------------------------------

def build_T(cov, tol=None, tol_psd=None):
    """Separate the presentation ``<xi_i | a |> xi_j>_A = eta_ij(a)``.

    The distinguished vectors of the result are the classes of ``xi_i``.
    ``meta["postcondition_residual"]`` records the worst deviation of
    ``<xi_i | e_k |> xi_j>`` from ``eta_ij(e_k)`` over matrix units.
    """
    cov.validate(tol, tol_psd)
    A = cov.algebra
    pres = SemiInnerPresentation(A, [f"xi{i + 1}" for i in range(cov.index_count)],
                                 lambda s, a, t: cov(s, t, a))
    T = separation_completion(pres, tol_psd=tol_psd, allow_zero=True, label="T")
    res = 0.0
    for e in A.basis():
        for i, xi in enumerate(T.distinguished):
            for j, xj in enumerate(T.distinguished):
                res = max(res, operator_norm(T.ip(xi, T.lact(e, xj)) - cov(i, j, e)))
    T.meta["postcondition_residual"] = res
    return T


class TruncatedFock:
    """``A + T + T(x)T + ... + T^(x)d`` with eagerly built levels."""

    def __init__(self, T, depth, xis=None):
        if depth < 0:
            raise ValueError("depth must be non-negative")
        A = T.algebra
        self.T = T
        self.algebra = A
        self.depth = int(depth)
        self.xis = list(xis if xis is not None else T.distinguished)
        self.levels = [Correspondence.trivial(A)]
        self.coords = [None]
        for _ in range(self.depth):
            F = fuse(T, self.levels[-1])
            self.levels.append(F)
            self.coords.append(F.meta["coords"])
        self.vacuum = A.unit().vec()
        self.dims = [L.carrier_dim for L in self.levels]
        self.offsets = np.cumsum([0] + self.dims)

    @property
    def total_dim(self):
        return int(self.offsets[-1])

    def creation_block(self, xi, k):
        """Matrix of ``l(xi)`` from level ``k`` to ``k+1``."""
        d = self.dims[k]
        return self.coords[k + 1] @ np.kron(np.asarray(xi, dtype=complex)[:, None], np.eye(d))

    def annihilation_block(self, xi, k):
        """Matrix of ``l(xi)^*`` from level ``k+1`` to ``k``."""
        c = self.creation_block(xi, k)
        return self.levels[k].module_adjoint(c, self.levels[k + 1])

    def split(self, vec):
        return [vec[self.offsets[k]:self.offsets[k + 1]] for k in range(self.depth + 1)]

    def join(self, parts):
        return np.concatenate(parts)

    def vacuum_vector(self):
        parts = [np.zeros(d, dtype=complex) for d in self.dims]
        parts[0] = self.vacuum.astype(complex)
        return self.join(parts)

    def ip(self, v, w):
        """A-valued inner product of two Fock vectors (levels are orthogonal)."""
        pv, pw = self.split(v), self.split(w)
        return sum((L.ip(a, b) for L, a, b in zip(self.levels, pv, pw)), self.algebra.zero())

    def tau_ip(self, v, w):
        return sum(L.tau_ip(a, b) for L, a, b in zip(self.levels, self.split(v), self.split(w)))


@dataclass
class FockOperator:
    """Block operator on a truncated Fock space; ``blocks[(target, source)]``."""

    parent: TruncatedFock
    blocks: dict
    degree: int = 0

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            out = {}
            for (t, s), m in self.blocks.items():
                for (t2, s2), m2 in other.blocks.items():
                    if s == t2:
                        out[(t, s2)] = out.get((t, s2), 0) + m @ m2
            return FockOperator(self.parent, out, self.degree + other.degree)
        parts = self.parent.split(np.asarray(other, dtype=complex))
        res = [np.zeros(d, dtype=complex) for d in self.parent.dims]
        for (t, s), m in self.blocks.items():
            res[t] = res[t] + m @ parts[s]
        return self.parent.join(res)

    def __add__(self, other):
        out = dict(self.blocks)
        for key, m in other.blocks.items():
            out[key] = out[key] + m if key in out else m
        return FockOperator(self.parent, out, self.degree if self.degree == other.degree else 0)

    def __mul__(self, c):
        return FockOperator(self.parent, {k: c * m for k, m in self.blocks.items()}, self.degree)

    __rmul__ = __mul__

    def adjoint(self):
        F = self.parent
        out = {}
        for (t, s), m in self.blocks.items():
            out[(s, t)] = F.levels[s].module_adjoint(m, F.levels[t])
        return FockOperator(F, out, -self.degree)

    def dense(self):
        F = self.parent
        out = np.zeros((F.total_dim, F.total_dim), dtype=complex)
        o = F.offsets
        for (t, s), m in self.blocks.items():
            out[o[t]:o[t + 1], o[s]:o[s + 1]] += m
        return out

    def adjoint_residual(self, samples=5, seed=0):
        """Worst ``||<f v | w>_A - <v | f^* w>_A||`` on random vectors."""
        F = self.parent
        adj = self.adjoint()
        rng = np.random.default_rng(seed)
        res = 0.0
        for _ in range(samples):
            v = rng.normal(size=F.total_dim) + 1j * rng.normal(size=F.total_dim)
            w = rng.normal(size=F.total_dim) + 1j * rng.normal(size=F.total_dim)
            res = max(res, operator_norm(F.ip(self @ v, w) - F.ip(v, adj @ w)))
        return res


def creation(F, xi):
    """``l(xi)``: level ``k`` to ``k+1`` for ``k < d``; undefined on level ``d``."""
    return FockOperator(F, {(k + 1, k): F.creation_block(xi, k) for k in range(F.depth)}, 1)


def annihilation(F, xi):
    return FockOperator(F, {(k, k + 1): F.annihilation_block(xi, k) for k in range(F.depth)}, -1)


def semicircular_operator(F, i):
    if not 0 <= i < len(F.xis):
        raise IndexError(f"index {i} out of range for {len(F.xis)} semicircular generators")
    return creation(F, F.xis[i]) + annihilation(F, F.xis[i])


def left_multiplication(F, a):
    return FockOperator(F, {(k, k): L.lmat(a) for k, L in enumerate(F.levels)})


def right_multiplication(F, a):
    return FockOperator(F, {(k, k): L.rmat(a) for k, L in enumerate(F.levels)})


# ---------------------------------------------------------------------------
# words and moments
# ---------------------------------------------------------------------------

_X_TOKEN = re.compile(r"X(\d*)")


def parse_word(word, algebra, index_count, elements=None):
    """Turn a word into ``[("a", AlgElement) | ("X", i)]``.

    ``word`` is a string of whitespace-separated tokens or a list mixing
    tokens, ``AlgElement`` objects and integer indices (0-based ``X_i``).
    String tokens: ``X`` (only when there is a single index), ``X1``,
    ``X2``, ... (1-based), ``1`` for the unit, or a key of ``elements``.
    """
    elements = elements or {}
    if isinstance(word, str):
        word = word.split()
    ops = []
    for tok in word:
        if isinstance(tok, AlgElement):
            if tok.parent != algebra:
                raise StructuralError("word element from a different algebra")
            ops.append(("a", tok))
        elif isinstance(tok, (int, np.integer)):
            if not 0 <= tok < index_count:
                raise IndexError(f"X index {tok} out of range")
            ops.append(("X", int(tok)))
        elif tok == "1":
            ops.append(("a", algebra.unit()))
        elif tok in elements:
            ops.append(("a", elements[tok]))
        else:
            m = _X_TOKEN.fullmatch(tok)
            if m is None:
                raise ValueError(f"unknown word token {tok!r}")
            if m.group(1):
                i = int(m.group(1)) - 1
            elif index_count == 1:
                i = 0
            else:
                raise ValueError("bare 'X' is ambiguous with several indices")
            if not 0 <= i < index_count:
                raise IndexError(f"token {tok!r} out of range")
            ops.append(("X", i))
    return ops


def required_depth(ops, vacuum_exact=False):
    m = sum(1 for kind, _ in ops if kind == "X")
    return math.ceil(m / 2) if vacuum_exact else m


def apply_word(F, ops, vector=None, vacuum_exact=False):
    """Apply a parsed word (rightmost operator first) to ``vector`` (default ``1^``).

    In vacuum-exact mode components that cannot return to the vacuum with
    the remaining ``X`` letters are dropped, which is exact for the vacuum
    expectation only.
    """
    need = required_depth(ops, vacuum_exact)
    if need > F.depth:
        raise DepthError(f"word needs depth {need}, truncation has {F.depth}", need)
    v = F.split(F.vacuum_vector() if vector is None else np.asarray(vector, dtype=complex))
    v = [np.array(p, dtype=complex) for p in v]
    remaining = sum(1 for kind, _ in ops if kind == "X")
    for kind, x in reversed(ops):
        if kind == "a":
            v = [L.lmat(x) @ p for L, p in zip(F.levels, v)]
            continue
        remaining -= 1
        xi = F.xis[x]
        new = [np.zeros(d, dtype=complex) for d in F.dims]
        for k, p in enumerate(v):
            if not np.any(p):
                continue
            if k > 0:
                new[k - 1] += F.annihilation_block(xi, k - 1) @ p
            if vacuum_exact and k + 1 > remaining:
                continue
            if k == F.depth:
                raise DepthError(f"creation out of the top level {F.depth}", F.depth + 1)
            new[k + 1] += F.creation_block(xi, k) @ p
        v = new
    return F.join(v)


def word_moment(F, word, vacuum_exact=False, elements=None):
    """``E(a_0 X_i1 a_1 ... X_im a_m) = <1^ | word 1^>_A``."""
    ops = parse_word(word, F.algebra, len(F.xis), elements)
    out = apply_word(F, ops, vacuum_exact=vacuum_exact)
    return F.levels[0].ip(F.vacuum.astype(complex), F.split(out)[0])


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


# ---------------------------------------------------------------------------
# hypotheses of the discreteness criterion
# ---------------------------------------------------------------------------

@dataclass
class TracialityReport:
    residual: float
    passed: bool
    witness: dict = field(default=None)
    conjugation_residual: float = None


def traciality_check(cov, trace=None, samples=20, seed=0, tol=None):
    """Check ``tau(eta_ij(x) y) = tau(x eta_ji(y))`` on random ``x, y``.

    When it holds, the conjugation ``a |> xi_i <| b -> b^* |> xi_i <| a^*`` on ``T``
    is also checked to be a conjugate-linear isometry for the trace form.
    """
    A = cov.algebra
    tau = trace or TraceFunctional(A)
    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    n = cov.index_count
    for _ in range(samples):
        x, y = A.random_element(rng), A.random_element(rng)
        for i in range(n):
            for j in range(n):
                r = abs(tau(cov(i, j, x) * y) - tau(x * cov(j, i, y)))
                if r > worst:
                    worst, wit = r, {"i": i, "j": j, "x": x, "y": y}
    rep = TracialityReport(float(worst), worst <= eps(tol), wit)
    if rep.passed:
        T = build_T(cov)
        if trace is not None:
            T = Correspondence(A, T.left, T.right, T.inner, trace=tau, distinguished=T.distinguished, meta=T.meta)
        res = 0.0
        for _ in range(samples):
            terms = [(int(rng.integers(n)), A.random_element(rng), A.random_element(rng)) for _ in range(3)]
            v = sum(presented_vector(T, s, a, b) for s, a, b in terms)
            jv = sum(presented_vector(T, s, b.adjoint(), a.adjoint()) for s, a, b in terms)
            nv = T.tau_ip(v, v).real
            res = max(res, abs(T.tau_ip(jv, jv).real - nv) / (1.0 + nv))
        rep.conjugation_residual = float(res)
    return rep


def fgp_and_generator_check(cov, trials=200, seed=0):
    """For each ``i``: ``A (x)_{eta_ii} A`` is fgp and generated by ``[1 (x) 1]``."""
    A = cov.algebra
    out = []
    for i in range(cov.index_count):
        M = tensor_by_map(A, cov.entries[i][i], allow_zero=True, label=f"A(x)_eta{i + 1}A")
        rec = {"index": i, "carrier_dim": M.carrier_dim}
        if M.carrier_dim == 0:
            rec.update(fgp=True, pp_basis_size=0, pp_residual=0.0, generator=True, generated_dim=0)
            out.append(rec)
            continue
        basis = pp_basis(M, "right")
        xi = M.distinguished[0]
        gen = is_algebraic_generator(M, xi)
        sub = generated_subbimodule(M, xi)
        rec.update(fgp=True, pp_basis_size=len(basis.vectors), pp_residual=basis.residual,
                   generator=gen, generated_dim=sub.module.carrier_dim)
        if gen:
            delta = mostow_radius(M, [xi], "bimodule")
            probe = generator_openness_probe(M, xi, trials, delta, seed)
            rec.update(mostow_radius=delta, openness_rate=probe.rate)
        out.append(rec)
    return out


@dataclass
class CentralVectorReport:
    level_bases: list
    level_dims: list
    center_dim: int
    irreducible_truncated: bool
    scalar_vacuum_only: bool


def central_subspace(M, elements=None):
    """Basis (columns) of ``{g : a |> g = g <| a}`` for ``a`` in ``elements``."""
    elements = elements or M.algebra.generators()
    if M.carrier_dim == 0:
        return np.zeros((0, 0), dtype=complex)
    return linalg.null_space([M.lmat(a) - M.rmat(a) for a in elements])


def central_vectors(F):
    """A-central vectors of the truncated Fock space, level by level.

    Level 0 always contains ``Z(A) 1^``.  The verdict holds when no other
    level carries a non-zero central vector, i.e. the central vectors are
    exactly ``Z(A) 1^``; ``scalar_vacuum_only`` additionally asks for
    ``C 1^``.
    """
    bases = [central_subspace(L) for L in F.levels]
    dims = [b.shape[1] for b in bases]
    zdim = len([n for n in F.algebra.block_sizes])
    verdict = dims[0] == zdim and all(d == 0 for d in dims[1:])
    return CentralVectorReport(bases, dims, zdim, verdict, verdict and zdim == 1)


@dataclass
class SpanningReport:
    level_dims: list
    reached: list
    total_dim: int
    span_dim: int

    @property
    def deficits(self):
        return [d - r for d, r in zip(self.level_dims, self.reached)]

    @property
    def full(self):
        return self.span_dim == self.total_dim


def spanning_check(F, cov=None):
    """Do words of length at most ``d`` in ``A`` and the ``X_i`` span the truncation?"""
    A = F.algebra
    xs = [semicircular_operator(F, i).dense() for i in range(len(F.xis))]
    lefts = [left_multiplication(F, e).dense() for e in A.basis()]
    vac = F.vacuum_vector()
    span = linalg.column_basis(np.column_stack([m @ vac for m in lefts]))
    for _ in range(F.depth):
        cands = [span] + [lm @ (x @ span) for x in xs for lm in lefts]
        span = linalg.column_basis(np.column_stack(cands))
    reached = []
    for k in range(F.depth + 1):
        o0, o1 = F.offsets[k], F.offsets[k + 1]
        others = np.delete(span, np.s_[o0:o1], axis=0)
        reached.append(span.shape[1] - linalg.rank(others) if others.size else span.shape[1])
    return SpanningReport(list(F.dims), reached, F.total_dim, span.shape[1])
