"""Crossed products of block algebras by finite groups.

An action ``alpha`` of a finite group on ``A = M_{n_1} + ... + M_{n_r}`` is
stored as one ``(perm, unitaries)`` pair per group element: block ``j`` of
``alpha_g(x)`` is ``U_j x_{perm[j]} U_j^*``.

Elements of ``A x| G`` are coefficient lists ``x = sum_g x_g u_g`` with
``(x u_g)(y u_h) = x alpha_g(y) u_{gh}``.  Norms and spectral questions go
through the regular representation on ``C^N (x) l^2(G)``, where
``pi(a) delta_h = alpha_{h^-1}(a) delta_h`` and ``lambda_g delta_h = delta_{gh}``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import linalg
from .algebra import AlgElement, LinearMapOnA, MatrixBlockAlgebra, expectation_axioms, \
    matrix_algebra_center, operator_norm
from .bimodule import Correspondence, endomorphism_algebra
from .tolerances import InputDataError, PreconditionError, StructuralError, eps


class FiniteGroup:
    """A finite group given by its multiplication table (``mul[g][h] = gh``)."""

    def __init__(self, mul, labels=None):
        mul = np.asarray(mul, dtype=int)
        n = mul.shape[0]
        if mul.shape != (n, n) or n < 1:
            raise StructuralError("multiplication table must be square and non-empty")
        if np.any(mul < 0) or np.any(mul >= n):
            raise StructuralError("table entries out of range")
        ident = [e for e in range(n) if np.all(mul[e] == np.arange(n)) and np.all(mul[:, e] == np.arange(n))]
        if not ident:
            raise StructuralError("no identity element")
        self.e = ident[0]
        inv = np.full(n, -1)
        for g in range(n):
            hits = np.nonzero(mul[g] == self.e)[0]
            if hits.size != 1 or mul[hits[0], g] != self.e:
                raise StructuralError(f"element {g} has no two-sided inverse")
            inv[g] = hits[0]
        assoc = mul[mul[:, :, None], np.arange(n)[None, None, :]]  # (gh)k
        assoc2 = mul[np.arange(n)[:, None, None], mul[None, :, :]]  # g(hk)
        if not np.array_equal(assoc, assoc2):
            raise StructuralError("multiplication table is not associative")
        mul.flags.writeable = False
        self.mul = mul
        self.inv = inv
        self.order = n
        self.labels = list(labels) if labels is not None else [str(g) for g in range(n)]

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and np.array_equal(self.mul, other.mul)

    def __hash__(self):
        return hash(self.mul.tobytes())

    @classmethod
    def cyclic(cls, n):
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n)

    @classmethod
    def from_permutations(cls, gens):
        """Group generated by permutations (tuples); composition ``(pq)(i) = p(q(i))``."""
        gens = [tuple(p) for p in gens]
        k = len(gens[0])
        ident = tuple(range(k))
        elems = [ident]
        seen = {ident}
        frontier = [ident]
        while frontier:
            new = []
            for p in frontier:
                for s in gens:
                    q = tuple(p[s[i]] for i in range(k))
                    if q not in seen:
                        seen.add(q)
                        new.append(q)
            elems.extend(new)
            frontier = new
        elems.sort()
        pos = {p: i for i, p in enumerate(elems)}
        mul = [[pos[tuple(p[q[i]] for i in range(k))] for q in elems] for p in elems]
        return cls(mul, labels=["".join(map(str, p)) for p in elems])

    @classmethod
    def symmetric(cls, n):
        return cls.from_permutations(list(itertools.permutations(range(n))))

    def closure(self, elems):
        """Smallest subgroup containing ``elems``."""
        sub = {self.e} | set(int(g) for g in elems)
        while True:
            new = {int(self.mul[a, b]) for a in sub for b in sub} | sub
            if new == sub:
                return frozenset(sub)
            sub = new

    def is_subgroup(self, s):
        s = set(s)
        return self.e in s and all(self.mul[a, b] in s for a in s for b in s) and \
            all(self.inv[a] in s for a in s)

    def subgroups(self, max_generators=None):
        """All subgroups reachable from generator subsets of bounded size.

        Every subgroup of a group of order ``n`` is generated by at most
        ``log2(n)`` elements, so the default bound is exhaustive.
        """
        n = self.order
        k = max_generators if max_generators is not None else int(math.floor(math.log2(n))) + 1
        found = {frozenset([self.e])}
        for r in range(1, min(k, n) + 1):
            for gens in itertools.combinations(range(n), r):
                found.add(self.closure(gens))
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def to_json(self):
        return {"order": self.order, "mul": self.mul.tolist()}


class GroupAction:
    """Action of a finite group by block-permuting, unitarily implemented automorphisms."""

    def __init__(self, group, algebra, perms, unitaries, tol=None):
        if len(perms) != group.order or len(unitaries) != group.order:
            raise StructuralError("need one automorphism per group element")
        self.group = group
        self.algebra = algebra
        self.perms = [tuple(int(i) for i in p) for p in perms]
        self.unitaries = [[np.asarray(u, dtype=complex) for u in us] for us in unitaries]
        sizes = algebra.block_sizes
        for g, (p, us) in enumerate(zip(self.perms, self.unitaries)):
            if sorted(p) != list(range(algebra.n_blocks)) or any(sizes[j] != sizes[p[j]] for j in range(len(p))):
                raise StructuralError(f"permutation of element {g} does not preserve block sizes")
            for u, n in zip(us, sizes):
                if u.shape != (n, n) or np.linalg.norm(u.conj().T @ u - np.eye(n)) > 1e3 * eps(tol):
                    raise StructuralError(f"automorphism of element {g} is not unitarily implemented")
        self._maps = [LinearMapOnA.from_function(lambda x, g=g: self._apply(g, x), algebra, star_preserving=True)
                      for g in range(group.order)]
        self.cocycle_check(tol)

    def _apply(self, g, x):
        p, us = self.perms[g], self.unitaries[g]
        return AlgElement(self.algebra, [u @ x.blocks[p[j]] @ u.conj().T for j, u in enumerate(us)])

    def __call__(self, g, x):
        return self.algebra.from_vector(self._maps[g].matrix @ x.vec())

    def map(self, g):
        return self._maps[g]

    def cocycle_check(self, tol=None):
        """Raise if ``alpha_g alpha_h != alpha_gh`` for some pair, naming the pair."""
        G = self.group
        if np.linalg.norm(self._maps[G.e].matrix - np.eye(self.algebra.total_dim)) > eps(tol):
            raise InputDataError("alpha_e is not the identity")
        for g in range(G.order):
            for h in range(G.order):
                diff = self._maps[g].matrix @ self._maps[h].matrix - self._maps[G.mul[g, h]].matrix
                if np.abs(diff).max() > eps(tol):
                    raise InputDataError(f"action is not a homomorphism at (g, h) = ({g}, {h})")

    @classmethod
    def translation(cls, group):
        """Left translation on ``C(G) = C^|G|``: ``alpha_g(f)(x) = f(g^-1 x)``."""
        A = MatrixBlockAlgebra([1] * group.order, label=f"C^{group.order}")
        perms = [[int(group.mul[group.inv[g], x]) for x in range(group.order)] for g in range(group.order)]
        return cls(group, A, perms, [[np.eye(1)] * group.order] * group.order)

    @classmethod
    def trivial(cls, group, algebra):
        perm = list(range(algebra.n_blocks))
        return cls(group, algebra, [perm] * group.order,
                   [[np.eye(n) for n in algebra.block_sizes]] * group.order)

    def to_json(self):
        enc = lambda u: [[[float(z.real), float(z.imag)] for z in row] for row in u]  # noqa: E731
        return {"group": self.group.to_json(), "algebra": self.algebra.to_json(),
                "automorphisms": [{"perm": list(p), "unitaries": [enc(u) for u in us]}
                                  for p, us in zip(self.perms, self.unitaries)]}


def twisted_bimodule(action, g):
    """The bimodule ``_gA`` with ``a |> xi <| c = alpha_{g^-1}(a) xi c``."""
    ginv = action.group.inv[g]
    M = Correspondence.from_endomorphism(action.algebra, lambda a: action(ginv, a), label=f"_{g}A")
    return M


class CrossedElement:
    """``sum_g x_g u_g`` stored as one ``AlgElement`` per group element."""

    __array_priority__ = 100

    def __init__(self, parent, coeffs):
        if len(coeffs) != parent.group.order:
            raise StructuralError("one coefficient per group element required")
        for c in coeffs:
            if c.parent != parent.algebra:
                raise StructuralError("coefficient not in the base algebra")
        self.parent = parent
        self.coeffs = list(coeffs)

    def _check(self, other):
        if not isinstance(other, CrossedElement) or other.parent is not self.parent:
            raise StructuralError("elements of different crossed products")

    def __add__(self, other):
        self._check(other)
        return CrossedElement(self.parent, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return CrossedElement(self.parent, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return CrossedElement(self.parent, [-a for a in self.coeffs])

    def __mul__(self, other):
        if np.isscalar(other):
            return CrossedElement(self.parent, [a * other for a in self.coeffs])
        self._check(other)
        B = self.parent
        G, act = B.group, B.action
        out = [B.algebra.zero() for _ in range(G.order)]
        for g, x in enumerate(self.coeffs):
            if not np.any(x.vec()):
                continue
            for h, y in enumerate(other.coeffs):
                if np.any(y.vec()):
                    out[G.mul[g, h]] = out[G.mul[g, h]] + x * act(g, y)
        return CrossedElement(B, out)

    def __rmul__(self, other):
        return self * other

    def adjoint(self):
        """``(x u_g)^* = alpha_{g^-1}(x^*) u_{g^-1}``."""
        B = self.parent
        G = B.group
        out = [None] * G.order
        for g, x in enumerate(self.coeffs):
            out[G.inv[g]] = B.action(G.inv[g], x.adjoint())
        return CrossedElement(B, out)

    def vec(self):
        return np.concatenate([c.vec() for c in self.coeffs])

    def regular(self):
        return self.parent.regular(self)

    def norm(self):
        return float(np.linalg.norm(self.regular(), 2))


class CrossedProductAlgebra:
    """``A x| G`` with its canonical expectation onto ``A``."""

    def __init__(self, action):
        self.action = action
        self.group = action.group
        self.algebra = action.algebra
        self.dim = self.group.order * self.algebra.total_dim
        n = self.algebra.dense_size
        G = self.group
        self._lam = []
        for g in range(G.order):
            p = np.zeros((G.order, G.order))
            for h in range(G.order):
                p[G.mul[g, h], h] = 1.0
            self._lam.append(np.kron(p, np.eye(n)))

    def __repr__(self):
        return f"CrossedProductAlgebra({self.algebra.label} x| G{self.group.order})"

    # -- elements ------------------------------------------------------------
    def element(self, coeffs):
        return CrossedElement(self, coeffs)

    def embed(self, a):
        out = [self.algebra.zero() for _ in range(self.group.order)]
        out[self.group.e] = a
        return CrossedElement(self, out)

    def u(self, g, a=None):
        out = [self.algebra.zero() for _ in range(self.group.order)]
        out[g] = a if a is not None else self.algebra.unit()
        return CrossedElement(self, out)

    def unit(self):
        return self.embed(self.algebra.unit())

    def from_vector(self, vec):
        k = self.algebra.total_dim
        return CrossedElement(self, [self.algebra.from_vector(vec[g * k:(g + 1) * k])
                                     for g in range(self.group.order)])

    def random_element(self, rng):
        return CrossedElement(self, [self.algebra.random_element(rng) for _ in range(self.group.order)])

    def basis(self):
        """``e_k u_g`` in order ``(g, k)``, matching ``CrossedElement.vec``."""
        return [self.u(g, e) for g in range(self.group.order) for e in self.algebra.basis()]

    # -- regular representation -------------------------------------------------
    def pi(self, a):
        G = self.group
        blocks = [self.action(G.inv[h], a).dense() for h in range(G.order)]
        n = self.algebra.dense_size
        out = np.zeros((G.order * n, G.order * n), dtype=complex)
        for h, b in enumerate(blocks):
            out[h * n:(h + 1) * n, h * n:(h + 1) * n] = b
        return out

    def lam(self, g):
        return self._lam[g]

    def regular(self, x):
        return sum(self.pi(c) @ self._lam[g] for g, c in enumerate(x.coeffs) if np.any(c.vec())) \
            if any(np.any(c.vec()) for c in x.coeffs) else np.zeros_like(self._lam[0], dtype=complex)

    def regular_generators(self):
        return [self.pi(a) for a in self.algebra.generators()] + [self._lam[g] for g in range(self.group.order)]

    def expectation(self, x):
        """Canonical expectation ``E(sum x_g u_g) = x_e``; accepts elements or regular matrices."""
        if isinstance(x, CrossedElement):
            return x.coeffs[self.group.e]
        n = self.algebra.dense_size
        e = self.group.e
        return self.algebra.from_dense(np.asarray(x)[e * n:(e + 1) * n, e * n:(e + 1) * n])

    def from_regular(self, mat):
        return CrossedElement(self, fourier_regular(self, mat))


def build_crossed_product(action):
    """Crossed product of a validated action; re-checks the cocycle identity."""
    action.cocycle_check()
    return CrossedProductAlgebra(action)


# ---------------------------------------------------------------------------
# Fourier analysis and supports
# ---------------------------------------------------------------------------

def fourier_regular(B, mat):
    """Coefficients ``x_g = E(x lambda_g^*)`` read off a regular-representation matrix."""
    n = B.algebra.dense_size
    e = B.group.e
    mat = np.asarray(mat)
    out = []
    for g in range(B.group.order):
        gi = B.group.inv[g]
        out.append(B.algebra.from_dense(mat[e * n:(e + 1) * n, gi * n:(gi + 1) * n]))
    return out


@dataclass
class FourierResult:
    coefficients: list
    support: frozenset
    norms: list


def fourier(x, tol=None):
    """Fourier coefficients, support and raw coefficient norms of an element of ``A x| G``."""
    B = x.parent
    coeffs = fourier_regular(B, x.regular())
    norms = [operator_norm(c) for c in coeffs]
    supp = frozenset(g for g, v in enumerate(norms) if v > eps(tol))
    return FourierResult(coeffs, supp, norms)


def support(x, tol=None):
    return fourier(x, tol).support


def reconstruction_residual(x):
    """``||x - sum_g x_g u_g||`` in the regular representation."""
    B = x.parent
    mat = x.regular()
    coeffs = fourier_regular(B, mat)
    rebuilt = B.regular(CrossedElement(B, coeffs))
    return float(np.linalg.norm(mat - rebuilt, 2))


# ---------------------------------------------------------------------------
# replete subspaces
# ---------------------------------------------------------------------------

@dataclass
class RepleteReport:
    support: frozenset
    dim: int
    replete_dim: int
    is_replete: bool


def replete_basis(B, S):
    """Coefficient-space basis (columns) of ``Y_S = sum_{g in S} A u_g``."""
    k = B.algebra.total_dim
    cols = []
    for g in sorted(S):
        for j in range(k):
            v = np.zeros(B.dim, dtype=complex)
            v[g * k + j] = 1.0
            cols.append(v)
    return np.column_stack(cols) if cols else np.zeros((B.dim, 0), dtype=complex)


def replete_bimodule(B, S):
    return [B.from_vector(c) for c in replete_basis(B, S).T]


def subspace_support(B, elements, tol=None):
    k = B.algebra.total_dim
    vecs = np.column_stack([x.vec() for x in elements]) if elements else np.zeros((B.dim, 0))
    return frozenset(g for g in range(B.group.order)
                     if vecs.size and np.abs(vecs[g * k:(g + 1) * k]).max() > eps(tol))


def is_replete(B, elements, tol=None):
    """Whether ``span(elements) = Y_{supp}``; the span always sits inside ``Y_{supp}``."""
    supp = subspace_support(B, elements, tol)
    dim = linalg.rank(np.column_stack([x.vec() for x in elements])) if elements else 0
    full = len(supp) * B.algebra.total_dim
    return RepleteReport(supp, dim, full, dim == full)


# ---------------------------------------------------------------------------
# Galois correspondence
# ---------------------------------------------------------------------------

def subgroup_expectation(B, subgroup):
    """``E^B_D`` for ``D = A x| subgroup``: drop coefficients outside the subgroup."""
    keep = set(subgroup)

    def expect(x):
        zero = B.algebra.zero()
        return CrossedElement(B, [c if g in keep else zero for g, c in enumerate(x.coeffs)])

    return expect


@dataclass
class GaloisNode:
    subgroup: tuple
    order: int
    dim: int
    support: tuple
    subalgebra_residual: float
    expectation_residual: float
    compatibility_residual: float
    faithful: bool
    ok: bool

    def to_json(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass
class GaloisReport:
    nodes: list
    edges: list
    partial: bool

    @property
    def ok(self):
        return all(n.ok for n in self.nodes) and not self.partial


def galois_scan(B, samples=10, seed=0, tol=None, max_generators=None):
    """Intermediate algebras ``A x| L`` for every subgroup ``L`` with their expectations."""
    G = B.group
    subs = G.subgroups(max_generators)
    partial = max_generators is not None and max_generators < math.floor(math.log2(G.order)) + 1
    rng = np.random.default_rng(seed)
    big = B.basis()
    big_reg = [x.regular() for x in big]
    nodes = []
    for L in subs:
        expect = subgroup_expectation(B, L)
        sub = replete_bimodule(B, L)
        sub_reg = [x.regular() for x in sub]
        sres = 0.0
        one_in = expect(B.unit()) - B.unit()
        sres = max(sres, float(np.abs(one_in.vec()).max()))
        for _ in range(samples):
            x = sum((c * y for c, y in zip(rng.normal(size=len(sub)), sub)), B.embed(B.algebra.zero()))
            y = sum((c * z for c, z in zip(rng.normal(size=len(sub)), sub)), B.embed(B.algebra.zero()))
            for w in (x * y, x.adjoint()):
                sres = max(sres, float(np.abs((w - expect(w)).vec()).max()) / (1.0 + np.abs(w.vec()).max()))
        rep = expectation_axioms(lambda m: expect(B.from_regular(m)).regular(), big_reg, sub_reg,
                                 samples=samples, seed=seed, tol=tol)
        comp = max(operator_norm(B.expectation(x) - B.expectation(expect(x))) for x in big)
        supp = subspace_support(B, sub, tol)
        exp_res = max(v for k, v in rep.residuals.items() if k != "faithful_min_eigenvalue")
        ok = (rep.ok and sres <= eps(tol) and comp <= eps(tol) and supp == L and G.is_subgroup(supp))
        nodes.append(GaloisNode(tuple(sorted(L)), len(L), len(sub), tuple(sorted(supp)), sres,
                                float(exp_res), comp, rep.faithful, bool(ok)))
    edges = []
    sets = [frozenset(n.subgroup) for n in nodes]
    for i, s in enumerate(sets):
        for j, t in enumerate(sets):
            if s < t and not any(s < u < t for u in sets):
                edges.append((i, j))
    return GaloisReport(nodes, edges, partial)


# ---------------------------------------------------------------------------
# relative commutant and the bimodule B
# ---------------------------------------------------------------------------

def crossed_correspondence(B):
    """``B`` as an A-A correspondence with ``<x|y>_A = E(x^* y)``; carrier = coefficient space."""
    A = B.algebra
    basis = B.basis()
    k = A.total_dim
    left = [np.column_stack([(B.embed(e) * b).vec() for b in basis]) for e in A.basis()]
    right = [np.column_stack([(b * B.embed(e)).vec() for b in basis]) for e in A.basis()]
    inner = np.zeros((k, B.dim, B.dim), dtype=complex)
    for p, x in enumerate(basis):
        xa = x.adjoint()
        for q, y in enumerate(basis):
            inner[:, p, q] = B.expectation(xa * y).vec()
    return Correspondence(A, left, right, inner, distinguished=[B.unit().vec()], label="B")


@dataclass
class RelativeCommutantReport:
    commutant_basis: list
    commutant_dim: int
    end_dim: int
    end_abelian: bool
    end_structure: MatrixBlockAlgebra
    matches_group_pattern: bool


def relative_commutant(B):
    """``A' cap B`` by a linear solve and ``End(_A B_A)`` via the bimodule solver."""
    basis = B.basis()
    regs = [x.regular() for x in basis]
    flat = np.column_stack([r.ravel() for r in regs])
    eqs = []
    for a in B.algebra.generators():
        pa = B.pi(a)
        eqs.append(np.column_stack([(pa @ r - r @ pa).ravel() for r in regs]))
    ns = linalg.null_space(eqs)
    comm = [B.from_vector(c) for c in ns.T]
    del flat
    end = endomorphism_algebra(crossed_correspondence(B))
    pattern = end.is_abelian and end.dim == B.group.order
    return RelativeCommutantReport(comm, len(comm), end.dim, end.is_abelian, end.structure, pattern)


# ---------------------------------------------------------------------------
# averaging maps, freeness and simplicity
# ---------------------------------------------------------------------------

@dataclass
class AveragingCertificate:
    unital: float
    contractive: float
    positive: float
    ideal: float
    expectation: float
    slots: float

    def ok(self, tol=None):
        return max(self.__dict__.values()) <= eps(tol)


def _partition_defect(A, coeffs):
    s = sum((a.adjoint() * a for a in coeffs), A.zero())
    return operator_norm(s - A.unit())


def averaging_map(B, coeffs, samples=10, seed=0, tol=None):
    """``Psi(x) = sum a_i^* x a_i`` for a partition of unity ``sum a_i^* a_i = 1``.

    Returns the map (on ``CrossedElement``) and a certificate of its
    properties on random samples.
    """
    A = B.algebra
    if _partition_defect(A, coeffs) > eps(tol):
        raise PreconditionError("coefficients are not a partition of unity")
    emb = [B.embed(a) for a in coeffs]
    emb_adj = [x.adjoint() for x in emb]

    def psi(x):
        out = None
        for a, ad in zip(emb, emb_adj):
            t = ad * x * a
            out = t if out is None else out + t
        return out

    def psi_a(a):
        return sum((c.adjoint() * a * c for c in coeffs), A.zero())

    rng = np.random.default_rng(seed)
    cen = matrix_algebra_center(B.regular_generators())
    zs = [B.from_regular(p) for p in cen.projections]
    twisted = [twisted_bimodule(B.action, g) for g in range(B.group.order)]
    G = B.group
    cert = dict.fromkeys(["contractive", "positive", "ideal", "expectation", "slots"], 0.0)
    cert["unital"] = float(np.abs((psi(B.unit()) - B.unit()).vec()).max())
    for _ in range(samples):
        x = B.random_element(rng)
        px = psi(x)
        cert["contractive"] = max(cert["contractive"], max(0.0, px.norm() - x.norm()) / (1 + x.norm()))
        pos = psi(x.adjoint() * x).regular()
        cert["positive"] = max(cert["positive"], max(0.0, -float(np.linalg.eigvalsh(0.5 * (pos + pos.conj().T))[0])))
        for z in zs:
            if len(zs) > 1:
                outside = (B.unit() - z) * psi(z * x)
                cert["ideal"] = max(cert["ideal"], float(np.abs(outside.vec()).max()))
        cert["expectation"] = max(cert["expectation"], operator_norm(B.expectation(px) - psi_a(B.expectation(x))))
        for g in range(G.order):
            M = twisted[g]
            xi = B.action(G.inv[g], x.coeffs[g]).vec()
            avg = sum(M.lact(c.adjoint(), M.ract(xi, c)) for c in coeffs)
            cert["slots"] = max(cert["slots"], float(np.abs(B.action(G.inv[g], px.coeffs[g]).vec() - avg).max()))
    return psi, AveragingCertificate(**cert)


def slot_average(action, g, xi, coeffs):
    """``sum a_i^* |> xi <| a_i`` in ``_gA``, with ``xi`` an ``AlgElement``."""
    ginv = action.group.inv[g]
    return sum((action(ginv, c.adjoint()) * xi * c for c in coeffs), action.algebra.zero())


@dataclass
class FreenessResult:
    value: float
    coefficients: list
    strategy: str
    evaluations: int
    identity_flag: bool
    coloring_value: float = float("nan")


def _coloring_partitions(action, g):
    """Central projection partitions from a greedy coloring of ``k -- perm(k)``."""
    A = action.algebra
    ginv = action.group.inv[g]
    perm = action.perms[ginv]
    graph = nx.Graph()
    graph.add_nodes_from(range(A.n_blocks))
    loops = False
    for j in range(A.n_blocks):
        if perm[j] == j:
            loops = True
        else:
            graph.add_edge(j, perm[j])
    out = []
    for strategy in ("largest_first", "DSATUR", "independent_set"):
        colors = nx.greedy_color(graph, strategy=strategy)
        groups = {}
        for node, c in colors.items():
            groups.setdefault(c, []).append(node)
        projs = A.central_projections()
        part = [sum((projs[j] for j in nodes), A.zero()) for _, nodes in sorted(groups.items())]
        out.append(part)
    return out, loops


def freeness_infimum(action, g, xi, budget=2000, seed=0, n_terms=None):
    """Estimate ``inf ||sum a_i^* |> xi <| a_i||`` over partitions of unity in ``_gA``.

    Projection partitions from a graph coloring are tried first since they
    certify exact zeros; the remaining budget goes to a local search over
    ``a_i = u_i / sqrt(n)`` with random unitaries ``u_i``.
    """
    A = action.algebra
    if not isinstance(xi, AlgElement):
        xi = A.from_vector(xi)
    flag = g == action.group.e
    if not np.any(xi.vec()):
        return FreenessResult(0.0, [A.unit()], "zero", 0, flag, 0.0)
    evals = 0
    best_val, best_coeffs, best_strat = operator_norm(xi), [A.unit()], "identity"
    evals += 1
    parts, _ = _coloring_partitions(action, g)
    color_val = float("inf")
    for part in parts:
        v = operator_norm(slot_average(action, g, xi, part))
        evals += 1
        color_val = min(color_val, v)
        if v < best_val:
            best_val, best_coeffs, best_strat = v, part, "coloring"
    rng = np.random.default_rng(seed)
    n = n_terms or max(2, A.dense_size)
    scale = 1.0 / np.sqrt(n)
    us = [A.random_unitary(rng) for _ in range(n)]

    def value(units):
        return operator_norm(slot_average(action, g, xi, [u * scale for u in units]))

    cur = value(us)
    evals += 1
    step = 0.5
    while evals < budget and best_val > 1e-14:
        i = int(rng.integers(n))
        h = A.random_element(rng)
        h = (h + h.adjoint()) * (0.5 * step)
        expo = AlgElement(A, [_expm_i(b) for b in h.blocks])
        trial = list(us)
        trial[i] = expo * us[i]
        v = value(trial)
        evals += 1
        if v < cur:
            us, cur = trial, v
        else:
            step = max(step * 0.98, 1e-3)
        if cur < best_val:
            best_val, best_coeffs, best_strat = cur, [u * scale for u in us], "unitary_search"
    return FreenessResult(float(best_val), best_coeffs, best_strat, evals, flag, float(color_val))


def _expm_i(h):
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(1j * w)) @ v.conj().T


@dataclass
class SimplicityReport:
    is_simple: bool
    center_dim: int
    block_sizes: list
    witness: object = field(default=None, repr=False)


def simplicity_probe(B):
    """Simplicity of ``A x| G`` from the centre of its regular representation."""
    cen = matrix_algebra_center(B.regular_generators())
    witness = None if cen.is_simple else B.from_regular(cen.projections[0])
    return SimplicityReport(cen.is_simple, cen.center_dim, list(cen.block_sizes), witness)
