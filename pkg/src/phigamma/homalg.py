"""Exact homological algebra over finite abelian p-groups.

A finite abelian p-group is carried in coordinates: ``FinAbGroup(p, (e_1, ..., e_d))``
is ``Z/p^e_1 + ... + Z/p^e_d``, i.e. the lattice ``Z^d`` modulo the relation
lattice ``diag(p^e_j) Z^d``. Morphisms are integer matrices acting on column
vectors (rows index target coordinates).

Cohomology is computed by lifting every term to its integer lattice. All
lattices that occur contain ``p^E Z^d`` where ``E`` is the largest exponent in
the complex, so the computation can be carried out in ``(Z/p^E)^d`` with a
Smith normal form over the local ring ``Z/p^E`` (pivot = entry of least
p-adic valuation). A second route through the classical integer Smith normal
form (:func:`smith_normal_form`) is available as ``method="integer"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Sequence

import numpy as np

from .errors import (
    IllDefinedMorphism,
    NotAChainMap,
    NotAComplex,
    OperatorsDoNotCommute,
    StrandNotExact,
)

_I64_SAFE = 2**31


def dtype_for(modulus: int):
    """int64 is used while products of two residues fit comfortably."""
    return np.int64 if modulus < _I64_SAFE else object


def as_int_matrix(A, shape=None, modulus: int | None = None) -> np.ndarray:
    dt = object if modulus is None else dtype_for(modulus)
    if isinstance(A, np.ndarray):
        M = A.astype(object) if A.dtype != object else A
    else:
        rows = [list(r) for r in A]
        M = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                M[i, j] = int(x)
    if shape is not None and M.size == 0:
        M = np.zeros(shape, dtype=object)
    if modulus is not None:
        M = M % modulus
    return M.astype(dt) if dt is not object else M


def matmul_mod(A: np.ndarray, B: np.ndarray, modulus: int) -> np.ndarray:
    """``A @ B mod modulus`` without int64 overflow."""
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=dtype_for(modulus))
    if A.dtype == object or B.dtype == object or dtype_for(modulus) is object:
        return (A.astype(object).dot(B.astype(object))) % modulus
    A = A % modulus
    B = B % modulus
    sq = max(1, (modulus - 1) ** 2)
    chunk = max(1, (2**63 - 1 - modulus) // sq)
    inner = A.shape[1]
    if chunk >= inner:
        return (A @ B) % modulus
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for s in range(0, inner, chunk):
        out = (out + A[:, s:s + chunk] @ B[s:s + chunk, :]) % modulus
    return out


# ---------------------------------------------------------------------------
# groups and morphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinAbGroup:
    """``Z/p^e_1 + ... + Z/p^e_d`` in fixed coordinates.

    ``exponents`` need not be sorted (direct sums of modules keep their block
    order); :attr:`invariant_factors` gives the canonical descending form.
    """

    p: int
    exponents: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if any(e < 1 for e in self.exponents):
            raise ValueError(f"exponents must be >= 1, got {self.exponents}")

    @classmethod
    def canonical(cls, p: int, exponents) -> "FinAbGroup":
        return cls(p, tuple(sorted((int(e) for e in exponents), reverse=True)))

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def length(self) -> int:
        return sum(self.exponents)

    @property
    def order(self) -> int:
        return self.p ** self.length

    @property
    def max_exponent(self) -> int:
        return max(self.exponents, default=0)

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return tuple(sorted(self.exponents, reverse=True))

    def moduli(self) -> np.ndarray:
        mod = self.p ** max(self.max_exponent, 1)
        return np.array([self.p**e for e in self.exponents], dtype=dtype_for(mod))

    def relations(self, E: int | None = None) -> np.ndarray:
        """Relation generators ``p^e_j * e_j`` mod ``p^E`` as columns.

        Columns that vanish mod ``p^E`` (coordinates with ``e_j >= E``) are
        omitted.
        """
        E = self.max_exponent if E is None else E
        mod = self.p**E
        keep = [j for j, e in enumerate(self.exponents) if e < E]
        D = np.zeros((self.rank, len(keep)), dtype=dtype_for(mod))
        for c, j in enumerate(keep):
            D[j, c] = self.p ** self.exponents[j]
        return D

    def reduce(self, A: np.ndarray) -> np.ndarray:
        """Reduce the rows of ``A`` (indexed by these coordinates)."""
        if self.rank == 0:
            return A
        return A % self.moduli().reshape(-1, 1).astype(A.dtype)

    def is_zero_vector(self, v: np.ndarray) -> bool:
        return not np.any(self.reduce(v.reshape(self.rank, -1)))

    def direct_sum(self, *others: "FinAbGroup") -> "FinAbGroup":
        exps = list(self.exponents)
        for o in others:
            exps.extend(o.exponents)
        return FinAbGroup(self.p, tuple(exps))

    def power(self, k: int) -> "FinAbGroup":
        return FinAbGroup(self.p, self.exponents * k)

    def __str__(self):
        if not self.exponents:
            return "0"
        return " + ".join(f"Z/{self.p}^{e}" if e > 1 else f"Z/{self.p}"
                          for e in self.invariant_factors)


def _check_entries(source: FinAbGroup, target: FinAbGroup, M: np.ndarray):
    p = source.p
    for i, et in enumerate(target.exponents):
        for j, es in enumerate(source.exponents):
            need = et - es
            if need > 0 and int(M[i, j]) % p**need:
                raise IllDefinedMorphism(
                    f"entry ({i}, {j}) = {int(M[i, j])} is not divisible by "
                    f"{p}^{need} (Z/{p}^{es} -> Z/{p}^{et})")


@dataclass(frozen=True, eq=False)
class AbMorphism:
    """Homomorphism ``source -> target`` given by an integer matrix.

    Construction validates well-definedness and reduces each row modulo the
    order of its target coordinate.
    """

    source: FinAbGroup
    target: FinAbGroup
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.source.p != self.target.p:
            raise IllDefinedMorphism("source and target have different primes")
        mod = self.source.p ** max(self.target.max_exponent, 1)
        shape = (self.target.rank, self.source.rank)
        M = as_int_matrix(self.matrix, shape=shape)
        if M.shape != shape:
            raise IllDefinedMorphism(f"matrix has shape {M.shape}, expected {shape}")
        _check_entries(self.source, self.target, M)
        M = self.target.reduce(M).astype(dtype_for(mod)) if M.size else np.zeros(shape, dtype=dtype_for(mod))
        object.__setattr__(self, "matrix", M)

    @property
    def p(self) -> int:
        return self.source.p

    def __matmul__(self, other: "AbMorphism") -> "AbMorphism":
        """Composition ``self o other``."""
        if other.target != self.source:
            raise ValueError("composition of non-matching morphisms")
        mod = self.p ** max(self.target.max_exponent, other.target.max_exponent, 1)
        return AbMorphism(other.source, self.target,
                          matmul_mod(self.matrix, other.matrix, mod))

    def __add__(self, other: "AbMorphism") -> "AbMorphism":
        return AbMorphism(self.source, self.target,
                          self.matrix.astype(object) + other.matrix.astype(object))

    def __sub__(self, other: "AbMorphism") -> "AbMorphism":
        return AbMorphism(self.source, self.target,
                          self.matrix.astype(object) - other.matrix.astype(object))

    def __neg__(self) -> "AbMorphism":
        return AbMorphism(self.source, self.target, -self.matrix.astype(object))

    def __eq__(self, other):
        if not isinstance(other, AbMorphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and np.array_equal(self.matrix.astype(object), other.matrix.astype(object)))

    __hash__ = None

    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    @classmethod
    def zero(cls, source: FinAbGroup, target: FinAbGroup) -> "AbMorphism":
        return cls(source, target, np.zeros((target.rank, source.rank), dtype=np.int64))

    @classmethod
    def identity(cls, group: FinAbGroup) -> "AbMorphism":
        return cls(group, group, np.eye(group.rank, dtype=np.int64))


def validate_morphism(source: FinAbGroup, target: FinAbGroup, matrix) -> AbMorphism:
    """Check ``p^max(0, e_tgt_i - e_src_j) | A_ij`` and return the normalized morphism."""
    return AbMorphism(source, target, matrix)


def block_morphism(source_blocks: Sequence[FinAbGroup], target_blocks: Sequence[FinAbGroup],
                   blocks: dict[tuple[int, int], np.ndarray]) -> AbMorphism:
    """Assemble a morphism between direct sums from ``(row, col)`` blocks."""
    p = (source_blocks or target_blocks)[0].p
    src = FinAbGroup(p, ()).direct_sum(*source_blocks)
    tgt = FinAbGroup(p, ()).direct_sum(*target_blocks)
    M = np.zeros((tgt.rank, src.rank), dtype=object)
    r_off = np.cumsum([0] + [g.rank for g in target_blocks])
    c_off = np.cumsum([0] + [g.rank for g in source_blocks])
    for (i, j), B in blocks.items():
        M[r_off[i]:r_off[i + 1], c_off[j]:c_off[j + 1]] += np.asarray(B).astype(object)
    return AbMorphism(src, tgt, M)


# ---------------------------------------------------------------------------
# Smith normal forms
# ---------------------------------------------------------------------------

def smith_normal_form(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integer Smith normal form.

    Returns unimodular ``U``, ``V`` and diagonal ``D`` (object arrays) with
    ``U @ A @ V == D``, ``D[i, i] >= 0`` and ``D[i, i] | D[i+1, i+1]``.
    Pivots are chosen by least absolute value.
    """
    D = as_int_matrix(A).copy()
    r, c = D.shape
    U = np.eye(r, dtype=object)
    V = np.eye(c, dtype=object)
    for k in range(min(r, c)):
        while True:
            sub = D[k:, k:]
            nz = np.argwhere(sub != 0)
            if len(nz) == 0:
                return U, D, V
            absvals = [abs(sub[i, j]) for i, j in nz]
            i, j = nz[int(np.argmin(absvals))]
            i += k
            j += k
            if i != k:
                D[[k, i]] = D[[i, k]]
                U[[k, i]] = U[[i, k]]
            if j != k:
                D[:, [k, j]] = D[:, [j, k]]
                V[:, [k, j]] = V[:, [j, k]]
            piv = D[k, k]
            clean = True
            for i in range(k + 1, r):
                if D[i, k]:
                    q = D[i, k] // piv
                    D[i] -= q * D[k]
                    U[i] -= q * U[k]
                    clean = clean and D[i, k] == 0
            for j in range(k + 1, c):
                if D[k, j]:
                    q = D[k, j] // piv
                    D[:, j] -= q * D[:, k]
                    V[:, j] -= q * V[:, k]
                    clean = clean and D[k, j] == 0
            if not clean:
                continue
            bad = np.argwhere(D[k + 1:, k + 1:] % piv != 0)
            if len(bad):
                i = bad[0][0] + k + 1
                D[k] += D[i]
                U[k] += U[i]
                continue
            break
        if D[k, k] < 0:
            D[k] = -D[k]
            U[k] = -U[k]
    return U, D, V


def local_snf(A: np.ndarray, p: int, E: int, rows: bool = False, cols: bool = False):
    """Smith normal form over ``Z/p^E``.

    Returns ``(vals, U, V)`` where ``U @ A @ V = diag(p^vals[0], p^vals[1], ...)``
    mod ``p^E``; entries beyond ``len(vals)`` vanish. ``U``/``V`` are ``None``
    unless requested.
    """
    mod = p**E
    dt = dtype_for(mod)
    A = np.array(A, dtype=object) % mod
    A = A.astype(dt) if dt is not object else A
    r, c = A.shape
    U = np.eye(r, dtype=dt) if rows else None
    V = np.eye(c, dtype=dt) if cols else None
    vals: list[int] = []
    k = 0
    while k < min(r, c):
        sub = A[k:, k:]
        piv = None
        pt = 1
        for t in range(E):
            hit = np.argwhere(sub % (pt * p) != 0)
            if len(hit):
                piv = (int(hit[0][0]) + k, int(hit[0][1]) + k, t)
                break
            pt *= p
        if piv is None:
            break
        i, j, t = piv
        if i != k:
            A[[k, i]] = A[[i, k]]
            if rows:
                U[[k, i]] = U[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            if cols:
                V[:, [k, j]] = V[:, [j, k]]
        inv = pow(int(A[k, k]) // pt, -1, mod)
        A[k] = A[k] * inv % mod
        if rows:
            U[k] = U[k] * inv % mod
        f = A[k + 1:, k] // pt
        nz = np.flatnonzero(f) + k + 1
        if len(nz):
            A[nz, k:] = (A[nz, k:] - np.outer(A[nz, k] // pt, A[k, k:])) % mod
            if rows:
                U[nz] = (U[nz] - np.outer(f[nz - k - 1], U[k])) % mod
        g = A[k, k + 1:] // pt
        nz = np.flatnonzero(g) + k + 1
        if len(nz):
            A[k, nz] = 0
            if cols:
                V[:, nz] = (V[:, nz] - np.outer(V[:, k], g[nz - k - 1])) % mod
        vals.append(t)
        k += 1
    return vals, U, V


def kernel_mod(A: np.ndarray, p: int, E: int) -> np.ndarray:
    """Generators (as columns) of ``{x in (Z/p^E)^c : A x = 0}``."""
    c = A.shape[1]
    mod = p**E
    if A.shape[0] == 0:
        return np.eye(c, dtype=dtype_for(mod))
    vals, _, V = local_snf(A, p, E, cols=True)
    gens = [V[:, k] * p ** (E - t) % mod for k, t in enumerate(vals) if t > 0]
    gens += [V[:, k] for k in range(len(vals), c)]
    if not gens:
        return np.zeros((c, 0), dtype=dtype_for(mod))
    return np.stack(gens, axis=1)


def cokernel_exponents(A: np.ndarray, p: int, E: int) -> list[int]:
    """Exponents of ``(Z/p^E)^r / (column span of A)``."""
    r = A.shape[0]
    if A.shape[1] == 0:
        return [E] * r
    vals, _, _ = local_snf(A, p, E)
    return [t for t in vals if t > 0] + [E] * (r - len(vals))


def subgroup_length(group: FinAbGroup, gens: np.ndarray) -> int:
    """Length of the subgroup of ``group`` generated by the columns of ``gens``."""
    if group.rank == 0:
        return 0
    E = group.max_exponent
    M = np.hstack([np.asarray(gens).astype(object) % group.p**E,
                   group.relations(E).astype(object)])
    return group.length - sum(cokernel_exponents(M, group.p, E))


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CochainComplex:
    """``C^0 -> C^1 -> ... -> C^top`` with ``d^{i+1} d^i = 0`` checked on construction."""

    terms: tuple[FinAbGroup, ...]
    differentials: tuple[AbMorphism, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "differentials", tuple(self.differentials))
        if len(self.differentials) != max(len(self.terms) - 1, 0):
            raise NotAComplex("need exactly one differential between consecutive terms")
        for i, d in enumerate(self.differentials):
            if d.source != self.terms[i] or d.target != self.terms[i + 1]:
                raise NotAComplex(f"d^{i} does not map C^{i} -> C^{i + 1}")
        for i in range(len(self.differentials) - 1):
            comp = self.differentials[i + 1] @ self.differentials[i]
            if not comp.is_zero():
                raise NotAComplex(f"d^{i + 1} o d^{i} != 0")

    @property
    def p(self) -> int:
        return self.terms[0].p

    @property
    def top(self) -> int:
        return len(self.terms) - 1

    @property
    def max_exponent(self) -> int:
        return max((t.max_exponent for t in self.terms), default=0)

    def term(self, i: int) -> FinAbGroup:
        if 0 <= i < len(self.terms):
            return self.terms[i]
        return FinAbGroup(self.p, ())

    def d(self, i: int) -> AbMorphism:
        if 0 <= i < len(self.differentials):
            return self.differentials[i]
        return AbMorphism.zero(self.term(i), self.term(i + 1))

    def total_order(self) -> int:
        return self.p ** sum(t.length for t in self.terms)

    def cocycle_generators(self, i: int, E: int) -> np.ndarray:
        """Generators of the cocycle lattice ``Z^i`` modulo ``p^E``."""
        Ci, Cn = self.term(i), self.term(i + 1)
        if Cn.rank == 0:
            return np.eye(Ci.rank, dtype=dtype_for(self.p**E))
        M = np.hstack([self.d(i).matrix.astype(object), Cn.relations(E).astype(object)])
        return kernel_mod(M, self.p, E)[:Ci.rank]

    def coboundary_generators(self, i: int, E: int) -> np.ndarray:
        """Generators of ``B^i + (relations of C^i)`` modulo ``p^E``."""
        Ci = self.term(i)
        return np.hstack([self.d(i - 1).matrix.astype(object) % self.p**E,
                          Ci.relations(E).astype(object)])


@dataclass(frozen=True, eq=False)
class ChainMap:
    """Degreewise morphisms ``f^i : C^i -> D^i`` commuting with the differentials."""

    source: CochainComplex
    target: CochainComplex
    components: tuple[AbMorphism, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        n = max(len(self.source.terms), len(self.target.terms))
        if len(self.components) != n:
            raise NotAChainMap(f"expected {n} components, got {len(self.components)}")
        for i, f in enumerate(self.components):
            if f.source != self.source.term(i) or f.target != self.target.term(i):
                raise NotAChainMap(f"component {i} has the wrong source/target")
        for i in range(n - 1):
            lhs = self.component(i + 1) @ self.source.d(i)
            rhs = self.target.d(i) @ self.component(i)
            if lhs != rhs:
                raise NotAChainMap(f"f^{i + 1} d^{i} != d^{i} f^{i}")

    def component(self, i: int) -> AbMorphism:
        if 0 <= i < len(self.components):
            return self.components[i]
        return AbMorphism.zero(self.source.term(i), self.target.term(i))


def _cohomology_local(C: CochainComplex, i: int) -> FinAbGroup:
    p = C.p
    Ci = C.term(i)
    if Ci.rank == 0:
        return FinAbGroup(p, ())
    E = C.max_exponent
    Z = C.cocycle_generators(i, E).astype(object)
    B = C.coboundary_generators(i, E)
    g = Z.shape[1]
    if g == 0:
        return FinAbGroup(p, ())
    R = kernel_mod(np.hstack([Z, B]), p, E)[:g]
    return FinAbGroup.canonical(p, cokernel_exponents(R, p, E))


def _int_kernel(M: np.ndarray) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=object)
    _, D, V = smith_normal_form(M)
    rank = sum(1 for k in range(min(D.shape)) if D[k, k] != 0)
    return V[:, rank:]


def _valuation(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    if x != 1:
        raise ArithmeticError("torsion coefficient is not a power of p")
    return v


def _cohomology_integer(C: CochainComplex, i: int) -> FinAbGroup:
    p = C.p
    Ci, Cn = C.term(i), C.term(i + 1)
    if Ci.rank == 0:
        return FinAbGroup(p, ())
    rel = lambda G: np.diag([p**e for e in G.exponents]).astype(object).reshape(G.rank, G.rank)
    if Cn.rank:
        Z = _int_kernel(np.hstack([C.d(i).matrix.astype(object), rel(Cn)]))[:Ci.rank]
    else:
        Z = np.eye(Ci.rank, dtype=object)
    B = np.hstack([C.d(i - 1).matrix.astype(object), rel(Ci)])
    g = Z.shape[1]
    R = _int_kernel(np.hstack([Z, B]))[:g]
    _, D, _ = smith_normal_form(R)
    diag = [abs(D[k, k]) for k in range(min(D.shape))]
    if sum(1 for x in diag if x) < g:
        raise ArithmeticError("cohomology group is not finite")
    return FinAbGroup.canonical(p, [_valuation(x, p) for x in diag if x and x != 1])


def cohomology(C: CochainComplex, method: str = "local") -> list[FinAbGroup]:
    """``H^i = ker d^i / im d^{i-1}`` for ``i = 0..top``, in canonical form."""
    if method == "local":
        fn = _cohomology_local
    elif method == "integer":
        fn = _cohomology_integer
    else:
        raise ValueError(f"unknown method {method!r}")
    return [fn(C, i) for i in range(len(C.terms))]


def euler_characteristic(H: Sequence[FinAbGroup]) -> int:
    return sum((-1) ** i * h.length for i, h in enumerate(H))


def induced_map_lengths(f: ChainMap, i: int) -> tuple[int, int]:
    """Lengths of ``ker H^i(f)`` and ``coker H^i(f)``."""
    C, D = f.source, f.target
    Ci, Di = C.term(i), D.term(i)
    hC = _cohomology_local(C, i).length if Ci.rank else 0
    hD = _cohomology_local(D, i).length if Di.rank else 0
    if Di.rank == 0:
        return hC, hD
    E = max(C.max_exponent, D.max_exponent)
    mod = C.p**E
    B = D.coboundary_generators(i, E)
    if Ci.rank:
        Z = C.cocycle_generators(i, E).astype(object)
        fZ = matmul_mod(f.component(i).matrix.astype(object), Z, mod)
    else:
        fZ = np.zeros((Di.rank, 0), dtype=object)
    image = subgroup_length(Di, np.hstack([fZ, B])) - subgroup_length(Di, B)
    return hC - image, hD - image


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def mapping_fiber(f: ChainMap) -> CochainComplex:
    """Mapping fiber of ``f : C -> D``.

    ``Fib^i = D^{i-1} + C^i`` (shifted copy first) with
    ``d(u, x) = (f(x) - d_D(u), d_C(x))``.
    """
    C, D = f.source, f.target
    top = max(C.top, D.top) + 1
    terms = [D.term(i - 1).direct_sum(C.term(i)) for i in range(top + 1)]
    diffs = []
    for i in range(top):
        blocks = {
            (0, 0): -D.d(i - 1).matrix.astype(object),
            (0, 1): f.component(i).matrix,
            (1, 1): C.d(i).matrix,
        }
        diffs.append(block_morphism([D.term(i - 1), C.term(i)],
                                    [D.term(i), C.term(i + 1)], blocks))
    return CochainComplex(tuple(terms), tuple(diffs))


def subsets(ground: Sequence[int], size: int) -> list[tuple[int, ...]]:
    """Size-``size`` subsets of ``ground`` in lexicographic order."""
    return list(combinations(sorted(ground), size))


def koszul_sign(S: Sequence[int], j: int) -> int:
    """``(-1)^a(S, j)`` with ``a(S, j) = #{y in S : y <= j}``."""
    return -1 if sum(1 for y in S if y <= j) % 2 else 1


def koszul_cochain(group: FinAbGroup, ops: Sequence[AbMorphism],
                   labels: Sequence[int] | None = None) -> CochainComplex:
    """Koszul cochain complex of pairwise-commuting endomorphisms of ``group``.

    The term in degree ``i`` is ``group^{Y(i)}`` with ``Y(i)`` the size-``i``
    subsets of ``labels`` (default ``1..k``); the ``(S, S u {j})`` component
    is ``(-1)^a(S, j) t_j``.
    """
    k = len(ops)
    labels = list(range(1, k + 1)) if labels is None else list(labels)
    for a in range(k):
        for b in range(a + 1, k):
            if ops[a] @ ops[b] != ops[b] @ ops[a]:
                raise OperatorsDoNotCommute(f"t_{labels[a]} and t_{labels[b]} do not commute")
    op = dict(zip(labels, ops))
    Y = [subsets(labels, i) for i in range(k + 1)]
    terms = [group.power(len(Yi)) for Yi in Y]
    diffs = []
    for i in range(k):
        pos = {T: r for r, T in enumerate(Y[i + 1])}
        blocks = {}
        for c, S in enumerate(Y[i]):
            for j in labels:
                if j in S:
                    continue
                T = tuple(sorted(S + (j,)))
                blocks[(pos[T], c)] = koszul_sign(S, j) * op[j].matrix.astype(object)
        diffs.append(block_morphism([group] * len(Y[i]), [group] * len(Y[i + 1]), blocks))
    return CochainComplex(tuple(terms), tuple(diffs))


# ---------------------------------------------------------------------------
# graded strands of the polynomial Koszul complex
# ---------------------------------------------------------------------------

@dataclass
class StrandResult:
    degree: int
    ranks: list[int]              # ranks of K_k, ..., K_0 in this strand
    homology: list[FinAbGroup]    # H_k, ..., H_0
    passed: bool


def _monomials(k: int, deg: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(k), deg):
        e = [0] * k
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return out


def koszul_strand(p: int, N: int, k: int, degree: int) -> CochainComplex:
    """Total-degree ``degree`` strand of the Koszul complex on ``x_1..x_k``.

    Terms are listed from homological degree ``k`` down to ``0``; the basis of
    ``K_i`` is ``e_T * m`` with ``|T| = i`` and ``m`` a monomial of degree
    ``degree - i``. ``d(e_T m) = sum_{j in T} (-1)^a(T - j, j) x_j m e_{T - j}``.
    """
    labels = list(range(1, k + 1))
    basis = []
    for i in range(k, -1, -1):
        basis.append([(T, m) for T in subsets(labels, i)
                      for m in (_monomials(k, degree - i) if degree >= i else [])])
    terms = [FinAbGroup(p, (N,) * len(b)) for b in basis]
    diffs = []
    for c in range(k):
        src, tgt = basis[c], basis[c + 1]
        pos = {b: r for r, b in enumerate(tgt)}
        M = np.zeros((len(tgt), len(src)), dtype=object)
        for col, (T, m) in enumerate(src):
            for j in T:
                S = tuple(y for y in T if y != j)
                mm = list(m)
                mm[j - 1] += 1
                M[pos[(S, tuple(mm))], col] += koszul_sign(S, j)
        diffs.append(AbMorphism(terms[c], terms[c + 1], M))
    return CochainComplex(tuple(terms), tuple(diffs))


def graded_strand_audit(p: int, N: int, k: int, D: int, raise_on_failure: bool = True) -> list[StrandResult]:
    """Check the graded strands of degree ``0..D`` of the Koszul complex over ``Z/p^N[x_1..x_k]``.

    Every strand of positive degree must be exact; the degree-0 strand has
    ``H_0 = Z/p^N`` and nothing else.
    """
    if k < 1:
        raise ValueError("need at least one variable")
    results = []
    for d in range(D + 1):
        C = koszul_strand(p, N, k, d)
        H = cohomology(C)
        ranks = [t.rank for t in C.terms]
        if d == 0:
            ok = all(h.rank == 0 for h in H[:-1]) and H[-1].invariant_factors == (N,)
        else:
            ok = all(h.rank == 0 for h in H)
        expected = [comb(k, i) * comb(k - 1 + d - i, d - i) if d >= i else 0
                    for i in range(k, -1, -1)]
        ok = ok and ranks == expected
        results.append(StrandResult(d, ranks, H, ok))
        if not ok and raise_on_failure:
            raise StrandNotExact(
                f"k={k}, degree {d}: homology {[str(h) for h in H]} (ranks {ranks})")
    return results
