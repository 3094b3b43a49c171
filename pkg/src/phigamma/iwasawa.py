"""Finite-level group rings ``R = Z/p^N [Gamma_m]``.

``Gamma_m`` is the semidirect product ``Z/p^m  x|  (Z/p^m)^n`` generated by
``gamma`` and ``beta_1..beta_n`` with ``gamma beta_i gamma^-1 = beta_i^lam``,
``lam = l mod p^m``. Every element has the unique normal form
``gamma^a beta_1^c_1 ... beta_n^c_n`` and is stored as the mixed-radix index
of the digits ``(a, c_1, ..., c_n)`` (base ``p^m``, ``a`` most significant), so
the enumeration is lexicographic in ``(a, c)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable

import numpy as np

from .checks import CheckResult
from .errors import (
    BadLevel,
    BadUnit,
    CongruenceViolation,
    IncompatibleLevels,
    IndexOutOfRange,
    LevelMismatch,
    NonPrime,
    NotAUnit,
    RelationFailure,
)
from .homalg import dtype_for

_TABLE_LIMIT = 1024


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class GroupLevelParams:
    """Truncation data ``(p, n, m, N, l)``; validated on construction."""

    p: int
    n: int
    m: int
    N: int
    l: int

    def __post_init__(self):
        p, n, m, N, l = self.p, self.n, self.m, self.N, self.l
        if not is_prime(p):
            raise NonPrime(f"p = {p} is not prime")
        if m < 1 or N < 1 or n < 0:
            raise BadLevel(f"need m >= 1, N >= 1, n >= 0 (got n={n}, m={m}, N={N})")
        if l < 1 or l % p == 0:
            raise BadUnit(f"l = {l} must be a positive integer prime to p")
        if p == 2 and l % 4 != 1:
            raise CongruenceViolation(f"l = {l} is not 1 mod 4")
        if p != 2 and l % p != 1:
            raise CongruenceViolation(f"l = {l} is not 1 mod {p}")
        q = p**m
        assert pow(l % q, q, q) == 1 % q

    @property
    def q(self) -> int:
        """Order of each cyclic factor, ``p^m``."""
        return self.p**self.m

    @property
    def lam(self) -> int:
        return self.l % self.q

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @property
    def size(self) -> int:
        return self.q ** (self.n + 1)

    @property
    def dtype(self):
        return dtype_for(self.modulus)

    def astuple(self) -> tuple[int, int, int, int, int]:
        return (self.p, self.n, self.m, self.N, self.l)

    @cached_property
    def digits(self) -> np.ndarray:
        """``digits[k] = (a, c_1, ..., c_n)`` of the k-th group element."""
        idx = np.arange(self.size)
        cols = []
        for pos in range(self.n, -1, -1):
            cols.append((idx // self.q**pos) % self.q)
        return np.stack(cols, axis=1)

    @cached_property
    def lam_inv_powers(self) -> np.ndarray:
        """``lam^{-a} mod p^m`` for ``a = 0..p^m - 1``."""
        inv = pow(self.lam, -1, self.q)
        return np.array([pow(inv, a, self.q) for a in range(self.q)], dtype=np.int64)

    @cached_property
    def _place(self) -> np.ndarray:
        return np.array([self.q**pos for pos in range(self.n, -1, -1)], dtype=np.int64)

    def index(self, g: "GroupElement") -> int:
        return int(np.dot((g.a,) + g.c, self._place))

    def element(self, k: int) -> "GroupElement":
        d = self.digits[k]
        return GroupElement(int(d[0]), tuple(int(x) for x in d[1:]))

    def left_perm(self, k: int) -> np.ndarray:
        """``out[h] = index(g_k * g_h)`` for every ``h``."""
        if self.size <= _TABLE_LIMIT:
            return self._mul_table[k]
        return self._left_perm(k)

    def _left_perm(self, k: int) -> np.ndarray:
        a, c = self.digits[k, 0], self.digits[k, 1:]
        D = self.digits
        new_a = (a + D[:, 0]) % self.q
        new_c = (c[None, :] * self.lam_inv_powers[D[:, 0]][:, None] + D[:, 1:]) % self.q
        return np.concatenate([new_a[:, None], new_c], axis=1) @ self._place

    @cached_property
    def _mul_table(self) -> np.ndarray:
        return np.stack([self._left_perm(k) for k in range(self.size)])


def validate_params(p: int, n: int, m: int, N: int, l: int) -> GroupLevelParams:
    return GroupLevelParams(int(p), int(n), int(m), int(N), int(l))


# ---------------------------------------------------------------------------
# group elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """``gamma^a beta_1^c_1 ... beta_n^c_n``."""

    a: int
    c: tuple[int, ...] = ()


def identity(gp: GroupLevelParams) -> GroupElement:
    return GroupElement(0, (0,) * gp.n)


def normalize(gp: GroupLevelParams, g: GroupElement) -> GroupElement:
    if len(g.c) != gp.n:
        raise IndexOutOfRange(f"expected {gp.n} beta exponents, got {len(g.c)}")
    return GroupElement(g.a % gp.q, tuple(x % gp.q for x in g.c))


def elem_mul(gp: GroupLevelParams, g: GroupElement, h: GroupElement) -> GroupElement:
    """``(a, c) (a', c') = (a + a', c lam^{-a'} + c')``."""
    g, h = normalize(gp, g), normalize(gp, h)
    s = int(gp.lam_inv_powers[h.a])
    return GroupElement((g.a + h.a) % gp.q,
                        tuple((x * s + y) % gp.q for x, y in zip(g.c, h.c)))


def elem_inv(gp: GroupLevelParams, g: GroupElement) -> GroupElement:
    g = normalize(gp, g)
    s = pow(gp.lam, g.a, gp.q)
    return GroupElement(-g.a % gp.q, tuple(-x * s % gp.q for x in g.c))


# ---------------------------------------------------------------------------
# ring elements
# ---------------------------------------------------------------------------

class RingElement:
    """Element of ``Z/p^N [Gamma_m]`` as a dense coefficient vector."""

    __slots__ = ("gp", "coeffs")

    def __init__(self, gp: GroupLevelParams, coeffs):
        c = np.asarray(coeffs, dtype=object) % gp.modulus
        if c.shape != (gp.size,):
            raise ValueError(f"expected {gp.size} coefficients, got shape {c.shape}")
        c = c.astype(gp.dtype) if gp.dtype is not object else c
        c.setflags(write=False)
        self.gp = gp
        self.coeffs = c

    def _check(self, other: "RingElement"):
        if not isinstance(other, RingElement):
            raise TypeError(f"cannot combine RingElement with {type(other).__name__}")
        if other.gp != self.gp:
            raise LevelMismatch(f"{self.gp} vs {other.gp}")

    def __add__(self, other):
        if isinstance(other, int):
            other = scalar(self.gp, other)
        self._check(other)
        return RingElement(self.gp, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.gp, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, int):
            other = scalar(self.gp, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return RingElement(self.gp, self.coeffs * (other % self.gp.modulus))
        self._check(other)
        gp = self.gp
        out = np.zeros(gp.size, dtype=gp.dtype)
        for k in np.flatnonzero(self.coeffs):
            out[gp.left_perm(int(k))] += self.coeffs[k] * other.coeffs
            out %= gp.modulus
        return RingElement(gp, out)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, e: int):
        out = one(self.gp)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = scalar(self.gp, other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.gp == other.gp and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def support(self) -> list[tuple[GroupElement, int]]:
        return [(self.gp.element(int(k)), int(self.coeffs[k]))
                for k in np.flatnonzero(self.coeffs)]

    def __repr__(self):
        terms = []
        for g, c in self.support():
            word = "".join(
                [f"g^{g.a}" if g.a else ""]
                + [f"b{i + 1}^{x}" for i, x in enumerate(g.c) if x])
            terms.append(f"{c}" if not word else (word if c == 1 else f"{c}*{word}"))
        return "RingElement(" + (" + ".join(terms) or "0") + ")"


def ring_add(gp: GroupLevelParams, r: RingElement, s: RingElement) -> RingElement:
    if r.gp != gp or s.gp != gp:
        raise LevelMismatch("operands are not over the given level")
    return r + s


def ring_mul(gp: GroupLevelParams, r: RingElement, s: RingElement) -> RingElement:
    if r.gp != gp or s.gp != gp:
        raise LevelMismatch("operands are not over the given level")
    return r * s


def zero(gp: GroupLevelParams) -> RingElement:
    return RingElement(gp, np.zeros(gp.size, dtype=object))


def scalar(gp: GroupLevelParams, c: int) -> RingElement:
    v = np.zeros(gp.size, dtype=object)
    v[0] = c
    return RingElement(gp, v)


def one(gp: GroupLevelParams) -> RingElement:
    return scalar(gp, 1)


def basis_element(gp: GroupLevelParams, g: GroupElement) -> RingElement:
    v = np.zeros(gp.size, dtype=object)
    v[gp.index(normalize(gp, g))] = 1
    return RingElement(gp, v)


def gamma(gp: GroupLevelParams) -> RingElement:
    return basis_element(gp, GroupElement(1, (0,) * gp.n))


def _check_index(gp: GroupLevelParams, i: int):
    if not 1 <= i <= gp.n:
        raise IndexOutOfRange(f"index {i} outside 1..{gp.n}")


def beta_power(gp: GroupLevelParams, i: int, e: int = 1) -> RingElement:
    _check_index(gp, i)
    c = [0] * gp.n
    c[i - 1] = e
    return basis_element(gp, GroupElement(0, tuple(c)))


def augmentation(gp: GroupLevelParams, r: RingElement) -> int:
    """Sum of coefficients, in ``Z/p^N``."""
    return int(np.sum(r.coeffs.astype(object))) % gp.modulus


def omega(gp: GroupLevelParams, i: int) -> RingElement:
    """``beta_i - 1``."""
    return beta_power(gp, i) - 1


def big_w(gp: GroupLevelParams, i: int) -> RingElement:
    """``beta_i^l - 1`` (``beta_i^l = beta_i^lam`` in ``Gamma_m``)."""
    return beta_power(gp, i, gp.lam) - 1


def tau(gp: GroupLevelParams) -> RingElement:
    return gamma(gp) - 1


# -- units -------------------------------------------------------------------

def _solve_unit_system(L: np.ndarray, b: np.ndarray, p: int, N: int) -> np.ndarray:
    """Solve ``L x = b`` over ``Z/p^N`` for ``L`` invertible mod ``p``."""
    mod = p**N
    dt = dtype_for(mod)
    n = L.shape[0]
    A = np.concatenate([np.asarray(L, dtype=object) % mod,
                        np.asarray(b, dtype=object).reshape(n, 1) % mod], axis=1)
    A = A.astype(dt) if dt is not object else A
    for col in range(n):
        piv = np.flatnonzero(A[col:, col] % p != 0)
        if len(piv) == 0:
            raise NotAUnit("matrix is singular modulo p")
        r = col + int(piv[0])
        if r != col:
            A[[col, r]] = A[[r, col]]
        A[col] = A[col] * pow(int(A[col, col]), -1, mod) % mod
        f = A[:, col].copy()
        f[col] = 0
        nz = np.flatnonzero(f)
        if len(nz):
            A[nz] = (A[nz] - np.outer(f[nz], A[col])) % mod
    return A[:, n]


def left_mult_matrix(r: RingElement) -> np.ndarray:
    """Matrix of ``s -> r s`` on the coefficient vector of ``s``."""
    gp = r.gp
    L = np.zeros((gp.size, gp.size), dtype=gp.dtype)
    cols = np.arange(gp.size)
    for k in np.flatnonzero(r.coeffs):
        L[gp.left_perm(int(k)), cols] += r.coeffs[k]
    return L % gp.modulus


def invert_unit(gp: GroupLevelParams, r: RingElement) -> RingElement:
    """Two-sided inverse, by a linear solve of ``r s = 1``."""
    if r.gp != gp:
        raise LevelMismatch("operand is not over the given level")
    if augmentation(gp, r) % gp.p == 0:
        raise NotAUnit(f"augmentation {augmentation(gp, r)} is not a unit mod {gp.p}")
    rhs = one(gp).coeffs
    s = RingElement(gp, _solve_unit_system(left_mult_matrix(r), rhs, gp.p, gp.N))
    if not (r * s == 1 and s * r == 1):
        raise NotAUnit("linear solve did not produce a two-sided inverse")
    return s


@functools.lru_cache(maxsize=None)
def _cyclic_u(gp: GroupLevelParams) -> tuple[RingElement, RingElement]:
    """``u`` and its inverse in ``Z/p^N[<x>]``, ``x`` of order ``p^m``.

    Uses the level with ``n = 0`` (commutative, generated by one element).
    """
    cp = GroupLevelParams(gp.p, 0, gp.m, gp.N, gp.l)
    w = gamma(cp) - 1
    K = gp.N * gp.q          # w^K = 0 in the ring
    u = zero(cp)
    wk = one(cp)
    for k in range(1, min(gp.l, K) + 1):
        u = u + (comb(gp.l, k) % gp.modulus) * wk
        wk = wk * w
    return u, invert_unit(cp, u)


def _embed_cyclic(gp: GroupLevelParams, i: int, r: RingElement) -> RingElement:
    out = np.zeros(gp.size, dtype=object)
    for a in range(gp.q):
        c = [0] * gp.n
        c[i - 1] = a
        out[gp.index(GroupElement(0, tuple(c)))] = r.coeffs[a]
    return RingElement(gp, out)


def u_unit(gp: GroupLevelParams, i: int) -> RingElement:
    """``sum_{k>=1} C(l, k) omega_i^{k-1}``, the unit with ``u_i omega_i = W_i``."""
    _check_index(gp, i)
    return _embed_cyclic(gp, i, _cyclic_u(gp)[0])


def v_unit(gp: GroupLevelParams, i: int) -> RingElement:
    """Inverse of :func:`u_unit`, i.e. ``omega_i W_i^{-1}``."""
    _check_index(gp, i)
    return _embed_cyclic(gp, i, _cyclic_u(gp)[1])


def tau_s(gp: GroupLevelParams, S: Iterable[int]) -> RingElement:
    """``(prod_{i in S} v_i) gamma - 1``."""
    S = sorted(set(S))
    for i in S:
        _check_index(gp, i)
    vs = [v_unit(gp, i) for i in S]
    for a in range(len(vs)):
        for b in range(a + 1, len(vs)):
            if vs[a] * vs[b] != vs[b] * vs[a]:
                raise RelationFailure(f"v_{S[a]} and v_{S[b]} do not commute")
    prod = one(gp)
    for v in vs:
        prod = prod * v
    return prod * gamma(gp) - 1


# ---------------------------------------------------------------------------
# level change
# ---------------------------------------------------------------------------

def project_level(gp_from: GroupLevelParams, gp_to: GroupLevelParams, r: RingElement) -> RingElement:
    """Ring map induced by ``Gamma_m -> Gamma_m'`` and ``Z/p^N -> Z/p^N'``."""
    if (gp_from.p, gp_from.n, gp_from.l) != (gp_to.p, gp_to.n, gp_to.l) \
            or gp_to.m > gp_from.m or gp_to.N > gp_from.N:
        raise IncompatibleLevels(f"cannot project {gp_from} to {gp_to}")
    if r.gp != gp_from:
        raise LevelMismatch("operand is not over the source level")
    target = (gp_from.digits % gp_to.q) @ gp_to._place
    out = np.zeros(gp_to.size, dtype=object)
    np.add.at(out, target, r.coeffs.astype(object))
    return RingElement(gp_to, out)


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

def check_relations(gp: GroupLevelParams, raise_on_failure: bool = True) -> list[CheckResult]:
    """Verify the defining relations among ``gamma, omega_i, W_i, u_i, v_i, tau_S``."""
    results: list[CheckResult] = []

    def record(name: str, ok: bool):
        results.append(CheckResult(name, bool(ok), None if ok else name))
        if not ok and raise_on_failure:
            raise RelationFailure(name)

    n = gp.n
    g = gamma(gp)
    w = {i: omega(gp, i) for i in range(1, n + 1)}
    W = {i: big_w(gp, i) for i in range(1, n + 1)}
    u = {i: u_unit(gp, i) for i in range(1, n + 1)}
    v = {i: v_unit(gp, i) for i in range(1, n + 1)}

    for i in range(1, n + 1):
        gb = elem_mul(gp, GroupElement(1, (0,) * n), GroupElement(0, tuple(int(j == i - 1) for j in range(n))))
        bg = elem_mul(gp, GroupElement(0, tuple(gp.lam * int(j == i - 1) for j in range(n))), GroupElement(1, (0,) * n))
        record(f"gamma beta_{i} = beta_{i}^l gamma", gb == bg)
    for i, j in combinations(range(1, n + 1), 2):
        record(f"omega_{i} omega_{j} = omega_{j} omega_{i}", w[i] * w[j] == w[j] * w[i])
        record(f"W_{i} W_{j} = W_{j} W_{i}", W[i] * W[j] == W[j] * W[i])
    for i in range(1, n + 1):
        record(f"gamma omega_{i} = W_{i} gamma", g * w[i] == W[i] * g)
        record(f"u_{i} omega_{i} = W_{i}", u[i] * w[i] == W[i])
        record(f"u_{i} v_{i} = 1", u[i] * v[i] == 1)
        record(f"v_{i} u_{i} = 1", v[i] * u[i] == 1)
    family = [(f"u_{i}", u[i]) for i in u] + [(f"v_{i}", v[i]) for i in v] + [(f"omega_{i}", w[i]) for i in w]
    for (na, a), (nb, b) in combinations(family, 2):
        record(f"{na} {nb} = {nb} {na}", a * b == b * a)
    for size in range(1, n + 1):
        for S in combinations(range(1, n + 1), size):
            tS = tau_s(gp, S)
            for i in S:
                rest = tuple(x for x in S if x != i)
                record(f"tau_{set(S)} omega_{i} = omega_{i} tau_{set(rest) if rest else '{}'}",
                       tS * w[i] == w[i] * tau_s(gp, rest))
    return results
