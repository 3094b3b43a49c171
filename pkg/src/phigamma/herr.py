"""Herr-type complexes at finite level.

Index sets: ``X(i)`` is the family of size-``i`` subsets of ``{0, ..., n}`` in
lexicographic order, with ``0`` the gamma-direction. The ``(S, T)`` entry of a
differential (``S`` in ``X(i)``, ``T = S u {j}``) is ``tau_S`` when ``j = 0``
and ``(-1)^a(S, j) omega_j`` otherwise.

* :func:`build_c_lambda` -- the free complex over ``R`` (entries act by right
  multiplication).
* :func:`build_c_gamma` -- ``Hom_R(C_Lambda, M)``, terms ``M^X(i)``.
* :func:`build_c_gamma_via_fiber` -- the same complex assembled as the mapping
  fiber of ``tau_S`` acting diagonally on the Koszul complex of the ``omega_j``.
* :func:`build_c_phi_gamma` -- mapping fiber of ``phi - 1`` on ``C_Gamma(M)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np

from . import iwasawa as iw
from .checks import CheckResult
from .errors import (
    BetaNotTrivial,
    CompositeNonzero,
    FixtureMismatch,
    NotAChainMap,
    PhiDoesNotCommute,
    PhiMissing,
)
from .homalg import (
    AbMorphism,
    ChainMap,
    CochainComplex,
    FinAbGroup,
    block_morphism,
    cohomology,
    euler_characteristic,
    induced_map_lengths,
    koszul_cochain,
    koszul_sign,
    mapping_fiber,
    subsets,
)
from .iwasawa import GroupLevelParams, RingElement
from .pgmod import TorsionPhiGammaModuleSpec, is_etale, regular_module, validate_module

Construction = Literal["direct", "iterated-fiber", "closed-form"]


def index_sets(n: int) -> list[list[tuple[int, ...]]]:
    return [subsets(range(n + 1), i) for i in range(n + 2)]


def _entry(gp: GroupLevelParams, S: tuple[int, ...], T: tuple[int, ...], cache: dict) -> RingElement | None:
    if not set(S) < set(T):
        return None
    (j,) = set(T) - set(S)
    key = ("tau", S) if j == 0 else ("omega", j, koszul_sign(S, j))
    if key not in cache:
        cache[key] = iw.tau_s(gp, S) if j == 0 else koszul_sign(S, j) * iw.omega(gp, j)
    return cache[key]


@dataclass(frozen=True, eq=False)
class FreeRingComplex:
    """``0 -> R^X(n+1) -> ... -> R^X(0) -> 0``; ``d_i : R^X(i+1) -> R^X(i)``.

    ``matrices[i][s][t]`` is the ``(X(i)[s], X(i+1)[t])`` entry ``e`` and
    ``d_i(x)_S = sum_T x_T e(S, T)``.
    """

    gp: GroupLevelParams
    index: list[list[tuple[int, ...]]]
    matrices: list[list[list[RingElement]]] = field(repr=False)

    def ranks(self) -> list[int]:
        return [len(X) for X in self.index]


def build_c_lambda(gp: GroupLevelParams) -> FreeRingComplex:
    X = index_sets(gp.n)
    cache: dict = {}
    zero = iw.zero(gp)
    mats = []
    for i in range(gp.n + 1):
        mats.append([[_entry(gp, S, T, cache) or zero for T in X[i + 1]] for S in X[i]])
    return FreeRingComplex(gp, X, mats)


def audit_d_squared(C: FreeRingComplex, raise_on_failure: bool = True) -> list[CheckResult]:
    """Check ``d_{i-1} d_i = 0`` entrywise (entry ``(S', T) = sum_S e_i(S, T) e_{i-1}(S', S)``)."""
    out = []
    X = C.index
    for i in range(1, len(C.matrices)):
        upper, lower = C.matrices[i], C.matrices[i - 1]
        bad = None
        for a, S2 in enumerate(X[i - 1]):
            for t, T in enumerate(X[i + 1]):
                total = iw.zero(C.gp)
                for s in range(len(X[i])):
                    if not upper[s][t].is_zero() and not lower[a][s].is_zero():
                        total = total + upper[s][t] * lower[a][s]
                if not total.is_zero():
                    bad = f"(S={set(S2) or '{}'}, T={set(T)})"
                    break
            if bad:
                break
        out.append(CheckResult(f"d_{i - 1} o d_{i} = 0", bad is None, bad))
        if bad and raise_on_failure:
            raise CompositeNonzero(f"d_{i - 1} o d_{i} has a nonzero entry at {bad}")
    if not out:
        out.append(CheckResult("d o d = 0 (single map)", True))
    return out


class _Actions:
    """Memoized action matrices of ``tau_S`` and ``omega_j`` on a module."""

    def __init__(self, M: TorsionPhiGammaModuleSpec):
        self.M = M
        self._cache: dict = {}

    def tau(self, S) -> AbMorphism:
        key = ("tau", tuple(S))
        if key not in self._cache:
            self._cache[key] = self.M.act(iw.tau_s(self.M.gp, S))
        return self._cache[key]

    def omega(self, j: int) -> AbMorphism:
        key = ("omega", j)
        if key not in self._cache:
            self._cache[key] = self.M.act(iw.omega(self.M.gp, j))
        return self._cache[key]


def build_c_gamma(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec,
                  actions: _Actions | None = None) -> CochainComplex:
    """``C_Gamma(M)``: the ``(S, T)`` block of ``d^i`` is the action of the ``C_Lambda`` entry."""
    if M.gp != gp:
        raise iw.LevelMismatch("module and parameters differ")
    A = actions or _Actions(M)
    X = index_sets(gp.n)
    G = M.group
    terms = [G.power(len(Xi)) for Xi in X]
    diffs = []
    for i in range(gp.n + 1):
        blocks = {}
        for s, S in enumerate(X[i]):
            for t, T in enumerate(X[i + 1]):
                if not set(S) < set(T):
                    continue
                (j,) = set(T) - set(S)
                f = A.tau(S) if j == 0 else A.omega(j)
                sign = 1 if j == 0 else koszul_sign(S, j)
                blocks[(t, s)] = sign * f.matrix.astype(object)
        diffs.append(block_morphism([G] * len(X[i]), [G] * len(X[i + 1]), blocks))
    return CochainComplex(tuple(terms), tuple(diffs))


def build_c_gamma_via_fiber(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec,
                            actions: _Actions | None = None) -> CochainComplex:
    """Mapping fiber of ``diag(tau_S)`` on the Koszul complex ``K(omega_1, ..., omega_n; M)``."""
    if M.gp != gp:
        raise iw.LevelMismatch("module and parameters differ")
    A = actions or _Actions(M)
    G = M.group
    K = koszul_cochain(G, [A.omega(j) for j in range(1, gp.n + 1)])
    labels = list(range(1, gp.n + 1))
    comps = []
    for i in range(gp.n + 1):
        Y = subsets(labels, i)
        blocks = {(s, s): A.tau(S).matrix for s, S in enumerate(Y)}
        comps.append(block_morphism([G] * len(Y), [G] * len(Y), blocks))
    try:
        f = ChainMap(K, K, tuple(comps))
    except NotAChainMap as exc:
        raise NotAChainMap(f"tau_S is not a chain map of the Koszul complex: {exc}") from exc
    return mapping_fiber(f)


def _rho_map(C: CochainComplex, M: TorsionPhiGammaModuleSpec) -> ChainMap:
    if M.phi is None:
        raise PhiMissing("module has no phi")
    rho = M.phi - AbMorphism.identity(M.group)
    comps = []
    for T in C.terms:
        k = T.rank // max(M.rank, 1) if M.rank else 0
        comps.append(block_morphism([M.group] * k, [M.group] * k,
                                    {(s, s): rho.matrix for s in range(k)})
                     if k else AbMorphism.zero(T, T))
    try:
        return ChainMap(C, C, tuple(comps))
    except NotAChainMap as exc:
        raise PhiDoesNotCommute(f"phi - 1 is not a chain map: {exc}") from exc


def build_c_phi_gamma(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec,
                      via: Construction = "direct", actions: _Actions | None = None) -> CochainComplex:
    """Mapping fiber of ``rho = phi - 1`` acting degreewise on ``C_Gamma(M)``."""
    builder = build_c_gamma if via == "direct" else build_c_gamma_via_fiber
    C = builder(gp, M, actions)
    return mapping_fiber(_rho_map(C, M))


def rho_length_identity(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec,
                        actions: _Actions | None = None) -> list[CheckResult]:
    """``len H^i(C_phi,Gamma) = len ker H^i(rho) + len coker H^{i-1}(rho)`` in every degree."""
    C = build_c_gamma(gp, M, actions)
    rho = _rho_map(C, M)
    H = cohomology(mapping_fiber(rho))
    out = []
    for i, h in enumerate(H):
        ker_i = induced_map_lengths(rho, i)[0] if i <= C.top else 0
        coker_prev = induced_map_lengths(rho, i - 1)[1] if i >= 1 else 0
        ok = h.length == ker_i + coker_prev
        out.append(CheckResult(f"len H^{i}(C_phi_gamma) = len ker + len coker", ok,
                               None if ok else f"{h.length} != {ker_i} + {coker_prev}"))
    return out


# ---------------------------------------------------------------------------
# closed form for modules with trivial beta-action
# ---------------------------------------------------------------------------

def _ker_coker(G: FinAbGroup, f: AbMorphism) -> tuple[FinAbGroup, FinAbGroup]:
    H = cohomology(CochainComplex((G, G), (f,)), method="integer")
    return H[0], H[1]


def closed_form_beta_trivial(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec) -> list[FinAbGroup]:
    """Cohomology of ``C_Gamma(M)`` when every ``beta_i`` acts trivially.

    Then ``omega_i`` acts by 0 and ``tau_S`` by ``c^|S| G - 1`` with
    ``c = l^-1 mod p^N``, so the complex splits into two-term pieces and
    ``H^i = (+)_{|S|=i} ker(tau_S) (+) (+)_{|S|=i-1} coker(tau_S)``.
    """
    if not M.beta_trivial:
        raise BetaNotTrivial("some beta_i acts nontrivially")
    c = pow(gp.l, -1, gp.modulus)
    grp = M.group
    I = np.eye(grp.rank, dtype=object)
    pieces = []
    for s in range(gp.n + 1):
        t = AbMorphism(grp, grp, pow(c, s, gp.modulus) * M.gamma.matrix.astype(object) - I)
        pieces.append(_ker_coker(grp, t))
    out = []
    for i in range(gp.n + 2):
        exps: list[int] = []
        if i <= gp.n:
            exps += list(pieces[i][0].exponents) * comb(gp.n, i)
        if i >= 1:
            exps += list(pieces[i - 1][1].exponents) * comb(gp.n, i - 1)
        out.append(FinAbGroup.canonical(gp.p, exps))
    return out


# ---------------------------------------------------------------------------
# fixtures for n = 0 and n = 1
# ---------------------------------------------------------------------------

def _fixture_c_lambda(gp: GroupLevelParams) -> list[list[list[RingElement]]]:
    t = iw.tau(gp)
    if gp.n == 0:
        return [[[t]]]
    w, t1 = iw.omega(gp, 1), iw.tau_s(gp, [1])
    # d_0(f, g) = f tau + g omega_1 ; d_1(f) = (-f omega_1, f tau_{1})
    return [[[t, w]], [[-w], [t1]]]


def _fixture_c_phi_gamma(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec) -> list[np.ndarray]:
    A = _Actions(M)
    d = M.rank
    rho = (M.phi - AbMorphism.identity(M.group)).matrix.astype(object)
    t = A.tau(()).matrix.astype(object)
    Z = np.zeros((d, d), dtype=object)
    if gp.n == 0:
        # d0(x) = (rho x, tau x) ; d1(x, y) = rho y - tau x
        return [np.vstack([rho, t]), np.hstack([-t, rho])]
    w = A.omega(1).matrix.astype(object)
    t1 = A.tau((1,)).matrix.astype(object)
    d0 = np.vstack([rho, t, w])
    # d1(x, y, z) = (rho y - tau x, rho z - omega_1 x, tau_{1} z - omega_1 y)
    d1 = np.block([[-t, rho, Z], [-w, Z, rho], [Z, -w, t1]])
    # d2(x, y, z) = rho z - tau_{1} y + omega_1 x
    d2 = np.hstack([w, -t1, rho])
    return [d0, d1, d2]


def compare_fixtures(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec | None = None,
                     raise_on_failure: bool = True) -> list[CheckResult]:
    """Compare the generic builders with the hand-written n = 0, 1 complexes, matrix by matrix."""
    if gp.n not in (0, 1):
        raise ValueError("fixtures exist for n = 0 and n = 1 only")
    if M is None:
        M = regular_module(gp)
    validate_module(M)
    out = []

    def record(name, ok, witness=None):
        out.append(CheckResult(name, ok, witness))
        if not ok and raise_on_failure:
            raise FixtureMismatch(f"{name}: {witness}")

    CL = build_c_lambda(gp)
    for i, (got, want) in enumerate(zip(CL.matrices, _fixture_c_lambda(gp))):
        diff = [(s, t) for s in range(len(want)) for t in range(len(want[0]))
                if got[s][t] != want[s][t]]
        record(f"C_Lambda d_{i}", not diff, f"entry {diff[0]}" if diff else None)
    C = build_c_phi_gamma(gp, M)
    wanted = _fixture_c_phi_gamma(gp, M)
    if len(C.differentials) != len(wanted):
        record("C_phi_gamma length", False, f"{len(C.differentials)} maps")
    for i, (f, want) in enumerate(zip(C.differentials, wanted)):
        W = AbMorphism(f.source, f.target, want)
        if f == W:
            record(f"C_phi_gamma d^{i}", True)
            continue
        d = M.rank
        bad = np.argwhere(f.matrix.astype(object) != W.matrix.astype(object))[0]
        record(f"C_phi_gamma d^{i}", False,
               f"block (row {bad[0] // d}, col {bad[1] // d})")
    return out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class CohomologyReport:
    params: tuple[int, int, int, int, int]
    complex: str                      # "C_gamma" | "C_phi_gamma"
    construction: str                 # "direct" | "iterated-fiber" | "closed-form"
    cohomology: list[FinAbGroup]
    euler_characteristic: int
    etale: bool | None = None

    def lengths(self) -> list[int]:
        return [h.length for h in self.cohomology]

    def as_dict(self) -> dict:
        return {
            "params": dict(zip(("p", "n", "m", "N", "l"), self.params)),
            "complex": self.complex,
            "construction": self.construction,
            "cohomology": [{"degree": i, "invariant_factors": list(h.invariant_factors)}
                           for i, h in enumerate(self.cohomology)],
            "euler_characteristic": self.euler_characteristic,
            "etale": self.etale,
        }


def cohomology_report(gp: GroupLevelParams, M: TorsionPhiGammaModuleSpec, with_phi: bool = False,
                      construction: Construction = "direct") -> CohomologyReport:
    validate_module(M)
    if construction == "closed-form":
        if with_phi:
            raise ValueError("the closed form covers C_Gamma only")
        H = closed_form_beta_trivial(gp, M)
    elif with_phi:
        H = cohomology(build_c_phi_gamma(gp, M, via=construction))
    else:
        builder = build_c_gamma if construction == "direct" else build_c_gamma_via_fiber
        H = cohomology(builder(gp, M))
    etale = is_etale(M) if M.phi is not None else None
    return CohomologyReport(gp.astuple(), "C_phi_gamma" if with_phi else "C_gamma",
                            construction, H, euler_characteristic(H), etale)
