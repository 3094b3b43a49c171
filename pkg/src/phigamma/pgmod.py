"""Torsion (phi, Gamma)-modules presented as finite matrix data.

A module is a finite abelian p-group ``M`` (killed by ``p^N``) with matrices
for ``gamma``, ``beta_1..beta_n`` and optionally the Frobenius ``phi``. The
Gamma-action must factor through ``Gamma_m``. The coefficients are ``Z/p^N``,
on which the Frobenius of the coefficient ring acts trivially, so ``phi`` is
an ordinary additive endomorphism commuting with the Gamma-action.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import iwasawa as iw
from .errors import (
    FamilyConstraintViolated,
    InvalidModule,
    NotInvertible,
    ParseError,
    PhiDoesNotCommute,
    PhiGammaError,
    PhiMissing,
    SemidirectRelationFails,
    WrongOrder,
)
from .homalg import AbMorphism, FinAbGroup, local_snf, matmul_mod, subgroup_length
from .iwasawa import GroupLevelParams, RingElement


def _power(f: AbMorphism, e: int) -> AbMorphism:
    out = AbMorphism.identity(f.source)
    base = f
    while e:
        if e & 1:
            out = out @ base
        base = base @ base
        e >>= 1
    return out


@dataclass(frozen=True, eq=False)
class TorsionPhiGammaModuleSpec:
    gp: GroupLevelParams
    group: FinAbGroup
    gamma: AbMorphism
    beta: tuple[AbMorphism, ...]
    phi: AbMorphism | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(self.beta))

    def __eq__(self, other):
        if not isinstance(other, TorsionPhiGammaModuleSpec):
            return NotImplemented
        return (self.gp == other.gp and self.group == other.group
                and self.gamma == other.gamma and self.beta == other.beta
                and self.phi == other.phi)

    __hash__ = None

    @property
    def rank(self) -> int:
        return self.group.rank

    @cached_property
    def _gamma_powers(self) -> list[AbMorphism]:
        out = [AbMorphism.identity(self.group)]
        for _ in range(1, self.gp.q):
            out.append(self.gamma @ out[-1])
        return out

    @cached_property
    def _beta_powers(self) -> list[list[AbMorphism]]:
        table = []
        for B in self.beta:
            row = [AbMorphism.identity(self.group)]
            for _ in range(1, self.gp.q):
                row.append(B @ row[-1])
            table.append(row)
        return table

    def group_action(self, g: iw.GroupElement) -> AbMorphism:
        """``rho(gamma^a beta^c) = G^a B_1^c_1 ... B_n^c_n``."""
        f = self._gamma_powers[g.a % self.gp.q]
        for i, c in enumerate(g.c):
            if c % self.gp.q:
                f = f @ self._beta_powers[i][c % self.gp.q]
        return f

    def act(self, r: RingElement) -> AbMorphism:
        """Action of a ring element of ``R = Z/p^N[Gamma_m]`` on ``M``."""
        if r.gp != self.gp:
            raise iw.LevelMismatch("ring element and module live at different levels")
        mod = self.gp.p ** max(self.group.max_exponent, 1)
        acc = np.zeros((self.rank, self.rank), dtype=object)
        by_a: dict[int, np.ndarray] = {}
        for g, c in r.support():
            inner = by_a.setdefault(g.a, np.zeros((self.rank, self.rank), dtype=object))
            f = AbMorphism.identity(self.group)
            for i, e in enumerate(g.c):
                if e:
                    f = f @ self._beta_powers[i][e]
            inner += c * f.matrix.astype(object)
        for a, inner in by_a.items():
            acc += matmul_mod(self._gamma_powers[a].matrix.astype(object), inner % mod, mod)
        return AbMorphism(self.group, self.group, acc)

    @property
    def beta_trivial(self) -> bool:
        I = AbMorphism.identity(self.group)
        return all(B == I for B in self.beta)


def validate_module(spec: TorsionPhiGammaModuleSpec) -> TorsionPhiGammaModuleSpec:
    """Check the Gamma_m-module axioms and commutation with ``phi``."""
    gp, M = spec.gp, spec.group
    if M.p != gp.p:
        raise InvalidModule(f"group is a {M.p}-group, level has p = {gp.p}")
    if M.max_exponent > gp.N:
        raise InvalidModule(f"group exponent {M.max_exponent} exceeds N = {gp.N}")
    if len(spec.beta) != gp.n:
        raise InvalidModule(f"expected {gp.n} beta matrices, got {len(spec.beta)}")
    maps = [("gamma", spec.gamma)] + [(f"beta_{i + 1}", B) for i, B in enumerate(spec.beta)]
    if spec.phi is not None:
        maps.append(("phi", spec.phi))
    for name, f in maps:
        if f.source != M or f.target != M:
            raise InvalidModule(f"{name} is not an endomorphism of the module")
    I = AbMorphism.identity(M)
    for name, f in maps[:1 + gp.n]:
        if subgroup_length(M, f.matrix) != M.length:
            raise NotInvertible(f"{name} is not invertible")
        if _power(f, gp.q) != I:
            raise WrongOrder(f"{name}^{gp.q} is not the identity")
    for i, Bi in enumerate(spec.beta):
        for j in range(i + 1, gp.n):
            if Bi @ spec.beta[j] != spec.beta[j] @ Bi:
                raise SemidirectRelationFails(f"beta_{i + 1} and beta_{j + 1} do not commute")
        if spec.gamma @ Bi != _power(Bi, gp.lam) @ spec.gamma:
            raise SemidirectRelationFails(
                f"gamma beta_{i + 1} gamma^-1 != beta_{i + 1}^{gp.lam}")
    if spec.phi is not None:
        for name, f in maps[:1 + gp.n]:
            if spec.phi @ f != f @ spec.phi:
                raise PhiDoesNotCommute(f"phi does not commute with {name}")
    return spec


def is_etale(spec: TorsionPhiGammaModuleSpec) -> bool:
    """Whether the image of ``phi`` generates the module (here: ``phi`` surjective)."""
    if spec.phi is None:
        raise PhiMissing("module has no phi")
    return subgroup_length(spec.group, spec.phi.matrix) == spec.group.length


# ---------------------------------------------------------------------------
# example families
# ---------------------------------------------------------------------------

FAMILIES = ("trivial", "gamma_character", "beta_unipotent", "regular", "cyclic_quotient")


def _make(gp, group, G, Bs, F) -> TorsionPhiGammaModuleSpec:
    try:
        spec = TorsionPhiGammaModuleSpec(
            gp, group, AbMorphism(group, group, G),
            tuple(AbMorphism(group, group, B) for B in Bs),
            None if F is None else AbMorphism(group, group, F))
        return validate_module(spec)
    except PhiGammaError as exc:
        raise FamilyConstraintViolated(str(exc)) from exc


def trivial_module(gp: GroupLevelParams, exponents=(1,)) -> TorsionPhiGammaModuleSpec:
    group = FinAbGroup(gp.p, tuple(exponents))
    I = np.eye(group.rank, dtype=object)
    return _make(gp, group, I, [I] * gp.n, I)


def gamma_character(gp: GroupLevelParams, k: int = 1, phi_scalar: int = 1) -> TorsionPhiGammaModuleSpec:
    """Rank one over ``Z/p^N``: ``gamma`` acts by ``l^k``, the ``beta_i`` trivially."""
    group = FinAbGroup(gp.p, (gp.N,))
    G = [[pow(gp.l, k, gp.modulus) if k >= 0 else pow(pow(gp.l, -1, gp.modulus), -k, gp.modulus)]]
    return _make(gp, group, G, [[[1]]] * gp.n, [[phi_scalar]])


def beta_unipotent(gp: GroupLevelParams) -> TorsionPhiGammaModuleSpec:
    """``gamma = diag(l, 1)``, ``beta_i = [[1, i], [0, 1]]`` on ``(Z/p^N)^2``."""
    if gp.n < 1:
        raise FamilyConstraintViolated("beta_unipotent needs n >= 1")
    group = FinAbGroup(gp.p, (gp.N, gp.N))
    G = [[gp.l % gp.modulus, 0], [0, 1]]
    Bs = [[[1, i], [0, 1]] for i in range(1, gp.n + 1)]
    return _make(gp, group, G, Bs, np.eye(2, dtype=object))


def _left_matrix(r: RingElement) -> np.ndarray:
    return iw.left_mult_matrix(r).astype(object)


def _right_matrix(z: RingElement) -> np.ndarray:
    gp = z.gp
    cols = [(iw.RingElement(gp, np.eye(gp.size, dtype=object)[k]) * z).coeffs
            for k in range(gp.size)]
    return np.stack(cols, axis=1).astype(object)


def _random_element(gp: GroupLevelParams, rng: np.random.Generator) -> RingElement:
    return RingElement(gp, rng.integers(0, gp.modulus, size=gp.size).astype(object))


def regular_module(gp: GroupLevelParams, seed: int = 0) -> TorsionPhiGammaModuleSpec:
    """``R`` acting on itself from the left; ``phi`` is right multiplication by a seeded element."""
    group = FinAbGroup(gp.p, (gp.N,) * gp.size)
    z = _random_element(gp, np.random.default_rng(seed))
    G = _left_matrix(iw.gamma(gp))
    Bs = [_left_matrix(iw.beta_power(gp, i)) for i in range(1, gp.n + 1)]
    return _make(gp, group, G, Bs, _right_matrix(z))


def cyclic_quotient(gp: GroupLevelParams, seed: int = 0) -> TorsionPhiGammaModuleSpec:
    """The cyclic module ``R x = R / ann(x)`` for a seeded ``x`` of augmentation 0 mod p."""
    rng = np.random.default_rng(seed)
    x = _random_element(gp, rng)
    x = x - (iw.augmentation(gp, x) % gp.p)
    # columns g_k x span R x
    X = np.stack([(iw.basis_element(gp, gp.element(k)) * x).coeffs for k in range(gp.size)],
                 axis=1).astype(object)
    vals, U, V = local_snf(X, gp.p, gp.N, rows=True, cols=True)
    H = matmul_mod(X, V.astype(object), gp.modulus)[:, :len(vals)]
    exps = [gp.N - t for t in vals]
    group = FinAbGroup(gp.p, tuple(exps))
    Uo = U.astype(object)

    def restrict(L: np.ndarray) -> np.ndarray:
        img = matmul_mod(Uo, matmul_mod(L, H, gp.modulus), gp.modulus)[:len(vals)]
        for j, t in enumerate(vals):
            assert not np.any(img[j] % gp.p**t)
            img[j] = img[j] // gp.p**t
        return img

    G = restrict(_left_matrix(iw.gamma(gp)))
    Bs = [restrict(_left_matrix(iw.beta_power(gp, i))) for i in range(1, gp.n + 1)]
    return _make(gp, group, G, Bs, np.eye(group.rank, dtype=object))


_FAMILY_RE = re.compile(r"^(\w+)(?:[(:]\s*(-?\d+)\s*\)?)?$")


def builtin_family(gp: GroupLevelParams, name: str, seed: int = 0) -> TorsionPhiGammaModuleSpec:
    """Build a module from a named family.

    ``name`` is one of ``trivial``, ``gamma_character(k)`` (also
    ``gamma_character:k``; ``k`` defaults to 1), ``beta_unipotent``,
    ``regular``, ``cyclic_quotient``.
    """
    m = _FAMILY_RE.match(name.strip())
    if not m or m.group(1) not in FAMILIES:
        raise FamilyConstraintViolated(f"unknown family {name!r}")
    fam, arg = m.group(1), m.group(2)
    if arg is not None and fam != "gamma_character":
        raise FamilyConstraintViolated(f"family {fam} takes no argument")
    if fam == "trivial":
        return trivial_module(gp)
    if fam == "gamma_character":
        return gamma_character(gp, 1 if arg is None else int(arg))
    if fam == "beta_unipotent":
        return beta_unipotent(gp)
    if fam == "regular":
        return regular_module(gp, seed)
    return cyclic_quotient(gp, seed)


# ---------------------------------------------------------------------------
# interchange format
# ---------------------------------------------------------------------------

_FIELDS = {"p", "n", "m", "N", "l", "invariant_factors", "gamma", "beta", "phi"}
_REQUIRED = _FIELDS - {"phi"}


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(where, f"expected an integer, got {json.dumps(value)}")
    return value


def _matrix(value, size: int, where: str) -> list[list[int]]:
    if not isinstance(value, list):
        raise ParseError(where, "expected a matrix (array of rows)")
    if len(value) != size:
        raise ParseError(where, f"expected {size} rows, got {len(value)}")
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != size:
            raise ParseError(f"{where}[{i}]", f"expected a row of {size} integers")
        out.append([_int(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return out


def parse_spec(document, validate: bool = True) -> TorsionPhiGammaModuleSpec:
    """Read a module from the JSON interchange format (``str``, ``bytes`` or parsed ``dict``)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ParseError("$", "top level must be an object")
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        raise ParseError(f"$.{unknown[0]}", "unknown field")
    missing = sorted(_REQUIRED - set(doc))
    if missing:
        raise ParseError(f"$.{missing[0]}", "missing required field")
    p, n, m, N, l = (_int(doc[k], f"$.{k}") for k in ("p", "n", "m", "N", "l"))
    gp = iw.validate_params(p, n, m, N, l)
    exps = doc["invariant_factors"]
    if not isinstance(exps, list):
        raise ParseError("$.invariant_factors", "expected an array of exponents")
    exps = [_int(e, f"$.invariant_factors[{i}]") for i, e in enumerate(exps)]
    if any(e < 1 for e in exps):
        raise ParseError("$.invariant_factors", "exponents must be >= 1")
    group = FinAbGroup(p, tuple(exps))
    d = group.rank
    G = _matrix(doc["gamma"], d, "$.gamma")
    if not isinstance(doc["beta"], list) or len(doc["beta"]) != n:
        raise ParseError("$.beta", f"expected an array of {n} matrices")
    Bs = [_matrix(B, d, f"$.beta[{i}]") for i, B in enumerate(doc["beta"])]
    F = _matrix(doc["phi"], d, "$.phi") if doc.get("phi") is not None else None
    mk = lambda A: AbMorphism(group, group, np.array(A, dtype=object).reshape(d, d))
    spec = TorsionPhiGammaModuleSpec(gp, group, mk(G), tuple(mk(B) for B in Bs),
                                     None if F is None else mk(F))
    return validate_module(spec) if validate else spec


def _fmt_matrix(A: np.ndarray, indent: str) -> str:
    if A.shape[0] == 0:
        return "[]"
    rows = [indent + "  [" + ", ".join(str(int(x)) for x in row) + "]" for row in A]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def serialize_spec(spec: TorsionPhiGammaModuleSpec) -> str:
    """Write a module in the JSON interchange format (one matrix row per line)."""
    gp = spec.gp
    parts = [f'  "{k}": {v}' for k, v in zip(("p", "n", "m", "N", "l"), gp.astuple())]
    parts.append('  "invariant_factors": ' + json.dumps(list(spec.group.exponents)))
    parts.append('  "gamma": ' + _fmt_matrix(spec.gamma.matrix, "  "))
    if spec.beta:
        betas = [("    " + _fmt_matrix(B.matrix, "    ")) for B in spec.beta]
        parts.append('  "beta": [\n' + ",\n".join(betas) + "\n  ]")
    else:
        parts.append('  "beta": []')
    if spec.phi is not None:
        parts.append('  "phi": ' + _fmt_matrix(spec.phi.matrix, "  "))
    return "{\n" + ",\n".join(parts) + "\n}\n"
