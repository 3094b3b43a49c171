"""Independent checks that share no code path with the Smith-normal-form engine."""
from __future__ import annotations

import numpy as np

from .homalg import CochainComplex, FinAbGroup

BRUTE_FORCE_LIMIT = 3**8


def _all_elements(G: FinAbGroup) -> np.ndarray:
    """Every element of ``G`` as a row, in mixed-radix order."""
    if G.rank == 0:
        return np.zeros((1, 0), dtype=object)
    grids = np.meshgrid(*[np.arange(G.p**e) for e in G.exponents], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(object)


def _encode(G: FinAbGroup, X: np.ndarray) -> np.ndarray:
    """Injective integer code for reduced rows of ``X``."""
    code = np.zeros(X.shape[0], dtype=object)
    for j, e in enumerate(G.exponents):
        code = code * G.p**e + X[:, j] % G.p**e
    return code


def brute_force_cohomology(C: CochainComplex) -> list[FinAbGroup]:
    """Cohomology by listing cocycles and coboundaries element by element.

    Invariant factors are recovered from ``|H[p^k]|`` (elements killed by
    ``p^k``): the number of cyclic factors of exponent ``>= k`` equals
    ``log_p |H[p^k]| - log_p |H[p^(k-1)]|``.
    """
    if C.total_order() > BRUTE_FORCE_LIMIT:
        raise ValueError(f"complex of order {C.total_order()} is too large to enumerate")
    p = C.p
    out = []
    for i in range(len(C.terms)):
        Ci = C.term(i)
        X = _all_elements(Ci)
        Cn = C.term(i + 1)
        if Cn.rank:
            img = X.dot(C.d(i).matrix.astype(object).T)
            Z = X[~np.any(Cn.reduce(img.T).T != 0, axis=1)] if len(X) else X
        else:
            Z = X
        Cp = C.term(i - 1)
        if Cp.rank:
            Y = _all_elements(Cp)
            B = Y.dot(C.d(i - 1).matrix.astype(object).T)
        else:
            B = np.zeros((1, Ci.rank), dtype=object)
        Bcodes = set(_encode(Ci, B).tolist())
        sizes = []
        k = 0
        while True:
            killed = sum(1 for c in _encode(Ci, Z * p**k).tolist() if c in Bcodes)
            assert killed % len(Bcodes) == 0
            sizes.append(killed // len(Bcodes))
            if sizes[-1] == len(Z) // len(Bcodes):
                break
            k += 1
        logs = [round(np.log(s) / np.log(p)) for s in sizes]
        assert all(p**lg == s for lg, s in zip(logs, sizes))
        exps = []
        # count_ge[k - 1] = number of cyclic factors of exponent >= k
        count_ge = [logs[k] - logs[k - 1] for k in range(1, len(logs))] + [0]
        for k in range(1, len(count_ge)):
            exps.extend([k] * (count_ge[k - 1] - count_ge[k]))
        out.append(FinAbGroup.canonical(p, exps))
    return out
