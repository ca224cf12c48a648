"""Maximum-weight perfect matching on a masked square bipartite graph."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import GuardError, ParameterError

BRUTE_FORCE_MAX_M = 9


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Square weights ``w[i, j]`` usable only where ``mask[i, j]`` is true.

    Masked-off entries are stored as ``-inf`` so ``w`` is finite exactly on the mask.
    """

    w: np.ndarray
    mask: np.ndarray

    def __init__(self, w, mask=None):
        w = np.array(w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ParameterError(f"weights must be a non-empty square matrix (got shape {w.shape})")
        mask = np.isfinite(w) if mask is None else np.array(mask, dtype=bool)
        if mask.shape != w.shape:
            raise ParameterError("mask shape must match weights")
        if not np.all(np.isfinite(w[mask])):
            raise ParameterError("masked-in weights must be finite")
        w[~mask] = -np.inf
        w.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "mask", mask)

    @property
    def M(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class MatchingResult:
    feasible: bool
    perm: tuple[int, ...] | None = None  # perm[i] = 0-based column matched to row i
    total_weight: float | None = None
    row_labels: tuple[float, ...] | None = None
    col_labels: tuple[float, ...] | None = None


INFEASIBLE = MatchingResult(False)


def _total(w: np.ndarray, perm) -> float:
    t = 0.0
    for i, j in enumerate(perm):
        t += float(w[i, j])
    return t


def kuhn_munkres(weights: WeightMatrix) -> MatchingResult:
    """Hungarian method with slack arrays, O(M^3).

    Works on costs ``-w`` with potentials ``u, v`` (``u + v <= cost``); the
    returned labels are their negatives, so ``row + col >= w`` on the mask with
    equality along the matching. A row whose alternating tree cannot reach an
    unused column through a masked-in edge proves no perfect matching exists.
    """
    if not isinstance(weights, WeightMatrix):
        weights = WeightMatrix(weights)
    n = weights.M
    inf = math.inf
    cost = [[-x if m else inf for x, m in zip(row, mrow)]
            for row, mrow in zip(weights.w.tolist(), weights.mask.tolist())]

    # 1-based rows/columns; column 0 is the virtual root of each search.
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row holding column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        slack = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            row = cost[i0 - 1]
            ui = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui - v[j]
                    if cur < slack[j]:
                        slack[j] = cur
                        way[j] = j0
                    if slack[j] < delta:
                        delta = slack[j]
                        j1 = j
            if j1 == 0:
                return INFEASIBLE
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    slack[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    perm = [0] * n
    for j in range(1, n + 1):
        perm[match[j] - 1] = j - 1
    return MatchingResult(
        True,
        tuple(perm),
        _total(weights.w, perm),
        tuple(-x for x in u[1:]),
        tuple(-x for x in v[1:]),
    )


def brute_force_matching(weights: WeightMatrix) -> MatchingResult:
    """Scan all M! permutations; the first best in lexicographic order wins."""
    if not isinstance(weights, WeightMatrix):
        weights = WeightMatrix(weights)
    n = weights.M
    if n > BRUTE_FORCE_MAX_M:
        raise GuardError(f"brute-force matching refused for M={n} > {BRUTE_FORCE_MAX_M}")
    mask = weights.mask.tolist()
    best = None
    best_perm = None
    for perm in itertools.permutations(range(n)):
        if not all(mask[i][j] for i, j in enumerate(perm)):
            continue
        t = _total(weights.w, perm)
        if best is None or t > best:
            best, best_perm = t, perm
    if best_perm is None:
        return INFEASIBLE
    return MatchingResult(True, tuple(best_perm), best)


def dual_tolerance(weights: WeightMatrix) -> float:
    finite = weights.w[weights.mask]
    scale = float(np.max(np.abs(finite))) if finite.size else 0.0
    return 1e-9 * (1.0 + scale)


def check_duals(weights: WeightMatrix, result: MatchingResult, eps: float | None = None) -> bool:
    """Optimality certificate: labels cover every masked edge and are tight on the matching."""
    if not result.feasible or result.row_labels is None:
        return False
    eps = dual_tolerance(weights) if eps is None else eps
    lx = np.asarray(result.row_labels)
    ly = np.asarray(result.col_labels)
    slack = lx[:, None] + ly[None, :] - weights.w
    if np.any(slack[weights.mask] < -eps):
        return False
    matched = slack[np.arange(weights.M), list(result.perm)]
    if not all(weights.mask[i, j] for i, j in enumerate(result.perm)):
        return False
    return bool(np.all(np.abs(matched) <= eps))
