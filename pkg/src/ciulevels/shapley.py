"""Shapley-value baseline: closed form for linear models, exact values for
small games and permutation sampling for black-box predictors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .coalitions import Game, _check_capacity, popcounts

MAX_EXACT_PLAYERS = 12


@dataclass(frozen=True, eq=False)
class AfaExplanation:
    """Additive explanation ``g(z) = baseline + sum_i attributions[i] * z[i]``."""

    baseline: float
    attributions: np.ndarray
    stderr: np.ndarray | None = None
    n_permutations: int | None = None

    def value(self, z: Sequence[float] | None = None) -> float:
        z = np.ones(len(self.attributions)) if z is None else np.asarray(z, dtype=float)
        return float(self.baseline + self.attributions @ z)


def linear_shapley(weights: Sequence[float], x: Sequence[float], background: np.ndarray) -> np.ndarray:
    """``w_i * (x_i - E[X_i])`` with the expectation taken over the background rows."""
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    bg = np.atleast_2d(np.asarray(background, dtype=float))
    if bg.shape[0] == 0:
        raise ValueError("background set is empty")
    if not (w.shape == x.shape == bg.shape[1:]):
        raise ValueError(f"shape mismatch: weights {w.shape}, x {x.shape}, background {bg.shape}")
    return w * (x - bg.mean(axis=0))


def exact_shapley_game(g: Game) -> np.ndarray:
    """Exact Shapley value; marginal contributions weighted by how many
    player orderings place exactly coalition ``S`` before player ``i``."""
    _check_capacity(g.n_players, MAX_EXACT_PLAYERS)
    n = g.n_players
    if n == 0:
        return np.zeros(0)
    sizes = popcounts(n)
    weight = np.array([math.factorial(k) * math.factorial(n - k - 1) / math.factorial(n) for k in range(n)])
    masks = np.arange(1 << n)
    phi = np.empty(n)
    for i in range(n):
        bit = 1 << i
        s = masks[(masks & bit) == 0]
        phi[i] = float(np.sum(weight[sizes[s]] * (g.worth[s | bit] - g.worth[s])))
    return phi


def monte_carlo_shapley(
    model,
    x,
    background: np.ndarray,
    n_permutations: int = 1000,
    seed: int = 0,
    j: int = 0,
    chunk: int = 2000,
) -> AfaExplanation:
    """Permutation-sampling Shapley estimate for output ``j`` of ``model``.

    Each sample draws one feature ordering and one background row; features
    not yet switched to the instance's value keep that row's values jointly.
    """
    if n_permutations < 1:
        raise ValueError("need at least one permutation")
    bg = np.atleast_2d(np.asarray(background, dtype=float))
    if bg.shape[0] == 0:
        raise ValueError("background set is empty")
    xe = model.schema.encode(x)
    n = len(xe)
    if bg.shape[1] != n:
        raise ValueError(f"background has {bg.shape[1]} columns, instance has {n}")
    rng = np.random.default_rng(seed)
    perms = np.argsort(rng.random((n_permutations, n)), axis=1)
    rows = rng.integers(0, len(bg), size=n_permutations)

    contrib = np.empty((n_permutations, n))
    start_values = np.empty(n_permutations)
    for lo in range(0, n_permutations, chunk):
        p = perms[lo : lo + chunk]
        cur = bg[rows[lo : lo + chunk]].copy()
        m = len(p)
        path = np.empty((m, n + 1, n))
        path[:, 0] = cur
        idx = np.arange(m)
        for k in range(n):
            cur[idx, p[:, k]] = xe[p[:, k]]
            path[:, k + 1] = cur
        Y = model.predict_batch(path.reshape(-1, n))[:, j].reshape(m, n + 1)
        start_values[lo : lo + m] = Y[:, 0]
        block = np.empty((m, n))
        block[idx[:, None], p] = np.diff(Y, axis=1)
        contrib[lo : lo + m] = block
    values = contrib.mean(axis=0)
    if n_permutations > 1:
        stderr = contrib.std(axis=0, ddof=1) / math.sqrt(n_permutations)
    else:
        stderr = np.full(n, np.nan)
    return AfaExplanation(
        baseline=float(start_values.mean()), attributions=values, stderr=stderr, n_permutations=n_permutations
    )


def group_attribution(
    attributions: Sequence[float],
    groups: Iterable[tuple[str, Iterable[int]]],
    feature_names: Sequence[str] | None = None,
) -> dict[str, float]:
    """Sum attributions inside each group; ungrouped features are kept on their own."""
    phi = np.asarray(attributions, dtype=float)
    names = list(feature_names) if feature_names is not None else [f"x{i + 1}" for i in range(len(phi))]
    out: dict[str, float] = {}
    used: set[int] = set()
    for name, members in groups:
        members = sorted(set(members))
        if used & set(members):
            raise ValueError(f"group {name!r} overlaps an earlier group; sums would double-count")
        used |= set(members)
        out[name] = float(phi[members].sum())
    for i in range(len(phi)):
        if i not in used:
            out[names[i]] = float(phi[i])
    return out
