"""Contextual Importance, Contextual Utility and Contextual Influence.

Output ranges are estimated by perturbing only the features of a
coalition while the rest stay at the instance's values.  Small categorical
subspaces are enumerated; numeric features get an evenly spaced grid topped
up with Latin-hypercube samples until the evaluation budget is spent.  The
unperturbed instance is always the first evaluated point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import qmc

from .vocabulary import Vocabulary, VocabularyError

RANGE_EPS = 1e-12
NEUTRAL_CU = 0.5
DEFAULT_BASELINE = 0.5


class DegenerateTargetError(ValueError):
    """The output does not move at all when the target features are perturbed."""


class DegenerateRangeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    budget: int = 10_000
    grid_points: int = 21
    lhs: bool = True
    seed: int = 0


@dataclass(frozen=True)
class UtilityMap:
    """Affine output utility ``u(y) = A*y + b``."""

    A: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.A == 0:
            raise ValueError("utility slope A must be nonzero")


@dataclass(frozen=True, eq=False)
class MinMaxEstimate:
    ymin: np.ndarray
    ymax: np.ndarray
    y: np.ndarray
    n_evaluations: int
    exhaustive: bool

    def span(self, j: int = 0) -> float:
        return float(self.ymax[j] - self.ymin[j])

    def merge(self, other: "MinMaxEstimate") -> "MinMaxEstimate":
        if other is self:
            return self
        return MinMaxEstimate(
            ymin=np.minimum(self.ymin, other.ymin),
            ymax=np.maximum(self.ymax, other.ymax),
            y=self.y,
            n_evaluations=self.n_evaluations + other.n_evaluations,
            exhaustive=self.exhaustive,
        )


@dataclass(frozen=True)
class CiuResult:
    concept: str
    features: tuple[int, ...]
    target: tuple[int, ...]
    output: int
    output_name: str
    ci: float
    cu: float
    influence: float
    baseline: float
    y: float
    ymin: float
    ymax: float
    target_ymin: float
    target_ymax: float
    n_evaluations: int
    exhaustive: bool
    degenerate: bool = False

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["features"] = list(self.features)
        d["target"] = list(self.target)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CiuResult":
        return cls(**{**d, "features": tuple(d["features"]), "target": tuple(d["target"])})


def _index_set(s: Iterable[int], n: int) -> tuple[int, ...]:
    out = tuple(sorted({int(i) for i in s}))
    if not out:
        raise ValueError("index set must be nonempty")
    if out[0] < 0 or out[-1] >= n:
        raise ValueError(f"index set {out} outside 0..{n - 1}")
    return out


def _lhs_rng(sampler: SamplerConfig, s: Sequence[int]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([sampler.seed, len(s), *s]))


def perturbation_points(schema, x: np.ndarray, s: Sequence[int], sampler: SamplerConfig):
    """Encoded points that vary the features in ``s`` only; ``x`` comes first."""
    if sampler.budget < 1:
        raise ValueError("sampler budget must be at least one evaluation")
    feats = [schema[i] for i in s]
    axes = [
        np.linspace(f.lo, f.hi, sampler.grid_points) if f.is_numeric else np.arange(len(f.levels), dtype=float)
        for f in feats
    ]
    categorical_only = not any(f.is_numeric for f in feats)
    grid_size = math.prod(len(a) for a in axes)
    blocks = [x[None, :]]
    room = sampler.budget - 1
    exhaustive = False
    if grid_size <= room:
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(s))
        block = np.repeat(x[None, :], grid_size, axis=0)
        block[:, list(s)] = grid
        blocks.append(block)
        room -= grid_size
        exhaustive = categorical_only
        n_lhs = room if (sampler.lhs and not categorical_only) else 0
    else:
        n_lhs = room
    if n_lhs > 0:
        u = qmc.LatinHypercube(len(s), rng=_lhs_rng(sampler, s)).random(n_lhs)
        block = np.repeat(x[None, :], n_lhs, axis=0)
        for k, (i, f) in enumerate(zip(s, feats)):
            if f.is_numeric:
                block[:, i] = f.lo + u[:, k] * (f.hi - f.lo)
            else:
                block[:, i] = np.minimum(np.floor(u[:, k] * len(f.levels)), len(f.levels) - 1)
        blocks.append(block)
    return np.concatenate(blocks), exhaustive


def range_over(model, points: np.ndarray, exhaustive: bool = False) -> MinMaxEstimate:
    """Output extremes over explicit encoded points; row 0 is the instance."""
    Y = model.predict_batch(points)
    return MinMaxEstimate(
        ymin=Y.min(axis=0), ymax=Y.max(axis=0), y=Y[0].copy(), n_evaluations=len(points), exhaustive=exhaustive
    )


def _estimate(model, xe: np.ndarray, s: tuple[int, ...], sampler: SamplerConfig) -> MinMaxEstimate:
    points, exhaustive = perturbation_points(model.schema, xe, s, sampler)
    return range_over(model, points, exhaustive)


def estimate_minmax(model, x, s: Iterable[int], sampler: SamplerConfig = SamplerConfig()) -> MinMaxEstimate:
    """Smallest and largest value of every output when only ``s`` is perturbed."""
    xe = model.schema.encode(x)
    return _estimate(model, xe, _index_set(s, len(xe)), sampler)


def contextual_importance(
    model, x, s: Iterable[int], target: Iterable[int], j: int = 0, sampler: SamplerConfig = SamplerConfig()
) -> float:
    xe = model.schema.encode(x)
    s = _index_set(s, len(xe))
    target = _index_set(target, len(xe))
    if not set(s) <= set(target):
        raise ValueError(f"{s} is not a subset of the target {target}")
    est_s = _estimate(model, xe, s, sampler)
    # points perturbing s are also perturbations of the target
    est_t = est_s if s == target else _estimate(model, xe, target, sampler).merge(est_s)
    span_t = est_t.span(j)
    if span_t < RANGE_EPS:
        raise DegenerateTargetError(f"output {j} does not vary over features {target}")
    return min(max(est_s.span(j) / span_t, 0.0), 1.0)


def _cu(est: MinMaxEstimate, j: int, utility: UtilityMap) -> tuple[float, bool]:
    span = est.span(j)
    if span < RANGE_EPS:
        return NEUTRAL_CU, True
    yumin = est.ymin[j] if utility.A > 0 else est.ymax[j]
    return min(abs((est.y[j] - yumin) / span), 1.0), False


def contextual_utility(
    model, x, s: Iterable[int], j: int = 0, utility: UtilityMap = UtilityMap(), sampler: SamplerConfig = SamplerConfig()
) -> float:
    """CU of the current values of ``s``; a flat range yields the neutral 0.5 with a warning."""
    cu, degenerate = _cu(estimate_minmax(model, x, s, sampler), j, utility)
    if degenerate:
        warnings.warn(f"output {j} is flat over {sorted(s)}; CU reported as {NEUTRAL_CU}", DegenerateRangeWarning)
    return cu


def contextual_influence(ci: float, cu: float, baseline: float = DEFAULT_BASELINE) -> float:
    return ci * (cu - baseline)


def make_result(
    concept: str,
    features: tuple[int, ...],
    target: tuple[int, ...],
    est: MinMaxEstimate,
    est_target: MinMaxEstimate,
    j: int,
    output_name: str,
    baseline: float,
    utility: UtilityMap,
) -> CiuResult:
    span_t = est_target.span(j)
    cu, flat = _cu(est, j, utility)
    ci = 0.0 if span_t < RANGE_EPS else min(max(est.span(j) / span_t, 0.0), 1.0)
    return CiuResult(
        concept=concept,
        features=tuple(features),
        target=tuple(target),
        output=j,
        output_name=output_name,
        ci=ci,
        cu=cu,
        influence=contextual_influence(ci, cu, baseline),
        baseline=baseline,
        y=float(est.y[j]),
        ymin=float(est.ymin[j]),
        ymax=float(est.ymax[j]),
        target_ymin=float(est_target.ymin[j]),
        target_ymax=float(est_target.ymax[j]),
        n_evaluations=est.n_evaluations,
        exhaustive=est.exhaustive,
        degenerate=flat or span_t < RANGE_EPS,
    )


def _order(results: list[CiuResult]) -> list[CiuResult]:
    return sorted(results, key=lambda r: (-r.ci, r.concept))


def explain_concepts(
    model,
    x,
    blocks: Sequence[tuple[str, Iterable[int]]],
    target: Iterable[int] | None = None,
    j: int = 0,
    baseline: float = DEFAULT_BASELINE,
    utility: UtilityMap = UtilityMap(),
    sampler: SamplerConfig = SamplerConfig(),
) -> list[CiuResult]:
    """CIU of each named coalition relative to ``target`` (default: all features)."""
    if not blocks:
        raise ValueError("nothing to explain")
    if not 0 <= baseline <= 1:
        raise ValueError("baseline must lie in [0, 1]")
    xe = model.schema.encode(x)
    n = len(xe)
    target = _index_set(range(n) if target is None else target, n)
    if not 0 <= j < model.n_outputs:
        raise ValueError(f"output index {j} outside 0..{model.n_outputs - 1}")
    cache: dict[tuple[int, ...], MinMaxEstimate] = {}

    def est(s):
        if s not in cache:
            cache[s] = _estimate(model, xe, s, sampler)
        return cache[s]

    named = [(name, _index_set(s, n)) for name, s in blocks]
    for _, s in named:
        if not set(s) <= set(target):
            raise ValueError(f"{s} is not a subset of the target {target}")
    est_target = est(target)
    for _, s in named:
        est_target = est_target.merge(est(s))
    output_name = str(model.output_names[j])
    return _order(
        [make_result(name, s, target, est(s), est_target, j, output_name, baseline, utility) for name, s in named]
    )


def explain_instance(
    model,
    x,
    vocab: Vocabulary,
    level: int | str = "top",
    j: int = 0,
    baseline: float = DEFAULT_BASELINE,
    utility: UtilityMap = UtilityMap(),
    sampler: SamplerConfig = SamplerConfig(),
) -> list[CiuResult]:
    """One result per concept of the chosen abstraction level, relative to all features."""
    if not vocab.concepts:
        raise VocabularyError("vocabulary is empty")
    if vocab.n_features != len(model.schema):
        raise VocabularyError(f"vocabulary covers {vocab.n_features} features, model has {len(model.schema)}")
    return explain_concepts(model, x, vocab.level(level), None, j, baseline, utility, sampler)


def drilldown(
    model,
    x,
    vocab: Vocabulary,
    concept: str,
    j: int = 0,
    baseline: float = DEFAULT_BASELINE,
    utility: UtilityMap = UtilityMap(),
    sampler: SamplerConfig = SamplerConfig(),
) -> list[CiuResult]:
    """CIU of a concept's constituents relative to the concept itself."""
    if concept not in vocab:
        raise VocabularyError(f"unknown concept {concept!r}")
    parts = vocab.constituents(concept)
    if len(parts) < 2:
        raise VocabularyError(f"concept {concept!r} has a single constituent; nothing to drill into")
    return explain_concepts(model, x, parts, vocab[concept], j, baseline, utility, sampler)


def with_baseline(results: Sequence[CiuResult], baseline: float) -> list[CiuResult]:
    """Same CI/CU, influence recomputed against another baseline."""
    return [replace(r, baseline=baseline, influence=contextual_influence(r.ci, r.cu, baseline)) for r in results]


def linear_joint_importance(weights: Sequence[float], s: Iterable[int], target: Iterable[int]) -> float:
    w = np.asarray(weights, dtype=float)
    s, target = set(s), set(target)
    if not s <= target:
        raise ValueError("s must be a subset of target")
    denom = float(sum(w[i] for i in target))
    if denom == 0:
        raise ZeroDivisionError("target weights sum to zero")
    return float(sum(w[i] for i in s)) / denom
