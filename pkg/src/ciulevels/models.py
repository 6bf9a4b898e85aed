"""Feature schemas, CSV ingestion and the predictors that get explained.

Instances travel through the package in an encoded float form: numeric
features as their value, categorical features as the index of their level.
Every predictor exposes ``predict_batch(X)`` over that encoding and returns
one row of outputs per instance.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from numba import njit

MISSING = "missing"
_NA_TOKENS = {"", "na", "nan", "null", "none", "?"}


class SchemaMismatchError(ValueError):
    pass


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "numeric" | "categorical"
    lo: float | None = None
    hi: float | None = None
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == "numeric":
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError(f"numeric feature {self.name!r} needs lo < hi")
        elif self.kind == "categorical":
            if not self.levels or len(set(self.levels)) != len(self.levels):
                raise ValueError(f"categorical feature {self.name!r} needs distinct levels")
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"

    def encode(self, value) -> float:
        if self.is_numeric:
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise SchemaMismatchError(f"{self.name}: {value!r} is not numeric") from None
            if not self.lo <= v <= self.hi:
                raise SchemaMismatchError(f"{self.name}: {v} outside [{self.lo}, {self.hi}]")
            return v
        value = str(value)
        if value not in self.levels:
            raise SchemaMismatchError(f"{self.name}: unknown level {value!r}")
        return float(self.levels.index(value))

    def decode(self, code: float):
        if self.is_numeric:
            return float(code)
        return self.levels[int(code)]


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def __getitem__(self, i: int) -> Feature:
        return self.features[i]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def encode(self, instance: Sequence | Mapping) -> np.ndarray:
        """Validate one instance (sequence or name->value mapping) and encode it."""
        if isinstance(instance, Mapping):
            missing = [n for n in self.names if n not in instance]
            extra = [k for k in instance if k not in self.names]
            if missing or extra:
                raise SchemaMismatchError(f"instance missing {missing}, unexpected {extra}")
            instance = [instance[n] for n in self.names]
        if len(instance) != len(self.features):
            raise SchemaMismatchError(
                f"instance has {len(instance)} values, schema has {len(self.features)} features"
            )
        return np.array([f.encode(v) for f, v in zip(self.features, instance)])

    def decode(self, row: np.ndarray) -> dict:
        return {f.name: f.decode(c) for f, c in zip(self.features, row)}

    def to_dict(self) -> list[dict]:
        return [asdict(f) for f in self.features]

    @classmethod
    def from_dict(cls, data: list[dict]) -> "FeatureSchema":
        return cls(tuple(Feature(**{**d, "levels": tuple(d.get("levels", ()))}) for d in data))


@dataclass
class SchemaHint:
    """Optional guidance for ``load_csv``; anything unset is inferred."""

    target: str | None = None
    label_levels: tuple[str, ...] | None = None
    levels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    categorical: tuple[str, ...] = ()
    name: str = "dataset"


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray | None
    classes: tuple[str, ...]
    target: str | None
    name: str = "dataset"

    def __len__(self) -> int:
        return len(self.X)

    def row(self, i: int) -> dict:
        return self.schema.decode(self.X[i])


def _is_na(token: str) -> bool:
    return token.strip().lower() in _NA_TOKENS


def _parse_float(token: str) -> float | None:
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path: str | Path, schema_hint: SchemaHint | None = None) -> Dataset:
    """Read a headed CSV file and infer its schema.

    Columns whose non-missing values all parse as numbers become numeric,
    everything else is categorical.  Rows without a label are dropped,
    missing numerics get the column median and missing categoricals a
    dedicated ``"missing"`` level.
    """
    hint = schema_hint or SchemaHint()
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")

    target = hint.target
    if target is None and len(header) > 1:
        target = header[-1]
    if target is not None and target not in header:
        raise ValueError(f"{path}: no target column {target!r}")

    y = None
    classes: tuple[str, ...] = ()
    if target is not None:
        t = header.index(target)
        body = [r for r in body if not _is_na(r[t])]
        if not body:
            raise ValueError(f"{path}: every row lacks a label")
        labels = [r[t].strip() for r in body]
        classes = tuple(hint.label_levels) if hint.label_levels else tuple(sorted(set(labels)))
        unknown = set(labels) - set(classes)
        if unknown:
            raise ValueError(f"{path}: labels {sorted(unknown)} not in {classes}")
        y = np.array([classes.index(v) for v in labels], dtype=np.int64)

    features, columns = [], []
    for c, name in enumerate(header):
        if name == target:
            continue
        raw = [r[c].strip() for r in body]
        present = [v for v in raw if not _is_na(v)]
        numbers = [_parse_float(v) for v in present]
        numeric = (
            name not in hint.categorical
            and name not in hint.levels
            and bool(present)
            and all(v is not None for v in numbers)
        )
        if numeric:
            median = float(np.median(numbers))
            col = np.array([median if _is_na(v) else float(v) for v in raw])
            lo, hi = float(col.min()), float(col.max())
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
            feat = Feature(name, "numeric", lo=lo, hi=hi)
        else:
            vals = [MISSING if _is_na(v) else v for v in raw]
            levels = list(hint.levels.get(name, sorted(set(vals) - {MISSING})))
            if MISSING in vals and MISSING not in levels:
                levels.append(MISSING)
            unknown = set(vals) - set(levels)
            if unknown:
                raise ValueError(f"{path}: column {name!r} has values {sorted(unknown)} outside its levels")
            feat = Feature(name, "categorical", levels=tuple(levels))
            col = np.array([levels.index(v) for v in vals], dtype=float)
        features.append(feat)
        columns.append(col)
    X = np.column_stack(columns) if columns else np.empty((len(body), 0))
    return Dataset(FeatureSchema(tuple(features)), X, y, classes, target, hint.name)


def minmax_utility(lo: float, hi: float, reverse: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Affine map of ``[lo, hi]`` onto ``[0, 1]`` (or ``[1, 0]`` when reversed)."""
    span = hi - lo

    def u(v):
        r = (np.asarray(v, dtype=float) - lo) / span
        return 1.0 - r if reverse else r

    return u


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``y = w0 + sum_i w_i * u_i(x_i)`` with per-feature utility maps into [0, 1]."""

    schema: FeatureSchema
    weights: np.ndarray
    intercept: float = 0.0
    utilities: tuple | None = None
    output_names: tuple[str, ...] = ("y",)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.schema),):
            raise ValueError("one weight per feature required")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.utilities is None:
            us = []
            for f in self.schema:
                if f.is_numeric:
                    us.append(minmax_utility(f.lo, f.hi))
                else:
                    us.append(minmax_utility(0, max(len(f.levels) - 1, 1)))
            object.__setattr__(self, "utilities", tuple(us))
        elif len(self.utilities) != len(self.schema):
            raise ValueError("one utility map per feature required")

    @property
    def n_outputs(self) -> int:
        return 1

    def utility_values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([u(X[:, i]) for i, u in enumerate(self.utilities)])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        U = self.utility_values(X)
        return (self.intercept + U @ self.weights)[:, None]


@dataclass(frozen=True, eq=False)
class FunctionModel:
    """Wrap a vectorised ``fn(X) -> (m,) or (m, k)`` over encoded inputs."""

    schema: FeatureSchema
    fn: Callable[[np.ndarray], np.ndarray]
    output_names: tuple[str, ...] = ("y",)

    @property
    def n_outputs(self) -> int:
        return len(self.output_names)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        Y = np.asarray(self.fn(np.atleast_2d(np.asarray(X, dtype=float))), dtype=float)
        return Y.reshape(len(Y), -1)


def numeric_schema(n: int, lo: float = 0.0, hi: float = 1.0, prefix: str = "x") -> FeatureSchema:
    return FeatureSchema(tuple(Feature(f"{prefix}{i + 1}", "numeric", lo=lo, hi=hi) for i in range(n)))


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    max_depth: int = 12
    min_leaf: int = 2
    max_features: str = "sqrt"
    seed: int = 0


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.25
    seed: int = 0


@dataclass(frozen=True, eq=False)
class RandomForest:
    """Tree ensemble whose class probability is the fraction of trees voting for it.

    Trees are stored flattened: node arrays for every tree are concatenated
    and ``roots`` holds the offset of each tree's root node.  Leaves carry
    ``feature == -1`` and their voted class in ``leaf_class``.
    """

    schema: FeatureSchema
    classes: tuple[str, ...]
    params: ForestParams
    roots: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray
    name: str = "random_forest"
    target: str | None = None

    def __post_init__(self):
        for attr in ("roots", "feature", "threshold", "left", "right", "leaf_class"):
            a = np.array(getattr(self, attr))
            a.setflags(write=False)
            object.__setattr__(self, attr, a)

    @property
    def n_outputs(self) -> int:
        return len(self.classes)

    @property
    def output_names(self) -> tuple[str, ...]:
        return self.classes

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float)).astype(np.float32)
        votes = _forest_votes(
            X, self.roots, self.feature, self.threshold, self.left, self.right,
            self.leaf_class, len(self.classes),
        )
        return votes / len(self.roots)


@njit(cache=True)
def _forest_votes(X, roots, feature, threshold, left, right, leaf_class, n_classes):
    # split rule follows the trainer: float32 feature value <= threshold goes left
    m = X.shape[0]
    out = np.zeros((m, n_classes))
    for t in range(roots.shape[0]):
        for r in range(m):
            node = roots[t]
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[r, leaf_class[node]] += 1.0
    return out


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    order = np.random.default_rng(spec.seed).permutation(n)
    n_test = int(round(n * spec.test_fraction))
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def train_random_forest(
    dataset: Dataset,
    params: ForestParams = ForestParams(),
    split: SplitSpec = SplitSpec(),
) -> tuple[RandomForest, float]:
    """Fit a forest on the training part of a seeded split; return it with test accuracy."""
    from sklearn.ensemble import RandomForestClassifier

    if dataset.y is None or len(dataset) == 0:
        raise TrainingError("training needs a labelled, nonempty dataset")
    if len(np.unique(dataset.y)) < 2:
        raise TrainingError("training needs at least two classes")
    train, test = split_indices(len(dataset), split)
    if len(train) == 0:
        raise TrainingError("split leaves no training rows")
    clf = RandomForestClassifier(
        n_estimators=params.n_trees,
        max_depth=params.max_depth,
        min_samples_leaf=params.min_leaf,
        max_features=params.max_features,
        criterion="gini",
        random_state=params.seed,
        n_jobs=1,
    )
    clf.fit(dataset.X[train], dataset.y[train])
    forest = _flatten_forest(clf, dataset, params)
    if len(test):
        pred = forest.predict_batch(dataset.X[test]).argmax(axis=1)
        accuracy = float(np.mean(pred == dataset.y[test]))
    else:
        accuracy = float("nan")
    return forest, accuracy


def _flatten_forest(clf, dataset: Dataset, params: ForestParams) -> RandomForest:
    roots, feature, threshold, left, right, leaf = [], [], [], [], [], []
    offset = 0
    for est in clf.estimators_:
        t = est.tree_
        internal = t.children_left >= 0
        roots.append(offset)
        feature.append(np.where(internal, t.feature, -1))
        threshold.append(np.where(internal, t.threshold, 0.0))
        left.append(np.where(internal, t.children_left + offset, -1))
        right.append(np.where(internal, t.children_right + offset, -1))
        votes = clf.classes_[t.value[:, 0, :].argmax(axis=1)]
        leaf.append(np.where(internal, -1, votes))
        offset += t.node_count
    cat = np.concatenate
    return RandomForest(
        schema=dataset.schema,
        classes=dataset.classes,
        params=params,
        roots=np.array(roots, dtype=np.int64),
        feature=cat(feature).astype(np.int64),
        threshold=cat(threshold).astype(np.float64),
        left=cat(left).astype(np.int64),
        right=cat(right).astype(np.int64),
        leaf_class=cat(leaf).astype(np.int64),
        name=dataset.name,
        target=dataset.target,
    )


def predict(model, x) -> np.ndarray:
    """Outputs of ``model`` for one raw instance (validated against the schema)."""
    return model.predict_batch(model.schema.encode(x)[None, :])[0]


_ARRAYS = ("roots", "feature", "threshold", "left", "right", "leaf_class")


def save_model(model: RandomForest, path: str | Path) -> None:
    meta = {
        "format": "ciulevels-forest",
        "version": 1,
        "name": model.name,
        "target": model.target,
        "classes": list(model.classes),
        "params": asdict(model.params),
        "schema": model.schema.to_dict(),
    }
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh, meta=np.array(json.dumps(meta, sort_keys=True)), **{a: getattr(model, a) for a in _ARRAYS}
        )


def load_model(path: str | Path) -> RandomForest:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != "ciulevels-forest":
            raise ValueError(f"{path}: not a forest model file")
        arrays = {a: data[a] for a in _ARRAYS}
    return RandomForest(
        schema=FeatureSchema.from_dict(meta["schema"]),
        classes=tuple(meta["classes"]),
        params=ForestParams(**meta["params"]),
        name=meta["name"],
        target=meta.get("target"),
        **arrays,
    )
