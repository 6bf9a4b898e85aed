"""Titanic experiment: forest accuracy, the Johnny D explanation at the top
level and under WEALTH/FAMILY, a seed sweep of the survival probability, and
grouped Monte Carlo Shapley values for comparison.

    python3 scripts/run_titanic.py --seeds 5 --permutations 1000
"""

import argparse

import numpy as np

from ciulevels import datasets
from ciulevels.cli import ciu_document
from ciulevels.models import ForestParams, SplitSpec, predict, split_indices, train_random_forest
from ciulevels.report import render_text
from ciulevels.shapley import group_attribution, monte_carlo_shapley
from ciulevels.vocabfile import parse_vocabulary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--seeds", type=int, default=5, help="forest seeds in the probability sweep")
    ap.add_argument("--permutations", type=int, default=1000)
    args = ap.parse_args()

    data = datasets.load_titanic()
    model, acc = train_random_forest(data, ForestParams(seed=args.seed), SplitSpec(seed=args.seed))
    j = model.classes.index("yes")
    print(f"test accuracy {acc:.4f}")

    vocab = parse_vocabulary(datasets.data_path("titanic.voc"), model.schema.names)
    doc = ciu_document(model, datasets.JOHNNY_D, vocab, j, "johnny_d", "titanic", drill=("WEALTH", "FAMILY"))
    print(render_text(doc))
    print(f"{'concept':<16} {'CI':>6} {'CU':>6} {'phi':>7}")
    for r in doc.records:
        print(f"{r.concept:<16} {r.ci:6.3f} {r.cu:6.3f} {r.influence:+7.3f}")

    probs = []
    for seed in range(args.seeds):
        m, _ = train_random_forest(data, ForestParams(seed=seed), SplitSpec(seed=seed))
        probs.append(predict(m, datasets.JOHNNY_D)[j])
    print(f"\nP(survive) over {args.seeds} seeds: mean {np.mean(probs):.3f}, range [{min(probs):.3f}, {max(probs):.3f}]")

    train, _ = split_indices(len(data), SplitSpec(seed=args.seed))
    afa = monte_carlo_shapley(model, datasets.JOHNNY_D, data.X[train], n_permutations=args.permutations,
                              seed=args.seed, j=j)
    print(f"\nShapley (baseline {afa.baseline:.3f}):")
    for name, phi, se in zip(model.schema.names, afa.attributions, afa.stderr):
        print(f"  {name:<10} {phi:+.3f} +/- {se:.3f}")
    groups = [(name, sorted(block)) for name, block in vocab.level("top")]
    grouped = group_attribution(afa.attributions, groups, model.schema.names)
    print("  grouped: " + ", ".join(f"{k} {v:+.3f}" for k, v in grouped.items()))


if __name__ == "__main__":
    main()
