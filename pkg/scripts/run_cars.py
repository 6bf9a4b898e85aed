"""Cars experiment: forest accuracy, the prediction for car #1098 and its
explanation at the top level with drilldowns into TECH, COMFORT and PRICE.

    python3 scripts/run_cars.py --row 1098 --class vgood --out-dir cars_out
"""

import argparse
from pathlib import Path

import numpy as np

from ciulevels import datasets
from ciulevels.cli import ciu_document, write_outputs
from ciulevels.models import ForestParams, SplitSpec, predict, train_random_forest
from ciulevels.report import render_text
from ciulevels.vocabfile import parse_vocabulary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--row", type=int, default=datasets.CARS_INSTANCE_ROW, help="1-based data row")
    ap.add_argument("--class", dest="cls", default="vgood")
    ap.add_argument("--out-dir", help="also write JSON/text/SVG here")
    args = ap.parse_args()

    data = datasets.load_cars()
    model, acc = train_random_forest(data, ForestParams(seed=args.seed), SplitSpec(seed=args.seed))
    x = datasets.cars_instance(args.row)
    p = predict(model, x)
    print(f"test accuracy {acc:.4f}")
    print(f"car #{args.row}: {x}")
    print("class probabilities: " + ", ".join(f"{c} {v:.3f}" for c, v in zip(model.classes, p)))
    print(f"predicted {model.classes[int(np.argmax(p))]}\n")

    vocab = parse_vocabulary(datasets.data_path("cars.voc"), model.schema.names)
    j = model.classes.index(args.cls)
    doc = ciu_document(model, x, vocab, j, f"car_{args.row}", "cars", drill=("TECH", "COMFORT", "PRICE"))
    print(render_text(doc))
    if args.out_dir:
        for path in write_outputs(doc, Path(args.out_dir), f"car_{args.row}"):
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
