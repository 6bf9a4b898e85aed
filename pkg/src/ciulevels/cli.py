"""Command-line front end: ``python -m ciulevels <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import datasets
from .ciu import DEFAULT_BASELINE, SamplerConfig, drilldown, explain_instance
from .coalitions import (
    coalition_payoffs,
    game_properties,
    harsanyi_dividends,
    in_core,
    is_imputation,
    load_game,
    members,
)
from .models import (
    ForestParams,
    SchemaHint,
    SplitSpec,
    load_csv,
    load_model,
    predict,
    save_model,
    split_indices,
    train_random_forest,
)
from .report import Attribution, ExplanationDocument, render_barplot, render_text, to_json
from .shapley import exact_shapley_game, group_attribution, monte_carlo_shapley
from .vocabfile import parse_vocabulary
from .vocabulary import Vocabulary


class CliError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def load_dataset(spec: str, target: str | None = None):
    if spec in datasets.DATASETS:
        return datasets.DATASETS[spec]()
    path = datasets.resolve_config(spec)
    return load_csv(path, SchemaHint(target=target, name=Path(spec).stem))


def parse_instance(spec: str) -> dict:
    """Named fixture, ``@file.json`` or ``name=value,name=value``."""
    if spec.startswith("@"):
        with open(spec[1:], encoding="utf-8") as fh:
            return json.load(fh)
    if "=" in spec:
        # values stay strings; numeric features parse them during encoding
        pairs = (item.partition("=") for item in spec.split(","))
        return {key.strip(): value.strip() for key, _, value in pairs}
    try:
        return datasets.named_instance(spec)
    except KeyError:
        raise CliError(f"unknown instance {spec!r}; use a fixture name, @file.json or name=value pairs") from None


def resolve_class(model, spec: str | None) -> int:
    """Output index from a class label, an index, or (binary models) the target column name."""
    classes = list(model.output_names)
    if spec is None:
        return len(classes) - 1 if len(classes) == 2 else 0
    if spec in classes:
        return classes.index(spec)
    if spec == getattr(model, "target", None) and len(classes) == 2:
        return 1
    if spec.isdigit() and int(spec) < len(classes):
        return int(spec)
    raise CliError(f"unknown class {spec!r}; model outputs are {classes}")


def load_vocab(path: str, model) -> Vocabulary:
    return parse_vocabulary(datasets.resolve_config(path), model.schema.names)


def ciu_document(
    model,
    x: dict,
    vocab: Vocabulary,
    j: int,
    instance_id: str,
    model_id: str,
    level="top",
    baseline: float = DEFAULT_BASELINE,
    method: str = "ciu",
    drill: tuple[str, ...] = (),
    sampler: SamplerConfig = SamplerConfig(),
) -> ExplanationDocument:
    records = explain_instance(model, x, vocab, level, j, baseline, sampler=sampler)
    drilldowns = {c: drilldown(model, x, vocab, c, j, baseline, sampler=sampler) for c in drill}
    return ExplanationDocument(
        instance_id=instance_id,
        model_id=model_id,
        output=j,
        output_name=str(model.output_names[j]),
        method=method,
        prediction=float(predict(model, x)[j]),
        records=records,
        baseline=baseline,
        instance=model.schema.decode(model.schema.encode(x)),
        level=str(level),
        drilldown_path=list(drill),
        drilldowns=drilldowns,
    )


def write_outputs(doc: ExplanationDocument, out_dir: Path, stem: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    svg, data = render_barplot(doc)
    files = {
        f"{stem}.json": to_json(doc),
        f"{stem}.txt": render_text(doc),
        f"{stem}.svg": svg,
        f"{stem}_bars.json": json.dumps(data, sort_keys=True, indent=2) + "\n",
    }
    paths = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths


def emit(doc: ExplanationDocument, args) -> None:
    if args.format == "json":
        sys.stdout.write(to_json(doc))
    else:
        sys.stdout.write(render_text(doc))
    if args.out_dir:
        write_outputs(doc, Path(args.out_dir), args.stem)


def sampler_from(args) -> SamplerConfig:
    return SamplerConfig(budget=args.budget, seed=args.seed)


# --------------------------------------------------------------- commands


def cmd_train(args) -> int:
    data = load_dataset(args.data, args.target)
    params = ForestParams(n_trees=args.trees, max_depth=args.max_depth, min_leaf=args.min_leaf, seed=args.seed)
    model, accuracy = train_random_forest(data, params, SplitSpec(args.test_fraction, args.seed))
    save_model(model, args.out)
    print(f"trained {params.n_trees} trees on {data.name}: test accuracy {accuracy:.4f}")
    print(f"model written to {args.out}")
    return 0


def _model_and_instance(args):
    model = load_model(datasets.resolve_config(args.model))
    x = parse_instance(args.instance)
    return model, x, resolve_class(model, args.cls)


def cmd_explain(args) -> int:
    model, x, j = _model_and_instance(args)
    vocab = load_vocab(args.voc, model)
    level = args.level if args.level in ("top", "features") else int(args.level)
    doc = ciu_document(
        model, x, vocab, j, args.instance, Path(args.model).stem, level, args.baseline,
        args.method, tuple(args.drill), sampler_from(args),
    )
    emit(doc, args)
    return 0


def cmd_drilldown(args) -> int:
    model, x, j = _model_and_instance(args)
    vocab = load_vocab(args.voc, model)
    sampler = sampler_from(args)
    records = drilldown(model, x, vocab, args.concept, j, args.baseline, sampler=sampler)
    doc = ExplanationDocument(
        instance_id=args.instance,
        model_id=Path(args.model).stem,
        output=j,
        output_name=str(model.output_names[j]),
        method=args.method,
        prediction=float(predict(model, x)[j]),
        records=records,
        baseline=args.baseline,
        instance=model.schema.decode(model.schema.encode(x)),
        level=args.concept,
    )
    emit(doc, args)
    return 0


def cmd_shapley(args) -> int:
    model, x, j = _model_and_instance(args)
    data = load_dataset(args.data or model.name)
    if data.schema.names != model.schema.names:
        raise CliError(f"dataset columns {list(data.schema.names)} do not match the model schema")
    # background: the training part of the same seeded split the forest was fit on
    train, _ = split_indices(len(data), SplitSpec(args.test_fraction, args.split_seed))
    afa = monte_carlo_shapley(model, x, data.X[train], args.permutations, args.seed, j)
    names = model.schema.names
    if args.voc:
        vocab = load_vocab(args.voc, model)
        blocks = vocab.level(args.level if args.level in ("top", "features") else int(args.level))
        sums = group_attribution(afa.attributions, [(n, sorted(b)) for n, b in blocks], names)
        records = [Attribution(n, tuple(sorted(b)), sums[n]) for n, b in blocks]
    else:
        se = [None if np.isnan(v) else float(v) for v in afa.stderr]
        records = [Attribution(n, (i,), float(afa.attributions[i]), se[i]) for i, n in enumerate(names)]
    doc = ExplanationDocument(
        instance_id=args.instance,
        model_id=Path(args.model).stem,
        output=j,
        output_name=str(model.output_names[j]),
        method="shapley",
        prediction=float(predict(model, x)[j]),
        records=records,
        baseline=afa.baseline,
        instance=model.schema.decode(model.schema.encode(x)),
        level=str(args.level),
    )
    emit(doc, args)
    return 0


def _fmt_coalition(mask: int) -> str:
    return "{" + ",".join(str(i + 1) for i in members(mask)) + "}"


def _payoff_arg(args, n: int) -> np.ndarray:
    if args.payoff is None:
        raise CliError(f"game {args.action} needs --payoff with {n} comma-separated numbers")
    x = np.array([float(v) for v in args.payoff.split(",")])
    if len(x) != n:
        raise CliError(f"payoff has {len(x)} entries, game has {n} players")
    return x


def cmd_game(args) -> int:
    path = Path(args.inp)
    if not path.exists():
        raise CliError(f"no such game file: {path}")
    g = load_game(path.read_text(encoding="utf-8"))
    n = g.n_players
    if args.action == "dividends":
        d = harsanyi_dividends(g)
        order = sorted(range(1, 1 << n), key=lambda m: (bin(m).count("1"), members(m)))
        for m in order:
            print(f"{_fmt_coalition(m)}\t{float(d[m])!r}")
    elif args.action == "properties":
        for key, value in game_properties(g).__dict__.items():
            print(f"{key}\t{str(value).lower()}")
    elif args.action == "shapley":
        for i, v in enumerate(exact_shapley_game(g), start=1):
            print(f"{i}\t{float(v)!r}")
    elif args.action == "imputation":
        print(str(is_imputation(g, _payoff_arg(args, n))).lower())
    elif args.action == "core":
        x = _payoff_arg(args, n)
        ok = in_core(g, x)
        print(str(ok).lower())
        if not ok:
            excess = g.worth - coalition_payoffs(x)
            m = int(np.argmax(excess))
            print(f"most blocking coalition {_fmt_coalition(m)} with excess {float(excess[m])!r}")
    return 0


def _demo(args, name: str, instance: str, cls: str, drill: tuple[str, ...]) -> int:
    data = datasets.DATASETS[name]()
    params = ForestParams(seed=args.seed)
    model, accuracy = train_random_forest(data, params, SplitSpec(seed=args.seed))
    out = Path(args.out_dir or f"demo_output/{name}")
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / f"{name}.rf")
    x = datasets.named_instance(instance)
    j = resolve_class(model, cls)
    vocab = parse_vocabulary(datasets.resolve_config(f"{name}.voc"), model.schema.names)
    sampler = SamplerConfig(seed=args.seed)
    model_id = f"{name}-rf-seed{args.seed}"
    doc = ciu_document(model, x, vocab, j, instance, model_id, "top", DEFAULT_BASELINE, "ciu", drill, sampler)
    write_outputs(doc, out, "ciu")
    write_outputs(replace(doc, method="influence"), out, "influence")
    summary = {
        "dataset": name,
        "instance": instance,
        "class": model.output_names[j],
        "predicted_class": model.output_names[int(np.argmax(predict(model, x)))],
        "probability": doc.prediction,
        "test_accuracy": accuracy,
        "top_level": [r.concept for r in doc.records],
    }
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(render_text(doc))
    print(f"\ntest accuracy {accuracy:.4f}; outputs written to {out}")
    return 0


def cmd_demo_titanic(args) -> int:
    return _demo(args, "titanic", "johnny_d", "yes", ("WEALTH", "FAMILY"))


def cmd_demo_cars(args) -> int:
    row = f"car_{datasets.CARS_INSTANCE_ROW}"
    return _demo(args, "cars", row, "vgood", ("TECH", "COMFORT", "PRICE"))


# ----------------------------------------------------------------- parser


def _explain_options(p: argparse.ArgumentParser, voc_required: bool = True) -> None:
    p.add_argument("--model", required=True, help="model file written by 'train'")
    p.add_argument("--instance", required=True, help="fixture name (johnny_d, car_<row>), @file.json or k=v,...")
    p.add_argument("--voc", required=voc_required, default=None, help="vocabulary file (searched in the config dir)")
    p.add_argument("--class", dest="cls", default=None, help="output class label or index")
    p.add_argument("--level", default="top", help="abstraction level: top, features or an integer")
    p.add_argument("--baseline", type=float, default=DEFAULT_BASELINE, help="neutral utility for influence")
    p.add_argument("--method", choices=("ciu", "influence"), default="ciu", help="rendering style")
    p.add_argument("--budget", type=int, default=SamplerConfig.budget, help="model evaluations per coalition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text", help="what to print on stdout")
    p.add_argument("--out-dir", default=None, help="also write JSON, text and SVG files here")
    p.add_argument("--stem", default="explanation", help="base name of the written files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ciulevels", description="Contextual importance and utility explanations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a random forest on a dataset")
    p.add_argument("--data", required=True, help="'titanic', 'cars' or a CSV path")
    p.add_argument("--target", default=None, help="label column of a CSV (default: last column)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--trees", type=int, default=ForestParams.n_trees)
    p.add_argument("--max-depth", type=int, default=ForestParams.max_depth)
    p.add_argument("--min-leaf", type=int, default=ForestParams.min_leaf)
    p.add_argument("--test-fraction", type=float, default=SplitSpec.test_fraction)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="CIU explanation of one instance over a vocabulary level")
    _explain_options(p)
    p.add_argument("--drill", action="append", default=[], help="concept to drill into (repeatable)")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("drilldown", help="CIU of a concept's constituents relative to the concept")
    _explain_options(p)
    p.add_argument("--concept", required=True)
    p.set_defaults(func=cmd_drilldown)

    p = sub.add_parser("shapley", help="Monte Carlo Shapley attribution, optionally summed per concept")
    _explain_options(p, voc_required=False)
    p.add_argument("--data", default=None, help="background dataset (default: the model's training set)")
    p.add_argument("--test-fraction", type=float, default=SplitSpec.test_fraction, help="held-out share of --data")
    p.add_argument("--split-seed", type=int, default=0, help="seed of the training split used as background")
    p.add_argument("--permutations", type=int, default=1000)
    p.set_defaults(func=cmd_shapley)

    p = sub.add_parser("game", help="cooperative game utilities on a game file")
    p.add_argument("action", choices=("dividends", "properties", "shapley", "core", "imputation"))
    p.add_argument("--in", dest="inp", required=True, help="game file")
    p.add_argument("--payoff", default=None, help="comma-separated payoff vector")
    p.set_defaults(func=cmd_game)

    for name, func in (("demo-titanic", cmd_demo_titanic), ("demo-cars", cmd_demo_cars)):
        p = sub.add_parser(name, help=f"run the {name[5:]} experiment end to end")
        p.add_argument("--out-dir", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CliError, FileNotFoundError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
