"""Bundled experiment data: Titanic and UCI Car Evaluation."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .models import Dataset, SchemaHint, load_csv

CONFIG_ENV = "CIULEVELS_CONFIG_DIR"

TITANIC_HINT = SchemaHint(
    target="survived",
    label_levels=("no", "yes"),
    levels={
        "class": (
            "1st",
            "2nd",
            "3rd",
            "deck crew",
            "engineering crew",
            "restaurant staff",
            "victualling crew",
        ),
        "gender": ("female", "male"),
        "embarked": ("Belfast", "Cherbourg", "Queenstown", "Southampton"),
    },
    name="titanic",
)

CARS_HINT = SchemaHint(
    target="class",
    label_levels=("unacc", "acc", "good", "vgood"),
    levels={
        "buying": ("vhigh", "high", "med", "low"),
        "maint": ("vhigh", "high", "med", "low"),
        "doors": ("2", "3", "4", "5more"),
        "persons": ("2", "4", "more"),
        "lug_boot": ("small", "med", "big"),
        "safety": ("low", "med", "high"),
    },
    name="cars",
)

# Biecek & Burzykowski's example passenger.
JOHNNY_D = {
    "class": "1st",
    "gender": "male",
    "age": 8,
    "sibsp": 0,
    "parch": 0,
    "fare": 72,
    "embarked": "Southampton",
}

CARS_INSTANCE_ROW = 1098  # 1-based data row, as numbered in R


def data_path(name: str) -> Path:
    return Path(str(resources.files("ciulevels") / "data" / name))


def config_dirs() -> list[Path]:
    dirs = []
    if os.environ.get(CONFIG_ENV):
        dirs.append(Path(os.environ[CONFIG_ENV]))
    dirs.append(data_path(""))
    return dirs


def resolve_config(name: str | Path) -> Path:
    """Find a config/data file: as given, else in the config dir, else bundled."""
    p = Path(name)
    if p.exists():
        return p
    for d in config_dirs():
        if (d / p).exists():
            return d / p
    raise FileNotFoundError(f"cannot find {name!s} (searched cwd and {[str(d) for d in config_dirs()]})")


def load_titanic() -> Dataset:
    return load_csv(data_path("titanic.csv"), TITANIC_HINT)


def load_cars() -> Dataset:
    return load_csv(data_path("cars.csv"), CARS_HINT)


def cars_instance(row: int = CARS_INSTANCE_ROW) -> dict:
    return load_cars().row(row - 1)


DATASETS = {"titanic": load_titanic, "cars": load_cars}
HINTS = {"titanic": TITANIC_HINT, "cars": CARS_HINT}


def named_instance(name: str) -> dict:
    if name == "johnny_d":
        return dict(JOHNNY_D)
    if name.startswith("car_"):
        return cars_instance(int(name.split("_", 1)[1]))
    raise KeyError(f"unknown named instance {name!r}")
