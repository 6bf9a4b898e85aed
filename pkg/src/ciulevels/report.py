"""Explanation documents and their text, JSON and SVG renderings."""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from importlib import resources
from xml.sax.saxutils import escape, quoteattr

from .ciu import CiuResult

METHODS = ("ciu", "influence", "shapley")
DEFAULT_TEMPLATE = "text_v1.ini"


@dataclass(frozen=True)
class Attribution:
    name: str
    features: tuple[int, ...]
    value: float
    stderr: float | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "features": list(self.features), "value": self.value, "stderr": self.stderr}

    @classmethod
    def from_dict(cls, d: dict) -> "Attribution":
        return cls(d["name"], tuple(d["features"]), d["value"], d.get("stderr"))


@dataclass
class ExplanationDocument:
    instance_id: str
    model_id: str
    output: int
    output_name: str
    method: str
    prediction: float
    records: list
    baseline: float = 0.5
    instance: dict = field(default_factory=dict)
    level: str = "top"
    drilldown_path: list = field(default_factory=list)
    drilldowns: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "model_id": self.model_id,
            "output": self.output,
            "output_name": self.output_name,
            "method": self.method,
            "prediction": self.prediction,
            "baseline": self.baseline,
            "instance": self.instance,
            "level": self.level,
            "drilldown_path": list(self.drilldown_path),
            "records": [r.to_dict() for r in self.records],
            "drilldowns": {k: [r.to_dict() for r in v] for k, v in self.drilldowns.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExplanationDocument":
        record = Attribution.from_dict if d["method"] == "shapley" else CiuResult.from_dict
        return cls(
            instance_id=d["instance_id"],
            model_id=d["model_id"],
            output=d["output"],
            output_name=d["output_name"],
            method=d["method"],
            prediction=d["prediction"],
            baseline=d["baseline"],
            instance=d["instance"],
            level=d["level"],
            drilldown_path=list(d["drilldown_path"]),
            records=[record(r) for r in d["records"]],
            drilldowns={k: [CiuResult.from_dict(r) for r in v] for k, v in d["drilldowns"].items()},
        )


def to_json(doc: ExplanationDocument) -> str:
    return json.dumps(doc.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> ExplanationDocument:
    return ExplanationDocument.from_dict(json.loads(text))


def load_template(name: str = DEFAULT_TEMPLATE) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string((resources.files("ciulevels") / "templates" / name).read_text(encoding="utf-8"))
    return cp


def _label(value: float, cuts: str, labels: str) -> str:
    bounds = [float(c) for c in cuts.split("|")]
    names = labels.split("|")
    return names[sum(value >= b for b in bounds)]


def _ciu_fields(r: CiuResult, t) -> dict:
    return {
        "name": r.concept,
        "ci": r.ci,
        "cu": r.cu,
        "influence": r.influence,
        "importance": _label(r.ci, t["labels"]["importance_cuts"], t["labels"]["importance"]),
        "utility": _label(r.cu, t["labels"]["utility_cuts"], t["labels"]["utility"]),
        "direction": "positive" if r.influence > 0 else "negative" if r.influence < 0 else "no",
    }


def render_text(doc: ExplanationDocument, template: str = DEFAULT_TEMPLATE) -> str:
    t = load_template(template)
    sec = t[doc.method]
    head = {
        "output_name": doc.output_name,
        "value": doc.prediction,
        "instance_id": doc.instance_id,
        "model_id": doc.model_id,
        "baseline": doc.baseline,
    }
    lines = [sec["header"].format(**head)]
    if doc.method == "shapley":
        for r in doc.records:
            se = "" if r.stderr is None else f" (+/- {r.stderr:.3f})"
            lines.append(sec["line"].format(name=r.name, value=r.value, stderr=se))
        return "\n".join(lines) + "\n"
    for r in doc.records:
        lines.append(sec["line"].format(**_ciu_fields(r, t)))
    for concept in doc.drilldown_path:
        lines.append("")
        lines.append(sec["drilldown"].format(concept=concept))
        for r in doc.drilldowns.get(concept, []):
            lines.append(sec["sub_line"].format(concept=concept, **_ciu_fields(r, t)))
    return "\n".join(lines) + "\n"


BAR_WIDTH = 400.0
LABEL_WIDTH = 170.0
ROW = 26.0
PAD = 20.0


def _px(v: float) -> str:
    return f"{v:.3f}"


def _bars(doc: ExplanationDocument, records=None) -> dict:
    records = doc.records if records is None else records
    if doc.method == "ciu":
        bars = [
            {
                "name": r.concept,
                "ci": r.ci,
                "cu": r.cu,
                "outer": round(r.ci * BAR_WIDTH, 3),
                "solid": round(r.ci * r.cu * BAR_WIDTH, 3),
            }
            for r in records
        ]
        return {"method": "ciu", "axis": [0.0, 1.0], "bars": bars}
    values = [(r.concept, r.influence) if doc.method == "influence" else (r.name, r.value) for r in records]
    scale = max([abs(v) for _, v in values] + [1e-12])
    half = BAR_WIDTH / 2
    bars = [{"name": n, "value": v, "length": round(abs(v) / scale * half, 3)} for n, v in values]
    return {"method": doc.method, "axis": [-scale, scale], "bars": bars}


def render_barplot(doc: ExplanationDocument) -> tuple[str, dict]:
    """Self-contained SVG bar chart plus the numbers it draws."""
    data = _bars(doc)
    n = len(data["bars"])
    width = LABEL_WIDTH + BAR_WIDTH + 2 * PAD
    height = PAD * 3 + ROW * n + 20
    x0 = PAD + LABEL_WIDTH
    title = f"{doc.method.upper()} {doc.output_name} = {doc.prediction:.3f} ({doc.instance_id})"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_px(width)}" height="{_px(height)}" '
        f'viewBox="0 0 {_px(width)} {_px(height)}" font-family="sans-serif" font-size="12">',
        f'<text x="{_px(PAD)}" y="{_px(PAD)}" font-size="13" font-weight="bold">{escape(title)}</text>',
    ]
    top = PAD * 2
    zero = x0 if doc.method == "ciu" else x0 + BAR_WIDTH / 2
    for k, bar in enumerate(data["bars"]):
        y = top + k * ROW
        name = quoteattr(bar["name"])
        out.append(
            f'<text x="{_px(x0 - 8)}" y="{_px(y + ROW / 2 + 4)}" text-anchor="end">{escape(bar["name"])}</text>'
        )
        if doc.method == "ciu":
            out.append(
                f'<rect class="ci" data-name={name} x="{_px(x0)}" y="{_px(y + 3)}" width="{_px(bar["outer"])}" '
                f'height="{_px(ROW - 6)}" style="fill:#4a7fb5;fill-opacity:0.25;stroke:#4a7fb5"/>'
            )
            colour = "#2e8b57" if bar["cu"] >= 0.5 else "#c0504d"
            out.append(
                f'<rect class="cu" data-name={name} x="{_px(x0)}" y="{_px(y + 3)}" width="{_px(bar["solid"])}" '
                f'height="{_px(ROW - 6)}" style="fill:{colour}"/>'
            )
        else:
            start = zero if bar["value"] >= 0 else zero - bar["length"]
            colour = "#2e8b57" if bar["value"] >= 0 else "#c0504d"
            out.append(
                f'<rect class="signed" data-name={name} data-value="{bar["value"]!r}" x="{_px(start)}" '
                f'y="{_px(y + 3)}" width="{_px(bar["length"])}" height="{_px(ROW - 6)}" style="fill:{colour}"/>'
            )
    axis_y = top + n * ROW + 4
    out.append(
        f'<line x1="{_px(zero)}" y1="{_px(top)}" x2="{_px(zero)}" y2="{_px(axis_y)}" style="stroke:#333"/>'
    )
    out.append(
        f'<line x1="{_px(x0)}" y1="{_px(axis_y)}" x2="{_px(x0 + BAR_WIDTH)}" y2="{_px(axis_y)}" style="stroke:#333"/>'
    )
    lo, hi = data["axis"]
    for q in range(5):
        value = lo + (hi - lo) * q / 4
        x = x0 + BAR_WIDTH * q / 4
        out.append(f'<text x="{_px(x)}" y="{_px(axis_y + 14)}" text-anchor="middle">{value:.2f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n", data
