"""JSON readers and writers for distribution and witness-channel files."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

from .dist_core import JointDistribution, VariableDef, build_distribution, format_rational, parse_rational
from .errors import FormatError
from .intrinsic import Channel

_RATIONAL = re.compile(r"^\s*-?\d+\s*(/\s*\d+\s*)?$")


def _rational(text: Any, where: str) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise FormatError(f"{where}: probability must be a rational string like '1/6', got {text!r}")
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def _loads(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise FormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from None


def distribution_to_json(dist: JointDistribution) -> dict[str, Any]:
    return {
        "variables": [{"name": v.name, "alphabet": list(v.alphabet), "owner": v.owner.value} for v in dist.variables],
        "entries": [{"outcome": list(o), "p": format_rational(p)} for o, p in dist.support()],
    }


def distribution_from_json(doc: Any, source: str = "<distribution>") -> JointDistribution:
    if not isinstance(doc, dict) or "variables" not in doc or "entries" not in doc:
        raise FormatError(f"{source}: expected an object with 'variables' and 'entries'")
    try:
        variables = [VariableDef(v["name"], v["alphabet"], v["owner"]) for v in doc["variables"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{source}: bad variable definition ({exc})") from None
    entries = []
    for i, e in enumerate(doc["entries"]):
        if not isinstance(e, dict) or "outcome" not in e or "p" not in e:
            raise FormatError(f"{source}: entry {i} needs 'outcome' and 'p'")
        entries.append((e["outcome"], _rational(e["p"], f"{source}: entry {i}")))
    return build_distribution(variables, entries)


def load_distribution(path: str | Path) -> JointDistribution:
    path = Path(path)
    return distribution_from_json(_loads(path.read_text(encoding="utf-8"), str(path)), str(path))


def dump_distribution(dist: JointDistribution, path: str | Path):
    Path(path).write_text(json.dumps(distribution_to_json(dist), indent=2) + "\n", encoding="utf-8")


def channel_to_json(ch: Channel) -> dict[str, Any]:
    return {"input": list(ch.input_alphabet), "output": list(ch.output_alphabet), "rows": ch.as_mapping()}


def channel_from_json(doc: Any, source: str = "<channel>") -> Channel:
    if not isinstance(doc, dict) or not {"input", "output", "rows"} <= set(doc):
        raise FormatError(f"{source}: expected an object with 'input', 'output' and 'rows'")
    inputs, outputs, rows = list(doc["input"]), list(doc["output"]), doc["rows"]
    unknown = set(rows) - set(inputs)
    if unknown:
        raise FormatError(f"{source}: rows for unknown input symbols {sorted(unknown)}")
    matrix = []
    for sym in inputs:
        cells = rows.get(sym, {})
        bad = set(cells) - set(outputs)
        if bad:
            raise FormatError(f"{source}: row {sym} uses unknown output symbols {sorted(bad)}")
        matrix.append([_rational(cells[o], f"{source}: row {sym}") if o in cells else Fraction(0) for o in outputs])
    return Channel(inputs, outputs, matrix)


def load_channel(path: str | Path) -> Channel:
    path = Path(path)
    return channel_from_json(_loads(path.read_text(encoding="utf-8"), str(path)), str(path))


def dump_channel(ch: Channel, path: str | Path):
    Path(path).write_text(json.dumps(channel_to_json(ch), indent=2) + "\n", encoding="utf-8")
