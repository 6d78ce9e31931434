"""Embedded curve and value tables, with checksum validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Union

from ..curves import CurveSpec, parse_equation

LEVELS = ("277", "349", "353", "389", "461", "523", "587+", "587-")
_TABLE_NUMBER = {key: i + 2 for i, key in enumerate(LEVELS)}


class FixtureError(RuntimeError):
    pass


def checksum(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _read(name: str) -> dict:
    try:
        text = resources.files("paraspin.fixtures").joinpath(name).read_text()
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise FixtureError(f"fixture {name} missing") from exc
    data = json.loads(text)
    body = {k: v for k, v in data.items() if k != "sha256"}
    if data.get("sha256") != checksum(body):
        raise FixtureError(f"checksum mismatch in {name}")
    return data


def normalize_level(level: Union[str, int]) -> str:
    key = str(level).strip().lower().replace("plus", "+").replace("minus", "-")
    if key.endswith("p") or key.endswith("m"):
        key = key[:-1] + ("+" if key[-1] == "p" else "-")
    if key == "587":
        raise ValueError("level 587 is ambiguous; use 587+ or 587-")
    if key not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {', '.join(LEVELS)}")
    return key


def level_tag(key: str) -> str:
    """File-name friendly form: 587+ -> 587p."""
    return key.replace("+", "p").replace("-", "m")


def curves() -> dict[str, CurveSpec]:
    out = {}
    for row in _read("table1_curves.json")["rows"]:
        sign = 1 if row["epsilon"] == "+" else -1
        f, h = parse_equation(row["C"])
        key = str(row["p"]) + ("" if row["p"] != 587 else row["epsilon"])
        out[key] = CurveSpec(row["p"], sign, row["lambda"], f, h, label=key)
    return out


def curve(level) -> CurveSpec:
    return curves()[normalize_level(level)]


@dataclass(frozen=True)
class TableRow:
    D: int
    A: Union[int, str, None]  # None where the table has no A column
    value: str  # as printed

    @property
    def printed(self) -> float:
        return float(self.value)

    @property
    def target(self) -> Fraction | None:
        return Fraction(self.A) ** 2 if isinstance(self.A, int) else None


@dataclass(frozen=True)
class ValueTable:
    level: str
    c_f: str
    rows: tuple[TableRow, ...]

    def row(self, D: int) -> TableRow:
        for r in self.rows:
            if r.D == D:
                return r
        raise KeyError(D)


def value_table(level) -> ValueTable:
    key = normalize_level(level)
    data = _read(f"table{_TABLE_NUMBER[key]}_values.json")
    rows = tuple(TableRow(r["D"], r.get("A"), r["value"]) for r in data["rows"])
    return ValueTable(data["level"], data["C_F"], rows)


def fixture_text(name: str) -> str:
    """Raw text of an auxiliary fixture (CSV files)."""
    try:
        return resources.files("paraspin.fixtures").joinpath(name).read_text()
    except FileNotFoundError as exc:
        raise FixtureError(f"fixture {name} missing") from exc
