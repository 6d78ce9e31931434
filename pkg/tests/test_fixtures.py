import json
import re
from pathlib import Path

import pytest

from paraspin import fixtures
from paraspin.curves import parse_equation

REFERENCE = Path(__file__).resolve().parents[1] / "paper.md"
LABELS = {
    "277": "values277", "349": "values349", "353": "values353", "389": "values389",
    "461": "values461", "523": "values523", "587+": "values587p", "587-": "values587m",
}


def _reference_text():
    if not REFERENCE.exists():
        pytest.skip("reference document not present")
    return REFERENCE.read_text()


def _reference_table(label):
    """(C_F string, rows [(D, A or None, value string)]) parsed from the LaTeX table."""
    text = _reference_text()
    start = text.index(f"\\label{{tbl:{label}}}")
    cap_start = text.rindex("\\caption", 0, start)
    caption = text[cap_start:start]
    c_f = re.search(r"=\s*([0-9.]+)\$", caption).group(1)
    body = text[start : text.index("\\end{tabular}", start)]
    body = re.sub(r"\\phantom\{[^}]*\}", "", body)
    body = body.split("\\hline\\hline", 1)[1]
    cells = [c.strip() for c in re.split(r"&|\\\\\\hline", body)]
    cells = [c for c in cells if c]
    width = 3 if "A(D" in text[start : start + 600] else 2
    rows = []
    for i in range(0, len(cells) - width + 1, width):
        group = cells[i : i + width]
        D = int(group[0])
        A = None if width == 2 else (int(group[1]) if re.fullmatch(r"-?\d+", group[1]) else group[1])
        rows.append((D, A, group[-1]))
    return c_f, sorted(rows, key=lambda r: -r[0])


@pytest.mark.parametrize("key", fixtures.LEVELS)
def test_value_tables_match_reference(key):
    """[PAPER] every D, A(D), printed value and C_F."""
    c_f, rows = _reference_table(LABELS[key])
    vt = fixtures.value_table(key)
    assert vt.c_f == c_f
    ours = sorted(((r.D, r.A, r.value) for r in vt.rows), key=lambda r: -r[0])
    assert ours == rows


def test_curve_table_matches_reference():
    """[PAPER] p, epsilon, lambda and the curve equations."""
    text = _reference_text()
    start = text.index("\\label{tbl:curves}")
    body = text[start : text.index("\\end{tabular}", start)]
    got = []
    for line in body.splitlines():
        m = re.match(r"\s*(\d+)\s*&\s*([+-])\s*&\s*(-?\d+)\s*&\\eq\{\$(.*)\$\}", line)
        if m:
            eq = m.group(4).replace("\\left(", "(").replace("\\right)", ")")
            eq = re.sub(r"\^\{(\d+)\}", r"^\1", eq)
            got.append((int(m.group(1)), m.group(2), int(m.group(3)), parse_equation(eq)))
    ours = [
        (c.level, "+" if c.al_sign == 1 else "-", c.lambda_p, (c.f_coeffs, c.h_coeffs))
        for c in fixtures.curves().values()
    ]
    assert ours == got and len(got) == 8


def test_checksums_present_and_valid():
    for name in ["table1_curves.json"] + [f"table{i}_values.json" for i in range(2, 10)]:
        data = json.loads(fixtures.fixture_text(name))
        body = {k: v for k, v in data.items() if k != "sha256"}
        assert data["sha256"] == fixtures.checksum(body)


def test_tampered_fixture_rejected(monkeypatch, tmp_path):
    data = json.loads(fixtures.fixture_text("table2_values.json"))
    data["rows"][0]["value"] = "2.000000"
    (tmp_path / "table2_values.json").write_text(json.dumps(data))

    class Fake:
        def joinpath(self, name):
            return tmp_path / name

    monkeypatch.setattr(fixtures.resources, "files", lambda pkg: Fake())
    with pytest.raises(fixtures.FixtureError, match="checksum"):
        fixtures.value_table("277")
    with pytest.raises(fixtures.FixtureError, match="missing"):
        fixtures.value_table("349")


def test_normalize_level():
    assert fixtures.normalize_level(277) == "277"
    assert fixtures.normalize_level("587p") == "587+"
    assert fixtures.normalize_level("587minus") == "587-"
    assert fixtures.level_tag("587+") == "587p"
    with pytest.raises(ValueError, match="ambiguous"):
        fixtures.normalize_level("587")
    with pytest.raises(ValueError):
        fixtures.normalize_level("11")


def test_table_row_properties():
    vt = fixtures.value_table("523")
    unknown = [r for r in vt.rows if r.A == "unknown"]
    assert [r.D for r in unknown] == [-199] and unknown[0].target is None
    assert vt.row(-3).printed == 1.0
    assert all(r.A is None for r in fixtures.value_table("587-").rows)
    with pytest.raises(KeyError):
        vt.row(-5)
