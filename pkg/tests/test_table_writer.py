# test_table_writer.py
import json
import math

import pytest

from qnd_becs.integrations.table_writer import MANIFEST_NAME, TableWriter, manifest_entries
from qnd_becs.numerics.common import OutputError


def test_csv_marks_missing_values():
    text = TableWriter(precision=6).render(["a", "b"], [[1.0, None], [0.5, float("nan")]])
    assert text == "a,b\n1,NA\n0.5,NA\n"


def test_csv_precision():
    text = TableWriter(precision=4).render(["x"], [[math.pi]])
    assert text.splitlines()[1] == "3.142"


def test_json_uses_null():
    text = TableWriter(precision=3, fmt="json").render(["a", "b"], [[2.0 / 3.0, None]])
    assert json.loads(text) == {"columns": ["a", "b"], "rows": [[0.667, None]]}


def test_unknown_format():
    with pytest.raises(OutputError):
        TableWriter(fmt="xlsx").render(["a"], [[1.0]])


def test_configure_returns_a_new_writer():
    base = TableWriter()
    configured = base.configure(precision=5, fmt="json")
    assert (configured.precision, configured.fmt) == (5, "json")
    assert (base.precision, base.fmt) == (12, "csv")


def test_write_and_read_back(tmp_path):
    writer = TableWriter(precision=12)
    entry = writer.write_table(tmp_path, "demo", ["tau", "value"], [[0.0, 1.0], [0.5, None]])
    assert entry["file"] == "demo.csv"
    assert entry["rows"] == 2
    assert entry["sha256"] == TableWriter.file_checksum(tmp_path / "demo.csv")
    frame = writer.read_table(tmp_path / "demo.csv")
    assert frame["value"].isna().tolist() == [False, True]


def test_manifest_round_trip(tmp_path):
    writer = TableWriter()
    writer.write_manifest(tmp_path, {"files": [{"file": "a.csv"}], "tool": "qnd-becs"})
    text = (tmp_path / MANIFEST_NAME).read_text()
    assert text.index('"files"') < text.index('"tool"')
    assert manifest_entries(TableWriter.read_manifest(tmp_path)) == [{"file": "a.csv"}]


def test_prepare_directory_rejects_files(tmp_path):
    target = tmp_path / "file"
    target.write_text("")
    with pytest.raises(OutputError):
        TableWriter().prepare_directory(target)
    created = TableWriter().prepare_directory(tmp_path / "nested" / "out")
    assert created.is_dir()
