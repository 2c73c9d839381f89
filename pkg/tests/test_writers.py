from __future__ import annotations

import json
import math
from pathlib import Path

from graphlog.writers import write_summary_json


def test_non_finite_summary_values_are_written_as_null(tmp_path: Path) -> None:
    path = tmp_path / "summary.json"
    write_summary_json({"d_hat": math.nan, "rows": [{"tail_mass": math.inf}, {"tail_mass": 0.5}]}, path)
    text = path.read_text(encoding="utf-8")
    assert "NaN" not in text and "Infinity" not in text
    doc = json.loads(text)
    assert doc["d_hat"] is None
    assert [row["tail_mass"] for row in doc["rows"]] == [None, 0.5]
