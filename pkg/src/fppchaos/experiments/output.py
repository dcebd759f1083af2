"""Result container and writers (RFC 4180 CSV, JSON summary, gnuplot script)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ExperimentResult", "format_cell", "write_outputs", "EXIT_OK", "EXIT_CHECK_FAILED",
           "EXIT_CENSORED"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CENSORED = 3


def format_cell(value) -> str:
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


@dataclass
class ExperimentResult:
    """Rows share the fixed ``columns``; ``summary`` holds derived checks."""

    experiment: str
    columns: tuple[str, ...]
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    plot_x: str | None = None
    plot_y: str | None = None
    plot_group: str | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"experiment": self.experiment, "meta": self.meta, "summary": self.summary,
                   "exit_code": self.exit_code}
        return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"

    def gnuplot_script(self, csv_name: str) -> str:
        if not (self.plot_x and self.plot_y):
            return ""
        xi = self.columns.index(self.plot_x) + 1
        yi = self.columns.index(self.plot_y) + 1
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set xlabel '{self.plot_x}'",
            f"set ylabel '{self.plot_y}'",
        ]
        if self.plot_group:
            gi = self.columns.index(self.plot_group) + 1
            groups = sorted({row[self.plot_group] for row in self.rows})
            plots = [f"'{csv_name}' using {xi}:(${gi}=={g} ? ${yi} : 1/0) with linespoints "
                     f"title '{self.plot_group}={g}'" for g in groups]
            lines.append("plot " + ", \\\n     ".join(plots))
        else:
            lines.append(f"plot '{csv_name}' using {xi}:{yi} with linespoints")
        return "\n".join(lines) + "\n"


def write_outputs(result: ExperimentResult, out: str | None, plot: bool = False) -> list[Path]:
    """Write ``out`` (CSV) and its ``.json`` sibling; optionally a ``.gp`` script."""
    if out is None:
        return []
    csv_path = Path(out)
    if csv_path.suffix.lower() != ".csv":
        csv_path = csv_path.with_suffix(csv_path.suffix + ".csv") if csv_path.suffix else csv_path.with_suffix(".csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    written = [csv_path, csv_path.with_suffix(".json")]
    csv_path.write_bytes(result.to_csv().encode())
    written[1].write_bytes(result.to_json().encode())
    if plot:
        script = result.gnuplot_script(csv_path.name)
        if script:
            gp = csv_path.with_suffix(".gp")
            gp.write_text(script)
            written.append(gp)
    return written
