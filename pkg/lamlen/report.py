"""Output files of an experiment run.

Histograms and raw samples are CSV (UTF-8, LF, 17 significant digits); the
summary is a flat JSON object whose key order is fixed by SummaryReport.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import yaml

from lamlen.errors import OutputError
from lamlen.models import SummaryReport
from lamlen.stats import Histogram

logger = logging.getLogger(__name__)

HISTOGRAM_HEADER = ("bin_lo", "bin_hi", "weight")


def format_number(x: float) -> str:
    return format(float(x), ".17g")


class ReportWriter:
    """Write the files of one experiment into an output directory"""

    def __init__(self, output_dir: Union[str, Path], experiment: str):
        self.output_dir = Path(output_dir)
        self.experiment = experiment
        self.written: List[Path] = []

    def prepare(self) -> None:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {self.output_dir}: {e}") from e

    def path_for(self, kind: str, suffix: str) -> Path:
        return self.output_dir / f"{self.experiment}_{kind}.{suffix}"

    def _write_rows(self, path: Path, header: Sequence[str], rows) -> Path:
        self.prepare()
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.written.append(path)
        logger.debug("wrote %s", path)
        return path

    def write_histogram(self, hist: Histogram, label: str = "") -> Path:
        kind = f"{label}_histogram" if label else "histogram"
        rows = ((format_number(lo), format_number(hi), format_number(w)) for lo, hi, w in hist.rows())
        return self._write_rows(self.path_for(kind, "csv"), HISTOGRAM_HEADER, rows)

    def write_raw(self, columns: Dict[str, np.ndarray]) -> Path:
        names = list(columns)
        arrays = [np.asarray(columns[n], dtype=float) for n in names]
        rows = ([format_number(x) for x in row] for row in zip(*arrays))
        return self._write_rows(self.path_for("raw", "csv"), names, rows)

    def write_summary(self, report: SummaryReport) -> Path:
        self.prepare()
        path = self.path_for("summary", "json")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(report.to_dict(), f, indent=2)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.written.append(path)
        return path

    def write_yaml(self, report: SummaryReport) -> Path:
        self.prepare()
        path = self.path_for("summary", "yaml")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                yaml.safe_dump(report.to_dict(), f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.written.append(path)
        return path
