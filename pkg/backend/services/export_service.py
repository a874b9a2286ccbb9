import csv
import json
import logging
import math
import os
from typing import Iterable, Sequence

from core.config import get_settings
from schemas.scenario import OutputFormat, RunReport

logger = logging.getLogger(__name__)


def format_value(value, digits: int) -> str:
    """Fixed significant-digit text for floats; other values pass through str()."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{digits}g}"
    if value is None:
        return ""
    return str(value)


class ExportService:
    def __init__(self, digits: int = None):
        self.digits = digits or get_settings().SIGNIFICANT_DIGITS

    def write_rows(
        self,
        directory: str,
        stem: str,
        columns: Sequence[str],
        rows: Iterable[Sequence],
        fmt: OutputFormat = OutputFormat.CSV,
    ) -> str:
        """
        Write data rows as CSV (header + rows) or as a JSON list of records.

        Returns:
            Path of the written file
        """
        os.makedirs(directory, exist_ok=True)
        fmt = OutputFormat(fmt)
        path = os.path.join(directory, f"{stem}.{fmt.value}")
        rows = list(rows)
        if fmt is OutputFormat.CSV:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([format_value(v, self.digits) for v in row])
        else:
            records = [
                {c: (float(format_value(v, self.digits)) if isinstance(v, float) else v) for c, v in zip(columns, row)}
                for row in rows
            ]
            with open(path, "w", encoding="utf-8") as f:
                f.write(json.dumps(records, indent=2))
        logger.info(f"✅ [RUNNER] Saved {len(rows)} rows: {path}")
        return path

    def write_json(self, directory: str, stem: str, payload) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{stem}.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(payload, indent=2))
        return path

    def write_report(self, directory: str, report: RunReport) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{report.scenario}_report.json")
        report.files = sorted(set(report.files + [path]))
        with open(path, "w", encoding="utf-8") as f:
            f.write(report.model_dump_json(indent=2))
        logger.info(f"✅ [RUNNER] Saved report: {path}")
        return path


export_service = ExportService()
