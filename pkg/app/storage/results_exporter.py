"""Export of benchmark records and solutions."""

import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import ValidationError

from app.core.schemas import BenchRecord, LayoutSpec, Solution
from app.utils.paths import resolve_path

logger = logging.getLogger(__name__)

CSV_HEADER = ["strategy", "constraints", "run", "time_ms", "suboptimal", "iterations", "status"]


class ResultsExporter:
    """Writes benchmark records and solutions to CSV or JSON files."""

    def __init__(self, output_dir: str = "output"):
        """
        Initialize results exporter.

        Args:
            output_dir: Directory for relative file names (relative to base path)
        """
        self.output_dir = resolve_path(output_dir)

    def _target(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if not path.is_absolute() and path.parent == Path("."):
            path = self.output_dir / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def export_records(self, records: Sequence[BenchRecord], path: Union[str, Path],
                       format: Optional[str] = None) -> Path:
        """
        Export benchmark records.

        Args:
            records: records to write
            path: target file; bare file names go to the output directory
            format: "csv" or "json" (taken from the suffix when omitted)

        Returns:
            Path to the exported file
        """
        format = format or (Path(path).suffix.lstrip(".").lower() or "csv")
        if format == "csv":
            return self._export_csv(records, self._target(path))
        elif format == "json":
            return self._export_json(records, self._target(path))
        else:
            raise ValueError(f"Unsupported format: {format}")

    def _export_csv(self, records: Sequence[BenchRecord], filepath: Path) -> Path:
        with open(filepath, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow([
                    r.strategy.value,
                    r.constraints,
                    r.run,
                    f"{r.time_ms:.6f}",
                    r.suboptimal,
                    r.iterations,
                    r.status.value,
                ])

        logger.info(f"Exported {len(records)} records to {filepath}")
        return filepath

    def _export_json(self, records: Sequence[BenchRecord], filepath: Path) -> Path:
        data = [r.model_dump(mode="json") for r in records]
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)

        logger.info(f"Exported {len(records)} records to {filepath}")
        return filepath

    def read_records(self, path: Union[str, Path]) -> List[BenchRecord]:
        """
        Read records back from a CSV written by export_records.

        Raises:
            ValueError: the header differs or a row does not validate
        """
        path = Path(path)
        records = []
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    records.append(BenchRecord(**dict(zip(CSV_HEADER, row))))
                except ValidationError as e:
                    raise ValueError(f"{path}:{line_no}: invalid record: {e}") from None
        logger.debug(f"Read {len(records)} records from {path}")
        return records

    def export_solution(self, spec: LayoutSpec, solution: Solution, path: Union[str, Path]) -> Path:
        """Write a solution as JSON, keyed by variable name."""
        filepath = self._target(path)
        data = {
            "status": solution.status.value,
            "strategy": solution.strategy.value if solution.strategy else None,
            "iterations": solution.iterations,
            "objective": solution.objective,
            "variables": dict(zip(spec.var_names, solution.x)),
            "errors": solution.errors,
            "message": solution.message,
        }
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)

        logger.info(f"Exported solution to {filepath}")
        return filepath
