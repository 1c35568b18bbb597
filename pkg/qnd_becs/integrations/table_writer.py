# integrations/table_writer.py
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from ..numerics.common import OutputError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MISSING_CSV = "NA"


class TableWriter:
    """Service for writing result tables and the run manifest"""

    def __init__(self, precision: int = 12, fmt: str = "csv"):
        self.precision = precision
        self.fmt = fmt

    def configure(self, precision: Optional[int] = None, fmt: Optional[str] = None) -> "TableWriter":
        return TableWriter(
            precision=self.precision if precision is None else precision,
            fmt=self.fmt if fmt is None else fmt,
        )

    def prepare_directory(self, directory: Path) -> Path:
        """Create the output directory, raising OutputError if it cannot be used."""
        directory = Path(directory)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            marker = directory / ".write-marker"
            marker.write_text("")
            marker.unlink()
        except OSError as e:
            logger.error(f"Error preparing output directory {directory}: {str(e)}")
            raise OutputError(f"Output directory {directory} is not writable: {e}")
        return directory

    def _format(self, value: Any) -> Optional[float]:
        if value is None:
            return None
        value = float(value)
        if math.isnan(value):
            return None
        return float(f"{value:.{self.precision}g}")

    def render(self, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        """Serialize a table to text in the configured format."""
        if self.fmt == "csv":
            frame = pd.DataFrame(list(rows), columns=list(columns), dtype=float)
            return frame.to_csv(
                index=False,
                float_format=f"%.{self.precision}g",
                na_rep=MISSING_CSV,
                lineterminator="\n",
            )
        if self.fmt == "json":
            payload = {
                "columns": list(columns),
                "rows": [[self._format(v) for v in row] for row in rows],
            }
            return json.dumps(payload, separators=(",", ":")) + "\n"
        raise OutputError(f"Unknown output format: {self.fmt}")

    def write_table(
        self, directory: Path, stem: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> Dict[str, Any]:
        """
        Write one table and describe it for the manifest.

        Args:
            directory: Existing output directory
            stem: File name without extension
            columns: Header names including units
            rows: Row values; None marks a not-applicable value

        Returns:
            Manifest entry with file name, row count and sha256
        """
        name = f"{stem}.{self.fmt}"
        text = self.render(columns, rows)
        path = Path(directory) / name
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as e:
            logger.error(f"Error writing table {path}: {str(e)}")
            raise OutputError(f"Failed to write {path}: {e}")
        logger.debug(f"Wrote {name} with {len(rows)} rows")
        return {
            "file": name,
            "rows": len(rows),
            "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        }

    def write_manifest(self, directory: Path, manifest: Dict[str, Any]) -> Path:
        path = Path(directory) / MANIFEST_NAME
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as e:
            logger.error(f"Error writing manifest {path}: {str(e)}")
            raise OutputError(f"Failed to write {path}: {e}")
        return path

    def read_table(self, path: Path) -> pd.DataFrame:
        """Read a table written by write_table back into a DataFrame."""
        path = Path(path)
        if path.suffix == ".csv":
            return pd.read_csv(path, na_values=[MISSING_CSV], keep_default_na=False)
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        return pd.DataFrame(payload["rows"], columns=payload["columns"], dtype=float)

    @staticmethod
    def file_checksum(path: Path) -> str:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()

    @staticmethod
    def read_manifest(directory: Path) -> Dict[str, Any]:
        with open(Path(directory) / MANIFEST_NAME, encoding="utf-8") as handle:
            return json.load(handle)


def manifest_entries(manifest: Dict[str, Any]) -> List[Dict[str, Any]]:
    return list(manifest.get("files", []))


# Singleton instance
table_writer = TableWriter()
