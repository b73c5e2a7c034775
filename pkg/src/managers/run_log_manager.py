import csv
import logging
from typing import Dict, List, Mapping, Sequence

logger = logging.getLogger(__name__)


def _format(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunLogManager:
    """Writes and reads the CSV artifacts of a run (loss log, metric tables)."""

    def __init__(self, path, columns: Sequence[str]):
        """
        Args:
            path: CSV file to write.
            columns (Sequence[str]): Header row, in order.
        """
        self._path = path
        self._columns = tuple(columns)
        self._rows: List[Dict[str, object]] = []

    @property
    def rows(self) -> List[Dict[str, object]]:
        return list(self._rows)

    def append(self, row: Mapping[str, object]) -> None:
        missing = [c for c in self._columns if c not in row]
        if missing:
            raise ValueError(f"row lacks columns {missing}")
        self._rows.append({c: row[c] for c in self._columns})

    def save(self) -> None:
        with open(self._path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self._columns)
            for row in self._rows:
                writer.writerow([_format(row[c]) for c in self._columns])
        logger.debug("wrote %d rows to %s", len(self._rows), self._path)

    @staticmethod
    def load(path) -> List[Dict[str, str]]:
        with open(path, "r", newline="") as f:
            return list(csv.DictReader(f))
