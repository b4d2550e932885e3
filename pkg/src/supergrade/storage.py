"""JSON report encoding and the on-disk report archive."""

import asyncio
import logging
import os
import re
from pathlib import Path
from typing import Any, Optional

import aiofiles
import msgspec
from pydantic import ValidationError
from filelock import FileLock

from .errors import SupergradeError
from .schemas import Report

logger = logging.getLogger(__name__)


class StorageError(SupergradeError):
    """Base exception for storage errors."""
    pass


class ReportNotFoundError(StorageError):
    """Report not found in the archive."""
    pass


# ========== Encoding ==========

def report_payload(report: Report, include_timing: bool = False) -> dict[str, Any]:
    """Plain JSON-ready dict; timing_ms is dropped unless requested."""
    exclude = None if include_timing else {"timing_ms"}
    return report.model_dump(mode="json", exclude=exclude)


def encode_json(data: Any) -> bytes:
    """Deterministic JSON: sorted keys, 2-space indentation, trailing newline."""
    raw = msgspec.json.encode(data, order="sorted")
    return msgspec.json.format(raw, indent=2) + b"\n"


def encode_report(report: Report, include_timing: bool = False) -> bytes:
    return encode_json(report_payload(report, include_timing))


def decode_report(content: bytes | str) -> Report:
    """Parse an archived report.

    Raises:
        StorageError: If the content is not a valid report
    """
    try:
        data = msgspec.json.decode(content)
    except msgspec.DecodeError as e:
        raise StorageError(f"Invalid report JSON: {e}") from e
    try:
        return Report(**data)
    except (TypeError, ValidationError) as e:
        raise StorageError(f"Not a report: {e}") from e


_UNSAFE = re.compile(r"[^A-Za-z0-9_.,=()-]+")


def instance_key(instance: str) -> str:
    """File-name-safe key for an instance description."""
    return _UNSAFE.sub("_", instance).strip("_") or "instance"


# ========== Archive ==========

class ReportStore:
    """Archive of reports under <data_dir>/reports/<claim>/ and golden counts under <data_dir>/golden/."""

    def __init__(self, data_dir: str | Path = "data"):
        """Initialize the archive.

        Args:
            data_dir: Root directory for archived reports
        """
        self.data_dir = Path(data_dir)
        self.reports_dir = self.data_dir / "reports"
        self.golden_dir = self.data_dir / "golden"
        self._index_lock = asyncio.Lock()

        for dir_path in [self.reports_dir, self.golden_dir]:
            dir_path.mkdir(parents=True, exist_ok=True)

    def _get_report_path(self, claim: str, instance: str) -> Path:
        claim_dir = self.reports_dir / instance_key(claim)
        claim_dir.mkdir(parents=True, exist_ok=True)
        return claim_dir / f"{instance_key(instance)}.json"

    async def save_report(self, report: Report, include_timing: bool = False) -> Path:
        """Archive a report, replacing any earlier one for the same instance.

        Returns:
            Path of the written file
        """
        path = self._get_report_path(report.claim, report.instance)
        await self._atomic_write(path, encode_report(report, include_timing))
        logger.info(f"Archived {report.claim} report at {path}")
        return path

    async def load_report(self, claim: str, instance: str) -> Report:
        """Load an archived report.

        Raises:
            ReportNotFoundError: If nothing is archived for this claim and instance
        """
        path = self._get_report_path(claim, instance)
        if not path.exists():
            raise ReportNotFoundError(f"No report for {claim} on {instance}")
        async with aiofiles.open(path, "rb") as f:
            content = await f.read()
        return decode_report(content)

    async def list_reports(self, claim: Optional[str] = None) -> list[str]:
        """Archived report keys as 'claim/instance', sorted."""
        keys = []
        async with self._index_lock:
            dirs = [self.reports_dir / instance_key(claim)] if claim else sorted(self.reports_dir.iterdir())
            for claim_dir in dirs:
                if not claim_dir.is_dir():
                    continue
                for path in sorted(claim_dir.glob("*.json")):
                    keys.append(f"{claim_dir.name}/{path.stem}")
        return keys

    # ========== Golden counts ==========

    def _get_golden_path(self) -> Path:
        return self.golden_dir / "counts.json"

    async def record_golden(self, name: str, counts: dict[str, int]) -> None:
        """Merge a named count entry into the golden-count file under a file lock."""
        path = self._get_golden_path()
        lock = FileLock(str(path) + ".lock", timeout=10)
        with lock:
            data = await self._read_json(path) if path.exists() else {}
            data[name] = counts
            await self._atomic_write(path, encode_json(data))
        logger.info(f"Recorded golden counts {name}: {counts}")

    async def load_golden(self) -> dict[str, dict[str, int]]:
        path = self._get_golden_path()
        if not path.exists():
            return {}
        return await self._read_json(path)

    # ========== Helper Methods ==========

    async def _read_json(self, path: Path) -> Any:
        async with aiofiles.open(path, "rb") as f:
            content = await f.read()
        try:
            return msgspec.json.decode(content)
        except msgspec.DecodeError as e:
            raise StorageError(f"Corrupt JSON in {path}: {e}") from e

    async def _atomic_write(self, path: Path, content: bytes) -> None:
        """Write to a temp file, then rename over the target."""
        tmp_path = path.with_suffix(".tmp")
        async with aiofiles.open(tmp_path, "wb") as f:
            await f.write(content)
        os.replace(tmp_path, path)
