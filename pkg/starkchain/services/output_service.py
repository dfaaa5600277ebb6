"""
Output Service - reproducible CSV / JSON artifacts
CSV bodies are purely numeric (17 significant digits, LF endings); every CSV
gets a JSON sidecar of the same stem carrying the RunConfig that produced it.
"""

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from starkchain.core.logging import get_logger
from starkchain.models import RunConfig

logger = get_logger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and NaN into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, range)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(float(value.real)), jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if not math.isfinite(value) else value
    return value


def _atomic_write(path: Path, content: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = None
    try:
        temp_file = tempfile.NamedTemporaryFile(
            mode="w", delete=False, encoding="utf-8", newline="", dir=path.parent, suffix=".tmp"
        )
        temp_file.write(content)
        temp_file.close()
        os.replace(temp_file.name, path)
    except Exception:
        if temp_file and os.path.exists(temp_file.name):
            os.unlink(temp_file.name)
        raise


def render_csv(columns: Mapping[str, Sequence]) -> str:
    frame = pd.DataFrame({name: np.asarray(values) for name, values in columns.items()})
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", na_rep="nan")


def render_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class OutputWriter:
    """Writes one run's artifacts under a root directory and remembers what it wrote."""

    def __init__(self, config: RunConfig, root: Optional[Path] = None):
        self.config = config
        self.root = Path(root) if root is not None else Path(config.output_dir)
        self.files: List[Path] = []

    def _header(self, file_name: str, metadata: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
        return {
            "file": file_name,
            "run_config": self.config.model_dump(mode="json"),
            "metadata": dict(metadata or {}),
        }

    def write_table(self, stem: str, columns: Mapping[str, Sequence], metadata: Optional[Mapping[str, Any]] = None) -> Path:
        csv_path = self.root / f"{stem}.csv"
        _atomic_write(csv_path, render_csv(columns))
        self.files.append(csv_path)
        header = self._header(csv_path.name, metadata)
        header["columns"] = list(columns.keys())
        self.write_json(stem, header)
        logger.info(f"✅ wrote {csv_path}")
        return csv_path

    def write_json(self, stem: str, payload: Mapping[str, Any]) -> Path:
        json_path = self.root / f"{stem}.json"
        _atomic_write(json_path, render_json(payload))
        self.files.append(json_path)
        return json_path

    def write_record(self, stem: str, record: Mapping[str, Any]) -> Path:
        """Standalone JSON record with the run header."""
        header = self._header(f"{stem}.json", None)
        header["record"] = dict(record)
        return self.write_json(stem, header)


def write_manifest(root: Path, files: Sequence[Path]) -> Path:
    """manifest.json listing every file (relative to root) with its sha256."""
    root = Path(root)
    entries = sorted(
        ({"path": Path(path).relative_to(root).as_posix(), "sha256": file_sha256(Path(path))} for path in files),
        key=lambda entry: entry["path"],
    )
    manifest_path = root / "manifest.json"
    _atomic_write(manifest_path, render_json({"files": entries}))
    logger.info(f"✅ manifest with {len(entries)} file(s) written to {manifest_path}")
    return manifest_path
