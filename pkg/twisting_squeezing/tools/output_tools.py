"""CSV and JSON emission with fixed formatting and all-or-nothing replacement."""

import json
import logging
import os
import tempfile
from typing import Any, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel

from ..errors import ConfigError
from ..models import SqueezingRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
RECORD_COLUMNS = ["tau", "jx", "jy", "jz", "vxx", "vyy", "vzz", "vxy", "vxz", "vyz",
                  "xi2", "alpha", "Q"]


def records_to_frame(records: Sequence[SqueezingRecord],
                     n_particles: Optional[int] = None) -> pd.DataFrame:
    """
    Time-series table with one row per record.

    If `n_particles` is given the time column is the physical time t = τ/N
    and is named `t`.
    """
    frame = pd.DataFrame([record.as_row() for record in records], columns=RECORD_COLUMNS)
    if n_particles is not None:
        frame["tau"] = frame["tau"] / n_particles
        frame = frame.rename(columns={"tau": "t"})
    return frame


def _nearest_existing(directory: str) -> str:
    while not os.path.exists(directory):
        parent = os.path.dirname(directory)
        if parent == directory:
            break
        directory = parent
    return directory


def check_writable(paths: Sequence[str]) -> None:
    """
    Fail fast on output targets that cannot be written.

    Raises:
        ConfigError: If a target is a directory or its nearest existing
            ancestor is not a writable directory.
    """
    for path in paths:
        path = os.path.abspath(path)
        if os.path.isdir(path):
            raise ConfigError(f"output path {path} is a directory")
        parent = _nearest_existing(os.path.dirname(path))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK | os.X_OK):
            raise ConfigError(f"output path {path} is not writable")


def render_csv(frame: pd.DataFrame) -> str:
    """CSV text with a header, ',' separator and 17 significant digits."""
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def render_json(data: Any) -> str:
    """Indented, key-sorted JSON text of a pydantic model or plain mapping."""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_outputs(outputs: Sequence[Tuple[str, str]]) -> List[str]:
    """
    Write several (path, text) targets as one unit.

    Every text goes to a temp file beside its target before any target is
    replaced. On failure the temp files and the targets already replaced are
    removed.

    Args:
        outputs: (path, text) pairs in commit order.

    Returns:
        Absolute paths of the written files.

    Raises:
        ConfigError: If a target cannot be written.
    """
    staged: List[Tuple[str, str]] = []
    committed: List[str] = []
    current = None
    try:
        for path, text in outputs:
            current = os.path.abspath(path)
            directory = os.path.dirname(current)
            os.makedirs(directory, exist_ok=True)
            handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                                                 suffix=os.path.basename(current))
            staged.append((temp_path, current))
            with os.fdopen(handle, "w", newline="", encoding="utf-8") as stream:
                stream.write(text)
        for temp_path, target in staged:
            current = target
            os.replace(temp_path, target)
            committed.append(target)
    except OSError as exc:
        for temp_path, _ in staged:
            if os.path.exists(temp_path):
                os.remove(temp_path)
        for target in committed:
            if os.path.isfile(target):
                os.remove(target)
        raise ConfigError(f"cannot write {current}: {exc}") from exc
    for target in committed:
        logger.info("Wrote %s", target)
    return committed


def write_csv(frame: pd.DataFrame, path: str) -> str:
    """Write a frame with a header, ',' separator and 17 significant digits."""
    return write_outputs([(path, render_csv(frame))])[0]


def write_json(data: Any, path: str) -> str:
    """Write a pydantic model or plain mapping as indented, key-sorted JSON."""
    return write_outputs([(path, render_json(data))])[0]


def sibling_path(path: str, suffix: str, extension: Optional[str] = None) -> str:
    """`dir/stem.csv` → `dir/stem<suffix><extension>`."""
    stem, ext = os.path.splitext(path)
    return f"{stem}{suffix}{extension if extension is not None else ext}"
