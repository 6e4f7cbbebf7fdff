"""
Table output: CSV with a '#'-prefixed JSON metadata header, or JSON.

Files carry the resolved parameter set and no timestamps, so identical runs
produce byte-identical files.
"""

import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from errors import ConfigError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
FLOAT_FORMAT = "%.17g"


def _plain(value):
    """JSON-friendly copy of numpy scalars and arrays"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def metadata_line(meta: Dict) -> str:
    return "#" + json.dumps(_plain(meta), sort_keys=True)


def export_to_csv(df: pd.DataFrame, meta: Optional[Dict] = None) -> str:
    """Export DataFrame to CSV string with a metadata header"""
    output = io.StringIO()
    if meta is not None:
        output.write(metadata_line(meta) + "\n")
    df.to_csv(output, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return output.getvalue()


def export_to_json(df: pd.DataFrame, meta: Optional[Dict] = None) -> str:
    columns = {}
    for name in df.columns:
        values = _plain(df[name].tolist())
        columns[str(name)] = [None if isinstance(v, float) and math.isnan(v) else v for v in values]
    return json.dumps({"meta": _plain(meta or {}), "columns": list(columns), "data": columns},
                      sort_keys=True, indent=2) + "\n"


def write_table(df: pd.DataFrame, meta: Dict, path: Optional[str] = None, fmt: str = "csv") -> str:
    """
    Serialize df with its metadata and write it to path (stdout when path is
    None or '-'). Returns the serialized text.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)} (got {fmt!r})")
    text = export_to_csv(df, meta) if fmt == "csv" else export_to_json(df, meta)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        logger.info("✅ Wrote %d rows to %s", len(df), target)
    return text


def read_table(path: str) -> Tuple[Dict, pd.DataFrame]:
    """Read back a table written by write_table"""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        data = payload["data"]
        return payload["meta"], pd.DataFrame({name: data[name] for name in payload["columns"]})
    lines = text.splitlines(keepends=True)
    header = [line for line in lines if line.startswith("#")]
    meta = {}
    for line in header:
        meta.update(json.loads(line[1:]))
    return meta, pd.read_csv(io.StringIO("".join(lines[len(header):])), float_precision="round_trip")
