"""
Deterministic result files.

Every file carries the schema version and the resolved config: JSON files
as top-level keys, CSV files as leading ``#`` comment lines.
"""
import csv
import io
import json
import math
from pathlib import Path

import numpy as np
from django.conf import settings


def plain(value):
    """Convert numpy scalars and arrays to JSON-safe Python values; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def output_directory(command, override=None):
    """``override`` if given, else ``LAB_OUTPUT_DIR/<command>``; created if missing."""
    path = Path(override) if override else Path(settings.LAB_OUTPUT_DIR) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def dumps(payload, config):
    document = {
        'schema_version': settings.LAB_SCHEMA_VERSION,
        'config': plain(config),
        'result': plain(payload),
    }
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(path, payload, config):
    path = Path(path)
    path.write_text(dumps(payload, config))
    return path


def _cell(value):
    value = plain(value)
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path, columns, rows, config):
    """
    Write a CSV table preceded by ``# schema_version=`` and ``# config=`` lines.
    """
    buffer = io.StringIO()
    buffer.write(f"# schema_version={settings.LAB_SCHEMA_VERSION}\n")
    buffer.write(f"# config={json.dumps(plain(config), sort_keys=True, allow_nan=False)}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    path = Path(path)
    path.write_text(buffer.getvalue())
    return path


def read_csv(path):
    """Rows of a file written by :func:`write_csv` as dicts of strings, comments skipped."""
    lines = [line for line in Path(path).read_text().splitlines() if not line.startswith('#')]
    return list(csv.DictReader(lines))
