"""CSV interchange, key = value config files and atomic file writes.

Measurements are CSV files with the header columns ``time,accel,omega``
(seconds, arbitrary units, rad/s).  Sampling must be uniform; the sampling
rate is inferred from the time column.  Numbers are written with 17
significant digits so files round-trip exactly and repeat byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, Ges2nError, SchemaError
from .signal_model import VibrationRecord
from .vs_spectrum import SesResult

REQUIRED_COLUMNS = ("time", "accel", "omega")
MAX_JITTER = 1e-9
FLOAT_FORMAT = "%.17g"


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temporary file beside ``path``, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(header, columns) -> str:
    columns = [np.asarray(c, dtype=np.float64) for c in columns]
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns), fmt=FLOAT_FORMAT, delimiter=",",
               header=",".join(header), comments="")
    return buf.getvalue()


def write_table(path, header, columns) -> None:
    atomic_write_text(path, format_table(header, columns))


def write_json(path, payload: dict) -> None:
    """Sorted keys, fixed indentation; non-finite floats become ``null``."""

    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (float, np.floating)):
            return float(v) if math.isfinite(v) else None
        if isinstance(v, np.integer):
            return int(v)
        return v

    atomic_write_text(path, json.dumps(clean(payload), indent=2, sort_keys=True) + "\n")


def _read_columns(path) -> tuple[list, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (UnicodeDecodeError, csv.Error) as exc:
        raise SchemaError(f"{path}: not a readable CSV file ({exc})") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise SchemaError(f"{path}: file is empty")
    header = [c.strip().lower() for c in rows[0]]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from exc
    if len(rows) > 1 and (data.ndim != 2 or data.shape[1] != len(header)):
        raise SchemaError(f"{path}: rows do not all have {len(header)} fields")
    return header, data.reshape(-1, len(header))


def infer_sampling_rate(time) -> float:
    """Sampling rate of a uniform time column; rejects jitter above 1e-9 relative."""
    t = np.asarray(time, dtype=np.float64)
    if len(t) < 2:
        raise SchemaError("at least two samples are needed to infer the sampling rate")
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if not dt > 0:
        raise SchemaError("time must increase")
    jitter = float(np.max(np.abs(np.diff(t) - dt)))
    if jitter > MAX_JITTER * dt:
        raise SchemaError(f"sampling is not uniform (max jitter {jitter / dt:.3g} of the step)")
    fs = 1.0 / dt
    nearest = round(fs)
    if nearest > 0 and abs(fs - nearest) <= MAX_JITTER * fs:
        fs = float(nearest)
    return fs


def read_record(path) -> VibrationRecord:
    header, data = _read_columns(path)
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}; "
                          f"expected header {','.join(REQUIRED_COLUMNS)}")
    cols = {name: data[:, header.index(name)] for name in REQUIRED_COLUMNS}
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: non-finite values")
    fs = infer_sampling_rate(cols["time"])
    try:
        return VibrationRecord(cols["accel"], fs, cols["omega"])
    except Ges2nError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def write_record(path, record: VibrationRecord) -> None:
    t = np.arange(len(record.x)) / record.fs
    write_table(path, REQUIRED_COLUMNS, [t, record.x, record.omega])


def write_ses(path, ses: SesResult) -> None:
    write_table(path, ("alpha", "b"), [ses.grid.alpha, ses.b])


def read_ses(path) -> SesResult:
    header, data = _read_columns(path)
    if header[:2] != ["alpha", "b"]:
        raise SchemaError(f"{path}: expected header alpha,b")
    try:
        return SesResult.from_amplitudes(data[:, 0], data[:, 1])
    except Ges2nError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def parse_key_values(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines.  ``#`` starts a comment; hyphens in keys become underscores."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read_key_values(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    return parse_key_values(text, str(path))


_PARSERS = {"float": float, "int": int, "str": str}


def dataclass_from_strings(cls, values: dict, what: str = "config"):
    """Build ``cls`` from string values, converting by each field's annotation.

    Optional fields accept ``none`` (any case) for ``None``.
    """
    known = {f.name: f for f in fields(cls) if f.init}
    kwargs = {}
    for key, raw in values.items():
        name = key.replace("-", "_")
        if name not in known:
            raise ConfigError(f"unknown {what} key {key!r}")
        kind = str(known[name].type).replace(" ", "")
        optional = kind.endswith("|None")
        base = kind.removesuffix("|None")
        if raw is None or (optional and isinstance(raw, str) and raw.lower() == "none"):
            if not optional:
                raise ConfigError(f"{key} may not be none")
            kwargs[name] = None
            continue
        parse = _PARSERS.get(base)
        if parse is None:
            raise ConfigError(f"{what} key {key!r} cannot be set from text")
        try:
            kwargs[name] = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return cls(**kwargs)
