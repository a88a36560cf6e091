"""Delimited-text signal files in, prediction tables and summaries out.

Accepted input layouts:

* single column of values;
* two columns, time then value;
* any number of columns with ``channel`` naming the one to read (by 0-based
  position or by header name).

Fields are separated by commas or by whitespace (detected from the first data
line); the decimal separator is always ``.``. Lines starting with ``#`` are
comments, and a ``# rate_hz=<value>`` comment supplies the sampling rate. Non-
numeric lines before the first data line are headers; the first of them names
the columns.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import Series
from .errors import DataError
from .forecast import ForecastResult, rolling_mse

log = logging.getLogger(__name__)

RESULT_HEADER = ("index", "time_s", "truth", "predicted", "sq_error")
_RATE_RE = re.compile(r"rate_hz\s*=\s*([^\s,;]+)")


@dataclass(frozen=True)
class SignalFile:
    path: Path
    sampling_rate_hz: float | None = None
    channel: int | str | None = None
    fallback_rate_hz: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))


@dataclass
class LoadInfo:
    path: str
    format: str = "single-column"
    delimiter: str = "comma"
    column: int = 0
    columns: list[str] = field(default_factory=list)
    rate_hz: float = math.nan
    rate_source: str = ""
    n_samples: int = 0


def _split(line: str, delim: str) -> list[str]:
    if delim == "comma":
        return [f.strip() for f in line.split(",")]
    return line.split()


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def read_signal(file: SignalFile | str | Path, **kwargs) -> tuple[Series, LoadInfo]:
    """Load a signal file and report how it was interpreted."""
    if not isinstance(file, SignalFile):
        file = SignalFile(file, **kwargs)
    path = file.path
    info = LoadInfo(path=str(path))
    header_rate = None
    names: list[str] | None = None
    delim = None
    rows: list[list[float]] = []
    width = None
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open signal file {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _RATE_RE.search(line)
                if m:
                    header_rate = _parse_float(m.group(1))
                    if header_rate is None:
                        raise DataError(f"{path}:{lineno}: bad rate_hz value {m.group(1)!r}")
                continue
            if delim is None:
                delim = "comma" if "," in line else "whitespace"
            fields = _split(line, delim)
            nums = [_parse_float(f) for f in fields]
            if any(v is None for v in nums):
                if rows:
                    raise DataError(f"{path}:{lineno}: cannot parse {line!r} as numbers")
                if names is None:
                    names = [f.strip("'\"") for f in fields]
                continue
            if width is None:
                width = len(nums)
            elif len(nums) != width:
                raise DataError(f"{path}:{lineno}: expected {width} fields, found {len(nums)}")
            rows.append(nums)
    if not rows:
        raise DataError(f"{path}: no data rows")

    data = np.array(rows, dtype=np.float64)
    info.delimiter = delim
    info.columns = names or []
    column = _resolve_column(file.channel, width, names, path)
    info.column = column
    info.format = "single-column" if width == 1 else ("time-value" if width == 2 else "multi-column")
    values = data[:, column]
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"{path}: non-finite value in data row {int(bad[0]) + 1}")

    rate, source = _resolve_rate(file, header_rate, data if width >= 2 and column != 0 else None)
    if rate is None:
        raise DataError(f"{path}: sampling rate unknown; add a '# rate_hz=<value>' line or pass a rate")
    info.rate_hz, info.rate_source, info.n_samples = rate, source, values.size
    log.info("loaded %d samples from %s (%s, %s-delimited, rate %g Hz from %s)",
             values.size, path, info.format, delim, rate, source)
    return Series(values, dt=1.0 / rate, name=path.stem), info


def load_series(file: SignalFile | str | Path, **kwargs) -> Series:
    return read_signal(file, **kwargs)[0]


def _resolve_column(channel, width: int, names: list[str] | None, path: Path) -> int:
    if channel is None:
        if width <= 2:
            return width - 1
        raise DataError(f"{path}: {width} columns present; choose one with a channel selector")
    if isinstance(channel, str) and not channel.lstrip("-").isdigit():
        if not names or channel not in names:
            raise DataError(f"{path}: no column named {channel!r} (columns: {names or 'unnamed'})")
        return names.index(channel)
    idx = int(channel)
    if not 0 <= idx < width:
        raise DataError(f"{path}: column {idx} out of range for {width} columns")
    return idx


def _resolve_rate(file: SignalFile, header_rate, data):
    if file.sampling_rate_hz is not None:
        if header_rate is not None and header_rate != file.sampling_rate_hz:
            log.warning("%s: rate override %g Hz replaces header value %g Hz",
                        file.path, file.sampling_rate_hz, header_rate)
        rate, source = float(file.sampling_rate_hz), "override"
    elif header_rate is not None:
        rate, source = header_rate, "header"
    elif data is not None and data.shape[0] >= 2 and _uniform(data[:, 0]):
        rate, source = 1.0 / float(np.mean(np.diff(data[:, 0]))), "time-column"
    elif file.fallback_rate_hz is not None:
        rate, source = float(file.fallback_rate_hz), "default"
    else:
        return None, ""
    if not (math.isfinite(rate) and rate > 0):
        raise DataError(f"{file.path}: sampling rate must be > 0, got {rate}")
    return rate, source


def _uniform(t: np.ndarray) -> bool:
    step = np.diff(t)
    return bool(step[0] > 0 and np.allclose(step, step[0], rtol=1e-6, atol=0))


def write_series(series: Series, path, precision: int = 12) -> Path:
    """Single-column export with a ``# rate_hz`` header, readable by :func:`load_series`."""
    path = Path(path)
    _mkparent(path)
    lines = [f"# rate_hz={1.0 / series.dt!r}", f"# name={series.name}"]
    lines += [f"{v:.{precision}f}" for v in series.values]
    _write_text(path, "\n".join(lines) + "\n")
    return path


def write_result(result: ForecastResult, path, precision: int = 9, extra: dict | None = None) -> tuple[Path, Path]:
    """Write the prediction table and its ``.summary.json`` companion.

    Times, truth and predictions use ``precision`` fixed decimals; squared
    errors use ``precision`` significant digits in exponent form so that small
    errors stay visible. Returns ``(table_path, summary_path)``.
    """
    path = Path(path)
    _mkparent(path)
    p = precision
    out = [",".join(RESULT_HEADER)]
    for idx, truth, pred, sq in zip(result.target_indices, result.aligned_truth,
                                    result.predicted, result.pointwise_sq_error):
        out.append(f"{idx},{idx * result.dt:.{p}f},{truth:.{p}f},{pred:.{p}f},{sq:.{p}e}")
    _write_text(path, "\n".join(out) + "\n")

    summary = {
        "m_p": result.m_p,
        "n_scored": result.n_scored,
        "mse": result.mse,
        "dt": result.dt,
        "forecast": result.config,
        "precision": precision,
    }
    if extra:
        summary.update(extra)
    summary_path = path.with_suffix(".summary.json")
    write_json(summary_path, summary)
    return path, summary_path


def write_rolling_mse(result: ForecastResult, path, window: int, precision: int = 9) -> Path:
    """Rolling-MSE trace over the scored predictions; time is that of each window's last point."""
    path = Path(path)
    _mkparent(path)
    truth, pred = result.scored()
    idx = result.target_indices[np.isfinite(result.aligned_truth)]
    window = max(1, min(window, truth.size))
    trace = rolling_mse(truth, pred, window)
    ends = idx[window - 1:]
    out = ["index,time_s,rolling_mse"]
    out += [f"{i},{i * result.dt:.{precision}f},{v:.{precision}e}" for i, v in zip(ends, trace)]
    _write_text(path, "\n".join(out) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    _mkparent(path)
    _write_text(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def _mkparent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create directory for {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
