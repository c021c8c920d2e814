"""Deterministic, atomic file output: CSV with 12 significant digits, stable JSON."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__


def fmt(x) -> str:
    return "%.12g" % x


def csv_text(header, rows, preamble: dict | None = None) -> str:
    """Header row plus rows; ``preamble`` entries become leading ``# key: value`` lines."""
    lines = []
    for key, value in (preamble or {}).items():
        lines.append(f"# {key}: {json.dumps(value, separators=(',', ':'))}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def matrix_csv(x: np.ndarray, prefix: str, preamble: dict | None = None) -> str:
    header = [f"{prefix}_{j}" for j in range(x.shape[1])]
    return csv_text(header, x.tolist(), preamble)


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def provenance(cal, **extra) -> dict:
    return {"tool": "idp-lab", "version": __version__, "calibration": cal.as_dict(), **extra}


def atomic_write(path: Path, text: str):
    """Write-then-rename so that readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_all(directory: Path, files: dict[str, str]):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        atomic_write(directory / name, files[name])
