"""Artifact writers: CSV points, JSON documents, all-or-nothing file commits."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

POINT_COLUMNS = ("label", "std_return", "mean_return", "se_std", "se_mean", "sharpe")


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2) + "\n"


def points_csv(points, risk_free_return: float) -> str:
    from .region import point_sharpe

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POINT_COLUMNS)
    for p in points:
        s, _ = point_sharpe(p, risk_free_return)
        w.writerow([p.label, repr(p.std_return), repr(p.mean_return), repr(p.se_std),
                    repr(p.se_mean), repr(s)])
    return buf.getvalue()


def samples_csv(values, header: str = "terminal_wealth") -> str:
    return header + "\n" + "".join(f"{float(v)!r}\n" for v in values)


def commit(files: dict, out_dir) -> list[Path]:
    """Write every file to a temporary name, then rename them all into place.

    Nothing is renamed until every temporary write succeeded.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]
