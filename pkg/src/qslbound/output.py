"""CSV tables with a JSON metadata sidecar."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .bounds import DRIVE_TOL, PHI_GUARD, VALIDITY_TOL
from .entropy import PURITY_TOL
from .evolution import SIMPSON
from .matrix_core import HERMITIAN_TOL, NEGATIVE_EIG_TOL, RANK_TOL, TRACE_TOL

SIG_DIGITS = 12

TOLERANCES = {
    "hermitian": HERMITIAN_TOL,
    "trace": TRACE_TOL,
    "negative_eigenvalue": NEGATIVE_EIG_TOL,
    "rank": RANK_TOL,
    "purity": PURITY_TOL,
    "phi_guard": PHI_GUARD,
    "drive": DRIVE_TOL,
    "validity": VALIDITY_TOL,
}


def fmt(x) -> str:
    """12 significant digits; integers and strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def rounded(x: float) -> float:
    """The value a reader recovers from :func:`fmt`."""
    return float(fmt(x))


def exact_difference(a: float, b: float) -> str:
    """``a - b`` of the *printed* values, written so it round-trips exactly."""
    d = rounded(a) - rounded(b)
    return "nan" if math.isnan(d) else repr(d)


def metadata(command: str, *, convention, steps, extra: Mapping | None = None) -> dict:
    meta = {
        "command": command,
        "convention": None if convention is None else str(getattr(convention, "value", convention)),
        "steps": steps,
        "quadrature": SIMPSON,
        "tolerances": TOLERANCES,
        "significant_digits": SIG_DIGITS,
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], meta: Mapping) -> Path:
    """Write ``path`` (CSV, UTF-8, header row) and ``path`` with ``.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            n += 1
    side = path.with_suffix(".meta.json")
    body = dict(meta, columns=list(header), rows=n, file=path.name)
    side.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    return path


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, set):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
