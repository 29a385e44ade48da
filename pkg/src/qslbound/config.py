"""JSON scenario configuration: parsing and validation.

Every problem is reported as a :class:`ConfigError` whose message names the
offending JSON path and, where it can be located, the line in the source file.
The accepted layout is described by ``schema/config.schema.json``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .bounds import GConvention
from .errors import ConfigError, QslError
from .evolution import DEFAULT_STEPS
from .matrix_core import (
    ConstantHamiltonian,
    DensityMatrix,
    FixedAxis,
    HamiltonianSpec,
    LZAxis,
    QubitDrive,
    TabulatedHamiltonian,
    from_bloch,
)

FIGURE_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")
DEFAULT_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 10))
DEFAULT_TAUS = (0.5, 1.0, 2.0, 5.0)


def load_schema() -> dict:
    return json.loads(resources.files("qslbound").joinpath("schema/config.schema.json").read_text())


@dataclass(frozen=True)
class VerifySettings:
    instances: int = 1000
    dims: Tuple[int, ...] = (2, 3, 4)
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    taus: Tuple[float, ...] = DEFAULT_TAUS
    steps: int = 500
    commutator_pairs: int = 10000


@dataclass(frozen=True)
class ScenarioConfig:
    state: Optional[DensityMatrix] = None
    hamiltonian: Optional[HamiltonianSpec] = None
    alphas: Optional[np.ndarray] = None
    taus: Optional[np.ndarray] = None
    steps: int = DEFAULT_STEPS
    convention: GConvention = GConvention.APPENDIX
    seed: int = 0
    workers: int = 1
    figures: Tuple[str, ...] = FIGURE_NAMES
    verify: VerifySettings = field(default_factory=VerifySettings)
    source: Dict[str, Any] = field(default_factory=dict)

    def require_scenario(self):
        missing = [k for k in ("state", "hamiltonian", "alphas", "taus") if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"this command needs the sections: {', '.join(missing)}")


class _Ctx:
    """Carries the raw text so semantic errors can point at a line."""

    def __init__(self, text: str):
        self.text = text

    def fail(self, path: str, msg: str):
        key = path.rsplit(".", 1)[-1].split("[", 1)[0]
        line = None
        if key and self.text:
            m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
            if m:
                line = self.text.count("\n", 0, m.start()) + 1
        where = f"line {line}: " if line else ""
        raise ConfigError(f"{where}{path}: {msg}")


def _num(ctx, obj, path, *, lo=None, hi=None, integer=False):
    ok = isinstance(obj, (int, float)) and not isinstance(obj, bool)
    if integer:
        ok = ok and float(obj).is_integer()
    if not ok or not np.isfinite(obj):
        ctx.fail(path, f"expected a finite {'integer' if integer else 'number'}, got {obj!r}")
    if lo is not None and obj < lo:
        ctx.fail(path, f"must be >= {lo}, got {obj}")
    if hi is not None and obj > hi:
        ctx.fail(path, f"must be <= {hi}, got {obj}")
    return int(obj) if integer else float(obj)


def _section(ctx, obj, path, allowed):
    if not isinstance(obj, dict):
        ctx.fail(path, "expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        ctx.fail(f"{path}.{extra[0]}", "unknown key")
    return obj


def _complex_matrix(ctx, obj, path):
    _section(ctx, obj, path, ("real", "imag"))
    if "real" not in obj:
        ctx.fail(path, "missing 'real'")
    try:
        re_ = np.asarray(obj["real"], dtype=float)
        im = np.asarray(obj.get("imag", np.zeros_like(re_)), dtype=float)
    except (TypeError, ValueError):
        ctx.fail(path, "entries must be numbers")
    if re_.ndim != 2 or re_.shape[0] != re_.shape[1] or im.shape != re_.shape:
        ctx.fail(path, f"expected square real/imag parts of equal shape, got {re_.shape} and {im.shape}")
    if not (np.all(np.isfinite(re_)) and np.all(np.isfinite(im))):
        ctx.fail(path, "entries must be finite")
    return re_ + 1j * im


def _grid_values(ctx, obj, path, lo=None, hi=None, open_lo=False, open_hi=False):
    if isinstance(obj, dict):
        _section(ctx, obj, path, ("linspace",))
        spec = obj.get("linspace")
        if not isinstance(spec, list) or len(spec) != 3:
            ctx.fail(path, "linspace must be [start, stop, count]")
        a = _num(ctx, spec[0], path + ".linspace[0]")
        b = _num(ctx, spec[1], path + ".linspace[1]")
        n = _num(ctx, spec[2], path + ".linspace[2]", lo=1, integer=True)
        vals = np.linspace(a, b, n)
    elif isinstance(obj, list):
        if not obj:
            ctx.fail(path, "grid must be nonempty")
        vals = np.array([_num(ctx, v, f"{path}[{i}]") for i, v in enumerate(obj)])
    else:
        ctx.fail(path, "expected a list or {\"linspace\": [start, stop, count]}")
    if lo is not None and (np.any(vals < lo) or (open_lo and np.any(vals == lo))):
        ctx.fail(path, f"values must be {'>' if open_lo else '>='} {lo}")
    if hi is not None and (np.any(vals > hi) or (open_hi and np.any(vals == hi))):
        ctx.fail(path, f"values must be {'<' if open_hi else '<='} {hi}")
    return vals


def _state(ctx, obj, path) -> DensityMatrix:
    _section(ctx, obj, path, ("bloch", "matrix"))
    if ("bloch" in obj) == ("matrix" in obj):
        ctx.fail(path, "give exactly one of 'bloch' or 'matrix'")
    try:
        if "bloch" in obj:
            b = _section(ctx, obj["bloch"], path + ".bloch", ("r", "theta", "phi"))
            for k in ("r", "theta", "phi"):
                if k not in b:
                    ctx.fail(f"{path}.bloch", f"missing '{k}'")
            return from_bloch(*(_num(ctx, b[k], f"{path}.bloch.{k}") for k in ("r", "theta", "phi")))
        return DensityMatrix.from_matrix(_complex_matrix(ctx, obj["matrix"], path + ".matrix"))
    except QslError as exc:
        if isinstance(exc, ConfigError):
            raise
        ctx.fail(path, str(exc))


def _hamiltonian(ctx, obj, path) -> HamiltonianSpec:
    if not isinstance(obj, dict) or "type" not in obj:
        ctx.fail(path, "expected an object with a 'type'")
    kind = obj["type"]
    try:
        if kind == "constant":
            _section(ctx, obj, path, ("type", "matrix"))
            return ConstantHamiltonian(_complex_matrix(ctx, obj.get("matrix"), path + ".matrix"))
        if kind == "qubit_drive":
            _section(ctx, obj, path, ("type", "varpi", "axis"))
            varpi = _num(ctx, obj.get("varpi", 0.0), path + ".varpi")
            ax = obj.get("axis")
            if not isinstance(ax, dict):
                ctx.fail(path + ".axis", "expected an object")
            if ax.get("type") == "lz":
                _section(ctx, ax, path + ".axis", ("type", "delta", "v"))
                v = _num(ctx, ax.get("v", 1.0), path + ".axis.v")
                if v == 0:
                    ctx.fail(path + ".axis.v", "sweep rate must be nonzero")
                return QubitDrive(varpi, LZAxis(_num(ctx, ax.get("delta"), path + ".axis.delta"), v))
            if ax.get("type") == "fixed":
                _section(ctx, ax, path + ".axis", ("type", "n"))
                n = ax.get("n")
                if not isinstance(n, list) or len(n) != 3:
                    ctx.fail(path + ".axis.n", "expected a 3-vector")
                return QubitDrive(varpi, FixedAxis(np.array([_num(ctx, c, path + ".axis.n") for c in n])))
            ctx.fail(path + ".axis.type", "expected 'lz' or 'fixed'")
        if kind == "tabulated":
            _section(ctx, obj, path, ("type", "times", "matrices"))
            times = obj.get("times")
            mats = obj.get("matrices")
            if not isinstance(times, list) or not isinstance(mats, list) or len(times) != len(mats) or not times:
                ctx.fail(path, "'times' and 'matrices' must be nonempty lists of equal length")
            stack = np.stack([_complex_matrix(ctx, m, f"{path}.matrices[{i}]") for i, m in enumerate(mats)])
            return TabulatedHamiltonian(np.array([_num(ctx, t, path + ".times") for t in times]), stack)
    except QslError as exc:
        if isinstance(exc, ConfigError):
            raise
        ctx.fail(path, str(exc))
    ctx.fail(path + ".type", f"unknown Hamiltonian type {kind!r}")


def _verify(ctx, obj, path) -> VerifySettings:
    _section(ctx, obj, path, ("instances", "dims", "alphas", "taus", "steps", "commutator_pairs"))
    d = VerifySettings()
    kw = {}
    if "instances" in obj:
        kw["instances"] = _num(ctx, obj["instances"], path + ".instances", lo=1, integer=True)
    if "commutator_pairs" in obj:
        kw["commutator_pairs"] = _num(ctx, obj["commutator_pairs"], path + ".commutator_pairs", lo=1, integer=True)
    if "steps" in obj:
        kw["steps"] = _num(ctx, obj["steps"], path + ".steps", lo=2, integer=True)
    if "dims" in obj:
        if not isinstance(obj["dims"], list) or not obj["dims"]:
            ctx.fail(path + ".dims", "expected a nonempty list")
        kw["dims"] = tuple(_num(ctx, x, path + ".dims", lo=2, hi=8, integer=True) for x in obj["dims"])
    if "alphas" in obj:
        kw["alphas"] = tuple(_grid_values(ctx, obj["alphas"], path + ".alphas", 0, 1, True, True))
    if "taus" in obj:
        kw["taus"] = tuple(_grid_values(ctx, obj["taus"], path + ".taus", 0, None, True))
    return VerifySettings(**{**d.__dict__, **kw})


def parse_config(data: Dict[str, Any], text: str = "") -> ScenarioConfig:
    ctx = _Ctx(text)
    _section(ctx, data, "$", ("state", "hamiltonian", "grid", "seed", "workers", "figures", "verify", "description"))
    kw: Dict[str, Any] = {"source": data}
    if "state" in data:
        kw["state"] = _state(ctx, data["state"], "state")
    if "hamiltonian" in data:
        kw["hamiltonian"] = _hamiltonian(ctx, data["hamiltonian"], "hamiltonian")
    if "state" in kw and "hamiltonian" in kw and kw["state"].dim != kw["hamiltonian"].dim:
        ctx.fail("hamiltonian", f"dimension {kw['hamiltonian'].dim} does not match the state ({kw['state'].dim})")
    if "grid" in data:
        g = _section(ctx, data["grid"], "grid", ("alpha", "tau", "steps", "convention"))
        for k in ("alpha", "tau"):
            if k not in g:
                ctx.fail("grid", f"missing '{k}'")
        kw["alphas"] = _grid_values(ctx, g["alpha"], "grid.alpha", 0, 1, True, True)
        kw["taus"] = _grid_values(ctx, g["tau"], "grid.tau", 0)
        if "steps" in g:
            kw["steps"] = _num(ctx, g["steps"], "grid.steps", lo=2, integer=True)
            if kw["steps"] % 2:
                ctx.fail("grid.steps", "Simpson quadrature needs an even step count")
        if "convention" in g:
            try:
                kw["convention"] = GConvention.parse(g["convention"])
            except ValueError:
                ctx.fail("grid.convention", "expected 'appendix' or 'maintext'")
    if "seed" in data:
        kw["seed"] = _num(ctx, data["seed"], "seed", lo=0, integer=True)
    if "workers" in data:
        kw["workers"] = _num(ctx, data["workers"], "workers", lo=1, integer=True)
    if "figures" in data:
        f = data["figures"]
        if not isinstance(f, list) or not f or any(x not in FIGURE_NAMES for x in f):
            ctx.fail("figures", f"expected a nonempty list drawn from {list(FIGURE_NAMES)}")
        kw["figures"] = tuple(f)
    if "verify" in data:
        kw["verify"] = _verify(ctx, data["verify"], "verify")
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, text)
