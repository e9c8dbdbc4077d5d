"""File formats: signal ingest, result export and flat key=value run configs.

Numbers are written with 17 significant digits so a CSV round trip
reproduces every double exactly.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import InputError, ShapeMismatch
from .model import DecompositionResult, SignalEnsemble, ingest
from .spectral import TWO_PI


class ConfigError(InputError):
    pass


def fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.17g}"


def _parse_cell(cell: str, row: int, col: int) -> float:
    cell = cell.strip()
    if cell == "" or cell.lower() in ("nan", "na", "null"):
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise ShapeMismatch(f"row {row}, column {col}: not a number: {cell!r}") from None


def read_signals(path, *, center: bool = True) -> SignalEnsemble:
    """Load an ensemble from CSV or JSON.

    CSV: first column is time, every further column one signal; an optional
    header row is skipped; empty or ``nan`` cells are missing samples.
    JSON: an object with ``times``, ``signals`` (list of rows) and an
    optional boolean ``mask`` of the same shape.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file {path} does not exist")
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ShapeMismatch(f"invalid JSON: {exc}") from None
        if not isinstance(doc, dict) or "times" not in doc or "signals" not in doc:
            raise ShapeMismatch("JSON input needs 'times' and 'signals'")
        values = [[math.nan if v is None else v for v in row] for row in doc["signals"]]
        return ingest(doc["times"], values, doc.get("mask"), center=center)

    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not _numeric(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise ShapeMismatch(f"row 0: input file {path.name} has no data rows")
    width = len(rows[0])
    if width < 2:
        raise ShapeMismatch("row 0: need a time column and at least one signal column")
    table = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ShapeMismatch(f"row {i}: expected {width} columns, found {len(row)}")
        table.append([_parse_cell(c, i, j) for j, c in enumerate(row)])
    data = np.array(table)
    if np.isnan(data[:, 0]).any():
        raise ShapeMismatch(f"row {int(np.argmax(np.isnan(data[:, 0])))}: missing time value")
    return ingest(data[:, 0], data[:, 1:].T, center=center)


def _numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def write_signals(path, ensemble: SignalEnsemble) -> None:
    """CSV with physical time and one column per signal (offsets restored)."""
    values = ensemble.values + ensemble.offsets[:, None]
    header = ["t"] + [f"signal_{j + 1}" for j in range(ensemble.n_signals)]
    columns = [ensemble.physical_times] + list(values)
    write_columns(path, header, columns)


def write_columns(path, header, columns) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(float(v)) for v in row])


def _read_columns(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(c) for c in row] for row in reader])
    return {name: data[:, i] for i, name in enumerate(header)}


def write_components(path, result: DecompositionResult, ensemble: SignalEnsemble) -> None:
    """Per component: phase, IF in Hz and rad/s, and both envelopes per signal.

    A harmonic component reports the phase ``n * theta`` and its frequency.
    """
    header = ["t"]
    columns = [ensemble.physical_times]
    for k, comp in enumerate(result.components, start=1):
        omega = comp.harmonic * comp.phase.frequency() / ensemble.duration
        header += [f"theta_{k}", f"if_hz_{k}", f"omega_{k}"]
        columns += [comp.harmonic * comp.phase.theta, omega / TWO_PI, omega]
        for j in range(comp.envelopes_a.shape[0]):
            header += [f"a_{k}_{j + 1}", f"b_{k}_{j + 1}"]
            columns += [comp.envelopes_a[j], comp.envelopes_b[j]]
    write_columns(path, header, columns)


def read_components(path) -> list[dict[str, np.ndarray]]:
    """Inverse of :func:`write_components`: one dict per component.

    Each dict has ``t``, ``theta``, ``if_hz``, ``omega`` and ``(M, N)``
    arrays ``a`` and ``b``.
    """
    cols = _read_columns(path)
    out = []
    k = 1
    while f"theta_{k}" in cols:
        a, b, j = [], [], 1
        while f"a_{k}_{j}" in cols:
            a.append(cols[f"a_{k}_{j}"])
            b.append(cols[f"b_{k}_{j}"])
            j += 1
        out.append({
            "t": cols["t"],
            "theta": cols[f"theta_{k}"],
            "if_hz": cols[f"if_hz_{k}"],
            "omega": cols[f"omega_{k}"],
            "a": np.array(a),
            "b": np.array(b),
        })
        k += 1
    return out


def write_residuals(path, result: DecompositionResult, ensemble: SignalEnsemble) -> None:
    header = ["t"] + [f"r_{j + 1}" for j in range(result.residuals.shape[0])]
    write_columns(path, header, [ensemble.physical_times] + list(result.residuals))


def write_outliers(path, result: DecompositionResult, ensemble: SignalEnsemble) -> bool:
    """Sample-domain outliers per component, if the robust solver produced any."""
    header, columns = ["t"], [ensemble.physical_times]
    for k, record in enumerate(result.diagnostics, start=1):
        z = record.get("outliers")
        if z is None:
            continue
        for j, row in enumerate(np.atleast_2d(z), start=1):
            header.append(f"z_{k}_{j}")
            columns.append(row)
    if len(header) == 1:
        return False
    write_columns(path, header, columns)
    return True


def write_tension(path, times, omega, tension) -> None:
    omega = np.asarray(omega)
    write_columns(path, ["t", "omega", "f_hz", "tension"], [times, omega, omega / TWO_PI, tension])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if not isinstance(v, np.ndarray)}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def error_document(exc: BaseException) -> dict:
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": getattr(exc, "exit_code", 1),
    }


@dataclass
class RunConfig:
    """Settings of one command-line run; every field can be set in the config file.

    Exactly one of ``input`` and ``generator`` is used by ``decompose`` and
    ``cable``: a given input file wins, otherwise the generator runs.
    """

    input: str | None = None
    generator: str | None = None
    output: str = "out"
    mode: str = "nonperiodic"
    seed: int = 0
    # driver
    max_components: int = 8
    tol: float = 1e-2
    min_energy_reduction: float = 1e-3
    guess: str = "periodogram"
    center: bool = True
    # gauss-newton
    lam: float = 0.5
    epsilon_0: float | None = None
    eta_step: float | None = None
    max_inner_iters: int = 100
    gamma_floor: float = 1e-8
    # alm
    alm_gamma: float = 1.0
    alm_tol: float = 1e-3
    alm_max_iters: int = 500
    # generators
    n_samples: int | None = None
    m_signals: int | None = None
    noise_scale: float | None = None
    # cable
    mass_density: float = 80.0
    length: float = 100.0
    modes: str = "1,2,3,4,5"

    def cable_modes(self) -> tuple[int, ...]:
        try:
            return tuple(int(m) for m in str(self.modes).replace(" ", "").split(",") if m)
        except ValueError:
            raise ConfigError(f"modes must be a comma-separated list of integers, got {self.modes!r}") from None


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str, annotation: str):
    raw = raw.strip()
    optional = "None" in annotation
    if optional and raw.lower() in ("", "none", "null"):
        return None
    try:
        if annotation.startswith("int"):
            return int(raw)
        if annotation.startswith("float"):
            return float(raw)
        if annotation.startswith("bool"):
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {annotation}") from None
    return raw


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file (``#`` comments) into RunConfig overrides."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + path.read_text())
    except configparser.Error as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    known = {f.name: str(f.type) for f in fields(RunConfig)}
    out = {}
    for key, raw in parser["run"].items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _coerce(key, raw, known[key])
    return out
