"""CSV and manifest I/O.

Floats are written with ``repr`` so every value round-trips exactly, with a
'.' decimal separator regardless of locale.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidDataError
from .levy_sim import IncrementSeries, JumpSet

JUMP_HEADER = ("time", "size")
INCREMENT_HEADER = ("k", "t", "increment")
ESTIMATE_HEADER = ("x_left", "x_right", "coeff", "value_at_mid")
SELECTION_HEADER = ("m", "d_m", "D_m", "contrast", "penalty", "score", "chosen")
OVERLAY_HEADER = ("x", "estimate", "truth")
RISK_HEADER = ("m", "bias_sq", "var_analytic", "var_mc", "risk_mc", "risk_se")
RATE_HEADER = ("T", "risk_mc", "risk_se")
MANIFEST_NAME = "manifest.json"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else repr(v)
    return str(value)


def write_csv(path, header, rows, comments=()):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """(header, rows) with '#' comment lines skipped."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    except OSError as exc:
        raise InvalidDataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise InvalidDataError(f"{path} is empty")
    reader = csv.reader(lines)
    header = tuple(h.strip() for h in next(reader))
    return header, [row for row in reader]


def _float_columns(path, rows, ncol):
    try:
        arr = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(-1, ncol)
    except ValueError as exc:
        raise InvalidDataError(f"{path}: malformed row ({exc})") from exc
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{path}: non-finite values")
    return arr


def write_jumps(path, jumps: JumpSet):
    return write_csv(path, JUMP_HEADER, zip(jumps.times.tolist(), jumps.sizes.tolist()))


def write_increments(path, inc: IncrementSeries):
    k = np.arange(1, inc.n + 1)
    return write_csv(path, INCREMENT_HEADER, zip(k.tolist(), inc.times.tolist(), inc.increments.tolist()))


def read_jumps(path, horizon: float) -> JumpSet:
    header, rows = read_csv(path)
    if header != JUMP_HEADER:
        raise InvalidDataError(f"{path}: expected header {','.join(JUMP_HEADER)}, got {','.join(header)}")
    arr = _float_columns(path, rows, 2)
    try:
        return JumpSet(horizon, arr[:, 0], arr[:, 1])
    except ValueError as exc:
        raise InvalidDataError(f"{path}: {exc}") from exc


def read_increments(path, dt: float | None = None) -> IncrementSeries:
    """Increments CSV; the horizon is n * dt, with dt read from the t column
    unless declared."""
    header, rows = read_csv(path)
    if header != INCREMENT_HEADER:
        raise InvalidDataError(f"{path}: expected header {','.join(INCREMENT_HEADER)}, got {','.join(header)}")
    arr = _float_columns(path, rows, 3)
    n = arr.shape[0]
    if n == 0:
        raise InvalidDataError(f"{path}: no increments")
    if not np.array_equal(arr[:, 0], np.arange(1, n + 1)):
        raise InvalidDataError(f"{path}: k must run 1..n in order")
    if dt is None:
        horizon = float(arr[-1, 1])
        if not horizon > 0 or np.max(np.abs(arr[:, 1] - horizon * arr[:, 0] / n)) > 1e-9 * horizon:
            raise InvalidDataError(f"{path}: t column is not an equally spaced grid t_k = k*dt")
    else:
        horizon = float(dt) * n
    return IncrementSeries(horizon, arr[:, 2])


def sniff(path) -> str:
    """'jumps' or 'increments' from the CSV header."""
    header, _ = read_csv(path)
    if header == JUMP_HEADER:
        return "jumps"
    if header == INCREMENT_HEADER:
        return "increments"
    raise InvalidDataError(f"{path}: unrecognised header {','.join(header)}")


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    outputs: dict = field(default_factory=dict)
    version: str = __version__
    wall_clock: float = 0.0
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, path):
        self.outputs[Path(path).name] = sha256(path)

    def write(self, directory):
        path = Path(directory) / MANIFEST_NAME
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "outputs": dict(sorted(self.outputs.items())),
            "wall_clock_seconds": self.wall_clock,
            "notes": self.notes,
        }
        if self.extra:
            payload["extra"] = self.extra
        path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
        return path


def read_manifest(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidDataError(f"cannot read manifest {path}: {exc}") from exc


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
