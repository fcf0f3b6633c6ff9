"""JSON / CSV formats for step functions, pairs, grid candidates and run outputs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bellman import BellmanCandidate, grid_candidate
from .haar import StepFunction
from .lattice import LatticeSpec
from .lemma import AdmissiblePair, NodeFunctional


class FormatError(ValueError):
    pass


def step_function_to_dict(f: StepFunction) -> dict:
    return {"dim": f.spec.dim, "depth": f.spec.depth, "values": f.values.tolist()}


def step_function_from_dict(d: dict) -> StepFunction:
    try:
        spec = LatticeSpec(int(d["dim"]), int(d["depth"]))
        return StepFunction(spec, d["values"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad step function: {e}") from e


def load_step_function(path) -> StepFunction:
    """Read a step function from JSON, or from CSV with one value per line (dim 1)."""
    path = Path(path)
    text = _read(path)
    if path.suffix.lower() == ".csv":
        try:
            vals = [float(row[0]) for row in csv.reader(text.splitlines()) if row and row[0].strip()]
            return StepFunction.from_values(vals)
        except (ValueError, IndexError) as e:
            raise FormatError(f"{path}: {e}") from e
    return step_function_from_dict(_parse(text, path))


def pair_to_dict(pair: AdmissiblePair) -> dict:
    return {
        "dim": pair.spec.dim,
        "depth": pair.spec.depth,
        "S": pair.S.to_lists(),
        "M": pair.M.to_lists(),
        "mbar": pair.mbar,
    }


def pair_from_dict(d: dict, tol: float = 1e-12) -> AdmissiblePair:
    """Build (and validate) a pair from its JSON form.  Raises InadmissibleError."""
    try:
        spec = LatticeSpec(int(d["dim"]), int(d["depth"]))
        S = NodeFunctional(spec, tuple(d["S"]))
        M = NodeFunctional(spec, tuple(d["M"]))
        mbar = d.get("mbar")
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad admissible pair: {e}") from e
    return AdmissiblePair(S, M, None if mbar is None else float(mbar), tol)


def load_pair(path, tol: float = 1e-12) -> AdmissiblePair:
    path = Path(path)
    return pair_from_dict(_parse(_read(path), path), tol)


def load_function_pair(path) -> tuple[StepFunction, StepFunction]:
    """``{"f": <step function>, "phi": <step function>}``."""
    path = Path(path)
    d = _parse(_read(path), path)
    try:
        return step_function_from_dict(d["f"]), step_function_from_dict(d["phi"])
    except KeyError as e:
        raise FormatError(f"{path}: missing key {e}") from e


def load_grid_candidate(path) -> BellmanCandidate:
    path = Path(path)
    d = _parse(_read(path), path)
    try:
        return grid_candidate(float(d["mbar"]), d["x"], d["y"], d["values"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: bad grid candidate ({e})") from e


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from e


def _parse(text: str, path: Path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e


@dataclass
class RunManifest:
    """Embedded in every output file; identical manifests give identical numbers.

    ``wall_clock_seconds`` stays ``None`` unless timing is requested, so that
    repeated runs produce byte-identical files.
    """

    command: str
    config: dict
    seed: int | None = None
    version: str = __version__
    outcome: dict = field(default_factory=dict)
    wall_clock_seconds: float | None = None


def _clean(obj):
    """Make an object JSON-safe: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload: dict, manifest: RunManifest | None = None) -> str:
    # floats are written with repr(), the shortest string that round-trips exactly
    body = dict(payload)
    if manifest is not None:
        body = {"manifest": asdict(manifest), **body}
    return json.dumps(_clean(body), indent=2, allow_nan=False) + "\n"


def write_json(path, payload: dict, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload, manifest))
    return path


def write_csv(path, header: list[str], rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return path
