"""
Reading and writing run files.

Inputs are JSON sequence files (schemas.SequenceFile); outputs are CSV files
with a header row and JSON reports. Floats are written with repr(), the
shortest string that reads back to the same double.
"""

import csv
import hashlib
import json
import os
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from src.dynamics.system import Trajectory
from src.lattice.sequences import ComplexSequence
from src.schemas.schemas import SequenceFile

from . import config


class SequenceFileError(ValueError):
    """Raised for unreadable sequence files; `code` tells the cases apart."""

    def __init__(self, message: str, code: str):
        super().__init__(message)
        self.code = code


def parse_sequence(path: str, K: Optional[int] = None) -> ComplexSequence:
    """
    Loads a SequenceFile.

    Args:
        path: JSON file {"offset": int, "values": [[re, im], ...]}.
        K: When given, the support must lie in [-K, K].

    Raises:
        SequenceFileError: code "malformed_json", "non_finite" or "support_overflow".
    """
    with open(path, 'r') as f:
        text = f.read()
    try:
        data = SequenceFile.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise SequenceFileError(f"{path} is not valid JSON: {e}", "malformed_json") from None
    except ValidationError as e:
        raise SequenceFileError(
            f"{path} does not match {{'offset': int, 'values': [[re, im], ...]}}: {e.error_count()} error(s)",
            "malformed_json",
        ) from None

    values = np.array([complex(re, im) for re, im in data.values], dtype=np.complex128)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise SequenceFileError(
            f"{path} holds non-finite values at modes {[data.offset + int(i) for i in bad]}.", "non_finite"
        )
    seq = ComplexSequence(data.offset, values)
    if K is not None and not seq.fits(K):
        raise SequenceFileError(
            f"{path} has support {seq.support()} outside the truncation [-{K}, {K}].", "support_overflow"
        )
    return seq


def sequence_to_file(seq: ComplexSequence) -> SequenceFile:
    return SequenceFile(offset=seq.offset, values=[(c.real, c.imag) for c in seq.values])


def write_sequence(path: str, seq: ComplexSequence):
    write_json(path, sequence_to_file(seq))


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]):
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_csv(path: str) -> List[dict]:
    with open(path, 'r', newline='') as f:
        return list(csv.DictReader(f))


def write_json(path: str, payload):
    _ensure_parent(path)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump()
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2)
        f.write('\n')


def mode_rows(times: np.ndarray, values: np.ndarray, modes: np.ndarray):
    """Rows (t, k, re, im), times ascending then k ascending; values is (n_times, n_modes)."""
    for t, row in zip(times, values):
        for k, c in zip(modes, row):
            yield float(t), int(k), float(c.real), float(c.imag)


def write_trajectory(path: str, traj: Trajectory):
    write_csv(path, config.TRAJECTORY_HEADER, mode_rows(traj.times, traj.values, traj.modes))


def read_trajectory(path: str, alpha: ComplexSequence, variable_tag: str = "B") -> Trajectory:
    """
    Reads a `t,k,re,im` CSV back into a Trajectory.

    The file does not record the data, so `alpha` (which fixes |alpha_k|^2)
    and the variable tag come from the caller.
    """
    rows = read_csv(path)
    if not rows:
        raise ValueError(f"Trajectory file {path} has no rows.")
    t = np.array([float(r["t"]) for r in rows])
    k = np.array([int(r["k"]) for r in rows])
    c = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    times = np.unique(t)
    K = int(np.max(np.abs(k)))
    if not alpha.fits(K):
        raise ValueError(f"Data support {alpha.support()} exceeds the trajectory modes |k| <= {K}.")
    values = np.zeros((times.size, 2 * K + 1), dtype=np.complex128)
    values[np.searchsorted(times, t), k + K] = c
    return Trajectory(times, values, variable_tag, np.abs(alpha.dense(K)) ** 2)


def file_digest(path: str) -> str:
    """sha256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(config.DIGEST_CHUNK), b''):
            h.update(block)
    return h.hexdigest()
