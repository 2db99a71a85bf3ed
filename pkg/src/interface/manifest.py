"""
Run manifests.

Every CLI run writes a RunManifest next to its main output. Replaying a
manifest runs the same argv again and compares output digests.
"""

import json
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from src.schemas.schemas import RunManifest

from . import config
from .io import file_digest, write_json


def default_manifest_path(out: str) -> str:
    return out + config.MANIFEST_SUFFIX


def _plain(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


def digests(paths: Iterable[str]) -> Dict[str, str]:
    return {p: file_digest(p) for p in paths if p and os.path.exists(p)}


def build_manifest(subcommand: str, argv: List[str], flags: dict, inputs: Iterable[str],
                   outputs: Iterable[str], wall_time: float, exit_status: int = config.EXIT_OK,
                   error: Optional[str] = None) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        argv=list(argv),
        flags={k: _plain(v) for k, v in sorted(flags.items()) if k != "handler"},
        input_digests=digests(inputs),
        output_digests=digests(outputs),
        tool_version=config.TOOL_VERSION,
        wall_time=wall_time,
        exit_status=exit_status,
        error=error,
    )


def write_manifest(path: str, manifest: RunManifest):
    write_json(path, manifest)


def load_manifest(path: str) -> RunManifest:
    with open(path, 'r') as f:
        data = json.load(f)
    data.pop("run_id", None)
    return RunManifest.model_validate(data)


@dataclass
class ReplayReport:
    manifest: RunManifest
    exit_status: int
    mismatched: List[str]
    missing: List[str]

    @property
    def reproduced(self) -> bool:
        return self.exit_status == self.manifest.exit_status and not self.mismatched and not self.missing


def replay(path: str) -> ReplayReport:
    """Re-runs the argv recorded in a manifest and compares every output digest."""
    from .cli import run

    manifest = load_manifest(path)
    argv = list(manifest.argv)
    # keep the recorded manifest intact
    if "--manifest" not in argv:
        argv = ["--manifest", path + ".replay"] + argv
    status = run(argv)
    mismatched, missing = [], []
    for out, digest in manifest.output_digests.items():
        if not os.path.exists(out):
            missing.append(out)
        elif file_digest(out) != digest:
            mismatched.append(out)
    return ReplayReport(manifest, status, mismatched, missing)
