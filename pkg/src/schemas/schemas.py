from pydantic import BaseModel, Field, computed_field
from typing import Any, Dict, List, Optional, Tuple
import hashlib
import json


class SequenceFile(BaseModel):
    """Finitely supported sequence: values[i] = [re, im] of mode offset + i."""
    offset: int
    values: List[Tuple[float, float]]

    @computed_field
    @property
    def radius(self) -> int:
        if not self.values:
            return 0
        return max(abs(self.offset), abs(self.offset + len(self.values) - 1))


class ResonanceTableFile(BaseModel):
    """Per-mode entries [m, z, j1, j2, j3, lambda], keyed by the mode index as a string."""
    K: int
    entries: Dict[str, List[Tuple[int, int, int, int, int, float]]]


class FixedPointReport(BaseModel):
    K: int
    N: int
    s: float
    p: float
    T_max: float
    converged: bool
    iterations: int
    ratios: List[float]
    gaps: List[float]
    residual: float
    tail_bound: float


class NormsSummary(BaseModel):
    s: float
    p: float
    nus: List[int]
    totals: List[float]
    xsp: float
    slopes: Dict[str, float] = Field(default_factory=dict)


class RunManifest(BaseModel):
    """
    Everything needed to repeat a run: the argv, the parsed flags and the
    digests of every input and output file.
    """
    subcommand: str
    argv: List[str]
    flags: Dict[str, Any]
    input_digests: Dict[str, str] = Field(default_factory=dict)
    output_digests: Dict[str, str] = Field(default_factory=dict)
    tool_version: str
    wall_time: float
    exit_status: int = 0
    error: Optional[str] = None

    @computed_field
    @property
    def run_id(self) -> str:
        """Hash of the command line and its inputs; equal ids mean equal runs."""
        key = json.dumps({"argv": self.argv, "inputs": self.input_digests}, sort_keys=True)
        return hashlib.sha256(key.encode('utf-8')).hexdigest()
