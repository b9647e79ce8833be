import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from spectriple.constants import REPORT_SCHEMA_VERSION_INT

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def jsonable(value: Any) -> Any:
    """Plain JSON types for numpy scalars, arrays and complex numbers."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def argument_digest(argv: List[str]) -> str:
    return hashlib.sha256(json.dumps(list(argv)).encode()).hexdigest()


@dataclass
class Report:
    """
    Machine-readable outcome of one command.

    ``checks`` holds ``{"name", "passed", "residual"}`` entries; the exit
    code is 1 as soon as one of them failed.
    """

    command: List[str]
    input_digest: str = ""
    checks: List[Dict[str, Any]] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    exit_code_override: Optional[int] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION_INT

    def add_check(self, name: str, passed: bool, residual=None):
        self.checks.append({"name": name, "passed": bool(passed), "residual": residual})

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["passed"] for c in self.checks)

    @property
    def first_failure(self) -> Optional[str]:
        for c in self.checks:
            if not c["passed"]:
                return c["name"]
        return None

    @property
    def exit_code(self) -> int:
        if self.exit_code_override is not None:
            return self.exit_code_override
        return EXIT_OK if self.passed else EXIT_CHECK_FAILED

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({
            "schema_version": self.schema_version,
            "command": list(self.command),
            "input_digest": self.input_digest,
            "checks": self.checks,
            "payload": self.payload,
            "error": self.error,
            "first_failure": self.first_failure,
            "exit_code": self.exit_code,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save_json(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    def save_csv(self, path) -> Optional[Path]:
        """Tabular series (one row per t value, trial or configuration)."""
        if not self.rows:
            return None
        path = Path(path)
        pd.DataFrame([jsonable(row) for row in self.rows]).to_csv(path, index=False)
        return path

    def __str__(self):
        return self.to_json()
