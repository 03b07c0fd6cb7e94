"""
Parsing and CSV helpers shared by the CLI.
"""
import csv
import json
import math
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from aggmem.errors import DomainError
from aggmem.results import MomentSequence

HEADER_PREFIX = "# "
SPEC_KEYS = ("family", "p", "q", "c", "phi0", "x", "f")
INT_KEYS = ("N", "T", "burn_in", "seed")
FLOAT_KEYS = ("sigma_eps", "sigma_eta")


def parse_int(value: Optional[str]) -> Optional[int]:
    """
    Parse integer value, return None if empty or invalid.
    """
    if not value or value.strip() == "":
        return None
    try:
        return int(value.strip())
    except ValueError:
        return None


def parse_float(value: Optional[str]) -> Optional[float]:
    """
    Parse float value, return None if empty or invalid.
    """
    if not value or value.strip() == "":
        return None
    try:
        return float(value.strip())
    except ValueError:
        return None


def parse_float_list(value: str) -> List[float]:
    """'0,2' -> [0.0, 2.0]; any unparseable entry is a domain error"""
    items = [parse_float(v) for v in value.split(",")]
    if not items or any(v is None for v in items):
        raise DomainError(f"expected comma-separated numbers, got {value!r}")
    return items


def format_number(x: float) -> str:
    """Shortest round-trip form; reading it back gives the same double"""
    return repr(float(x))


def significant(x: float, digits: int = 15) -> float:
    """x rounded to `digits` significant digits (text and JSON output)"""
    if not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def round_floats(value: Any, digits: int = 15) -> Any:
    """Apply `significant` to every float inside nested dicts and lists"""
    if isinstance(value, float):
        return significant(value, digits)
    if isinstance(value, dict):
        return {k: round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v, digits) for v in value]
    return value


# ---------------------------------------------------------------------------
# Header comment and CSV tables

def format_header(header: Dict[str, Any]) -> str:
    return HEADER_PREFIX + json.dumps(header, sort_keys=False, separators=(", ", ": "))


def parse_header(line: str) -> Optional[Dict[str, Any]]:
    """JSON header from a '# {...}' line, or None if the line is not one"""
    if not line.startswith(HEADER_PREFIX.rstrip()):
        return None
    try:
        value = json.loads(line[1:].strip())
    except json.JSONDecodeError:
        return None
    return value if isinstance(value, dict) else None


def write_csv(stream: IO[str], columns: Sequence[str], rows: Iterable[Sequence[Any]]):
    """Stream rows as CSV; floats in round-trip form"""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv_table(stream: IO[str]) -> Tuple[Optional[Dict[str, Any]], List[Dict[str, str]]]:
    """Header comment (if any) and data rows of a CSV written by write_csv"""
    header = None
    lines = []
    for line in stream:
        if line.startswith("#"):
            header = header or parse_header(line.rstrip("\n"))
            continue
        if line.strip():
            lines.append(line)
    return header, list(csv.DictReader(lines))


def read_moments_csv(stream: IO[str]) -> Tuple[Optional[Dict[str, Any]], MomentSequence]:
    """
    Moment sequence from the CSV emitted by the `moments` command
    (columns k, u_k with k = 1..K).
    """
    header, rows = read_csv_table(stream)
    if not rows:
        raise DomainError("moment table is empty")

    u = [1.0]
    for expected, row in enumerate(rows, start=1):
        k = parse_int(row.get("k"))
        value = parse_float(row.get("u_k"))
        if k != expected or value is None:
            raise DomainError(f"moment table row {expected} is malformed: {row}")
        u.append(value)
    return header, MomentSequence(u=np.array(u), exactness="closed-form")


# ---------------------------------------------------------------------------
# Panel configuration files

def parse_key_value(text: str) -> Dict[str, str]:
    """key=value lines; blank lines and '#' comments are skipped"""
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {number}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _typed_key_values(values: Dict[str, str]) -> Dict[str, Any]:
    config: Dict[str, Any] = {}
    spec: Dict[str, Any] = {}
    for key, value in values.items():
        if key == "spec":
            spec.update(json.loads(value))
        elif key in SPEC_KEYS:
            if key == "family":
                spec[key] = value
            elif key in ("c", "x", "f"):
                spec[key] = parse_float_list(value)
            else:
                spec[key] = parse_float(value)
        elif key in INT_KEYS:
            parsed = parse_int(value)
            if parsed is None:
                raise DomainError(f"{key} must be an integer, got {value!r}")
            config[key] = parsed
        elif key in FLOAT_KEYS:
            parsed = parse_float(value)
            if parsed is None:
                raise DomainError(f"{key} must be a number, got {value!r}")
            config[key] = parsed
        else:
            raise DomainError(f"unknown configuration key {key!r}")
    if spec:
        config["spec"] = spec
    return config


def load_panel_config(text: str) -> Dict[str, Any]:
    """
    Raw panel configuration from a JSON object or key=value text.
    Validation happens when the PanelConfig is built.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(stripped)
        if not isinstance(data, dict):
            raise DomainError("panel configuration JSON must be an object")
        return data
    return _typed_key_values(parse_key_value(text))
