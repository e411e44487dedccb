"""State files in, reports out.

State files are JSON objects holding exactly one of

* ``"bell_diagonal": [c_x, c_y, c_z]``
* ``"matrix"``: 4 rows of 4 ``[re, im]`` pairs

plus an optional ``"label"`` string. Reports are nested dicts rendered either
as JSON (full precision) or as ``key: value`` lines with dotted stable keys
and 6 significant digits.
"""
import json
import math
from typing import NamedTuple

import numpy as np

from .states import TwoQubitState, UnphysicalStateError, as_state, build_bell_diagonal

__all__ = [
    "LoadedState",
    "StateFileError",
    "dump_state_file",
    "format_json",
    "format_text",
    "load_state_file",
    "parse_state",
]


class StateFileError(ValueError):
    """Malformed state file; the message names the offending line or field."""


class LoadedState(NamedTuple):
    state: TwoQubitState
    label: str
    echo: dict


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise StateFileError(f"{where}: expected a number, got {json.dumps(x)}")
    if not math.isfinite(x):
        raise StateFileError(f"{where}: number must be finite")
    return float(x)


def parse_state(doc, source="<state>"):
    """Build a state from a decoded state-file object.

    Raises:
        StateFileError: structural problems, non-Hermitian or wrong trace.
        UnphysicalStateError: a negative eigenvalue beyond -1e-12.
    """
    if not isinstance(doc, dict):
        raise StateFileError(f"{source}: top level must be an object")
    unknown = set(doc) - {"label", "bell_diagonal", "matrix"}
    if unknown:
        raise StateFileError(f"{source}: unknown field(s) {sorted(unknown)}")
    present = [k for k in ("bell_diagonal", "matrix") if k in doc]
    if len(present) != 1:
        raise StateFileError(f"{source}: exactly one of 'bell_diagonal' or 'matrix' is required")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise StateFileError(f"{source}: field 'label' must be a string")

    if present[0] == "bell_diagonal":
        c = doc["bell_diagonal"]
        if not isinstance(c, list) or len(c) != 3:
            raise StateFileError(f"{source}: field 'bell_diagonal' must be a list of 3 numbers")
        c = [_number(v, f"{source}: bell_diagonal[{i}]") for i, v in enumerate(c)]
        state = build_bell_diagonal(c)
        echo = {"label": label, "bell_diagonal": c}
        return LoadedState(state, label, echo)

    rows = doc["matrix"]
    if not isinstance(rows, list) or len(rows) != 4:
        raise StateFileError(f"{source}: field 'matrix' must be a list of 4 rows")
    m = np.zeros((4, 4), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 4:
            raise StateFileError(f"{source}: matrix[{i}] must be a list of 4 [re, im] pairs")
        for j, pair in enumerate(row):
            where = f"{source}: matrix[{i}][{j}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise StateFileError(f"{where}: expected an [re, im] pair")
            m[i, j] = complex(_number(pair[0], where + "[0]"), _number(pair[1], where + "[1]"))
    try:
        state = as_state(m)
    except UnphysicalStateError:
        raise
    except ValueError as exc:
        raise StateFileError(f"{source}: matrix: {exc}") from exc
    echo = {"label": label, "matrix": [[[z.real, z.imag] for z in row] for row in m]}
    return LoadedState(state, label, echo)


def load_state_file(path):
    """Read and validate a state file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise StateFileError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_state(doc, str(path))


def dump_state_file(path, state=None, bell_diagonal=None, label=""):
    """Write a state file for a Bell vector or for an arbitrary state's matrix."""
    lines = ["{", f"  \"label\": {json.dumps(label)},"]
    if bell_diagonal is not None:
        lines.append(f"  \"bell_diagonal\": {json.dumps([float(v) for v in bell_diagonal])}")
    else:
        # one matrix row per line keeps the file editable by hand
        m = as_state(state).matrix
        rows = [json.dumps([[float(z.real), float(z.imag)] for z in row]) for row in m]
        lines.append("  \"matrix\": [")
        lines.append(",\n".join("    " + r for r in rows))
        lines.append("  ]")
    lines.append("}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError("report contains a non-finite number")
        return x
    return x


def format_json(report):
    return json.dumps(_plain(report), indent=2) + "\n"


def _scalar(v):
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    return str(v)


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    else:
        out.append(f"{prefix}: {_scalar(value)}")


def format_text(report):
    lines = []
    _flatten("", _plain(report), lines)
    return "\n".join(lines) + "\n"
