"""On-disk operator format.

A state file is a JSON object with two keys: ``dims``, the list of subsystem
dimensions, and ``matrix``, the row-major list of ``[re, im]`` pairs of
length (prod dims)^2.  Floats are serialized with shortest round-trip repr,
so a dump/load cycle reproduces the matrix bit for bit.
"""

import json

import numpy as np

from .errors import StateFileError
from .operators import HermitianOp


def save_state(path, op: HermitianOp):
    flat = op.mat.ravel()
    payload = {
        "dims": list(op.dims),
        "matrix": [[float(z.real), float(z.imag)] for z in flat],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_state(path) -> HermitianOp:
    """Parse a state file; schema problems raise ``StateFileError``.

    Content-level problems (non-Hermitian matrix, bad dimensions) surface as
    the corresponding operator errors.
    """
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise StateFileError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(payload, dict) or "dims" not in payload or "matrix" not in payload:
        raise StateFileError(f"{path}: expected an object with 'dims' and 'matrix'")
    dims = payload["dims"]
    entries = payload["matrix"]
    if (not isinstance(dims, list) or not dims
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise StateFileError(f"{path}: 'dims' must be a list of positive integers")
    d = 1
    for x in dims:
        d *= x
    if not isinstance(entries, list) or len(entries) != d * d:
        raise StateFileError(f"{path}: 'matrix' must hold {d * d} [re, im] pairs")
    try:
        flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise StateFileError(f"{path}: malformed matrix entry: {exc}") from exc
    return HermitianOp(tuple(dims), flat.reshape(d, d))
