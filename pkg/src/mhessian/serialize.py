"""JSON and CSV serialization with atomic writes."""
import csv
import io
import json
import os
import tempfile

import numpy as np

from .domain import Domain
from .errors import ArgumentError
from .field import GridFunction2D, RadialFunction, polar_grid

SCHEMA_VERSION = 1


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, shortest float repr."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True) + "\n"


def write_atomic(path, text: str):
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    payload = dict(obj)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    write_atomic(path, dumps(payload))


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ArgumentError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ArgumentError(f"{path}: expected a JSON object")
    version = data.get("schema_version")
    if version is not None and version > SCHEMA_VERSION:
        raise ArgumentError(f"{path}: schema_version {version} is newer than {SCHEMA_VERSION}")
    return data


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    write_atomic(path, csv_text(header, rows))


# ---------------------------------------------------------------------------
# grid functions

def function_to_dict(u) -> dict:
    if isinstance(u, RadialFunction):
        return {"schema_version": SCHEMA_VERSION, "kind": "radial", "n": u.n, "R": u.R,
                "N": u.N, "degree": u.degree, "values": u.values.tolist()}
    if isinstance(u, GridFunction2D):
        g = u.grid
        return {"schema_version": SCHEMA_VERSION, "kind": "polar", "domain": g.domain.to_dict(),
                "Nr": g.Nr, "Ntheta": g.Ntheta, "values": u.values.tolist()}
    raise ArgumentError(f"cannot serialize {type(u).__name__}")


def function_from_dict(d: dict):
    try:
        kind = d["kind"]
        vals = np.asarray(d["values"], dtype=float)
        if kind == "radial":
            if vals.shape != (d["N"],):
                raise ArgumentError(f"radial values have shape {vals.shape}, expected ({d['N']},)")
            return RadialFunction(float(d["R"]), vals, int(d["n"]), int(d.get("degree", 0)))
        if kind == "polar":
            shape = (d["Nr"], d["Ntheta"])
            if vals.shape != shape:
                raise ArgumentError(f"grid values have shape {vals.shape}, expected {shape}")
            grid = polar_grid(Domain.from_dict(d["domain"]), int(d["Nr"]), int(d["Ntheta"]))
            return GridFunction2D(grid, vals)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"bad grid-function record: {exc}") from None
    raise ArgumentError(f"unknown grid-function kind {kind!r}")


def function_rows(u):
    """Long-format rows: ``(r, value)`` for profiles, ``(r, theta, value)`` on polar grids.

    On discs ``r`` is the physical radius; on ellipses it is the reference
    radius ``rho`` of the mapped grid.
    """
    if isinstance(u, RadialFunction):
        return ["r", "w"], list(zip(u.r.tolist(), u.values.tolist()))
    g = u.grid
    radius = g.rho * (g.a if g.a == g.b else 1.0)
    rows = []
    for i in range(g.Nr):
        for j in range(g.Ntheta):
            rows.append((float(radius[i]), float(g.theta[j]), float(u.values[i, j])))
    return ["r", "theta", "w"], rows


def read_function_csv(path, like):
    """Read a CSV written by :func:`function_rows` back onto the grid of ``like``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise ArgumentError(f"no such file: {path}") from None
    if not rows:
        raise ArgumentError(f"{path}: empty file")
    data = np.array(rows[1:], dtype=float)
    if isinstance(like, RadialFunction):
        if data.shape != (like.N, 2):
            raise ArgumentError(f"{path}: expected {like.N} rows of (r, w)")
        return like.with_values(data[:, 1])
    g = like.grid
    if data.shape != (g.Nr * g.Ntheta, 3):
        raise ArgumentError(f"{path}: expected {g.Nr * g.Ntheta} rows of (r, theta, w)")
    return like.with_values(data[:, 2].reshape(g.Nr, g.Ntheta))
