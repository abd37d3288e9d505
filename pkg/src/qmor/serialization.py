"""JSON and CSV input/output.

System documents carry a ``form`` tag (``quadrature`` or ``annihilation``),
the mode/field counts, and the four matrices.  Real matrices are plain nested
number arrays; complex entries are two-element ``[re, im]`` arrays.  Floats
round-trip bit-for-bit through ``json`` (shortest-repr encoding).

CSV files use full double precision (17 significant digits) so downstream
plots are reproducible; rows the evaluator skipped are emitted as ``#``
comment lines.
"""

import json
import math

import numpy as np

from .errors import SchemaError
from .reduction import InterpolationData, ReductionResult
from .systems import AnnihilationSystem, QuadratureSystem


def real_matrix_to_json(m):
    return [[float(x) for x in row] for row in np.asarray(m, dtype=float)]


def complex_matrix_to_json(m):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _entry_to_complex(entry, name):
    if isinstance(entry, (int, float)):
        return complex(entry)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(x, (int, float)) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise SchemaError(f"{name}: entries must be numbers or [re, im] pairs, got {entry!r}")


def real_matrix_from_json(obj, name):
    m = complex_matrix_from_json(obj, name)
    if np.abs(m.imag).max(initial=0.0) != 0.0:
        raise SchemaError(f"{name} must be real")
    return m.real


def complex_matrix_from_json(obj, name):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{name} must be a non-empty nested array")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise SchemaError(f"{name} has ragged rows")
    rows = [[_entry_to_complex(x, name) for x in r] for r in obj]
    m = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise SchemaError(f"{name} contains non-finite entries")
    return m


def system_to_dict(system):
    if isinstance(system, QuadratureSystem):
        return {
            "form": "quadrature",
            "n": system.n_modes,
            "m": system.n_inputs,
            "ell": system.n_outputs,
            "A": real_matrix_to_json(system.A),
            "B": real_matrix_to_json(system.B),
            "C": real_matrix_to_json(system.C),
            "D": real_matrix_to_json(system.D),
        }
    if isinstance(system, AnnihilationSystem):
        return {
            "form": "annihilation",
            "n": system.n_modes,
            "m": system.n_inputs,
            "ell": system.n_outputs,
            "F": complex_matrix_to_json(system.F),
            "G": complex_matrix_to_json(system.G),
            "H": complex_matrix_to_json(system.H),
            "K": complex_matrix_to_json(system.K),
        }
    raise SchemaError(f"cannot serialize {type(system).__name__}")


def system_from_dict(data):
    if not isinstance(data, dict):
        raise SchemaError("system document must be a JSON object")
    form = data.get("form")
    if form == "quadrature":
        keys = ("A", "B", "C", "D")
        loader = real_matrix_from_json
        cls = QuadratureSystem
    elif form == "annihilation":
        keys = ("F", "G", "H", "K")
        loader = complex_matrix_from_json
        cls = AnnihilationSystem
    else:
        raise SchemaError(f"unknown or missing form {form!r}")
    missing = [k for k in keys if k not in data]
    if missing:
        raise SchemaError(f"missing matrices {missing}")
    mats = {k: loader(data[k], k) for k in keys}
    try:
        system = cls(**mats)
    except Exception as exc:
        raise SchemaError(f"inconsistent system matrices: {exc}") from exc
    for field_name, actual in (
        ("n", system.n_modes),
        ("m", system.n_inputs),
        ("ell", system.n_outputs),
    ):
        if field_name in data and int(data[field_name]) != actual:
            raise SchemaError(
                f"declared {field_name}={data[field_name]} but matrices imply {actual}"
            )
    return system


def _load_json_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def load_system(path):
    return system_from_dict(_load_json_file(path))


def save_system(system, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(system), fh, indent=1)
        fh.write("\n")


def points_to_dict(points, directions):
    points = np.asarray(points, dtype=complex)
    directions = np.atleast_2d(np.asarray(directions, dtype=complex))
    return {
        "points": [[float(p.real), float(p.imag)] for p in points],
        "directions": [
            [[float(x.real), float(x.imag)] for x in row] for row in directions
        ],
    }


def points_from_dict(data):
    if not isinstance(data, dict) or "points" not in data or "directions" not in data:
        raise SchemaError("expected an object with 'points' and 'directions'")
    raw_points = data["points"]
    if not isinstance(raw_points, list) or not raw_points:
        raise SchemaError("'points' must be a non-empty array")
    points = np.array([_entry_to_complex(p, "points") for p in raw_points])
    directions = complex_matrix_from_json(data["directions"], "directions")
    if directions.shape[0] != points.shape[0]:
        raise SchemaError(
            f"{points.shape[0]} points but {directions.shape[0]} directions"
        )
    return points, directions


def reduction_to_dict(result, method):
    diag = result.diagnostics
    doc = {
        "method": method,
        "reduced": system_to_dict(result.reduced),
        "data": points_to_dict(result.data.points, result.data.directions),
        "W": complex_matrix_to_json(result.w),
        "V": complex_matrix_to_json(result.v),
    }
    if diag is not None:
        doc["diagnostics"] = {
            "interpolation_residuals": list(map(float, diag.interpolation_residuals)),
            "interpolation_references": list(map(float, diag.interpolation_references)),
            "realizability_residuals": list(map(float, diag.realizability.residuals)),
            "realizability_tol": diag.realizability.tol,
            "realizability_passes": diag.realizability.passes,
            "biorthogonality": diag.biorthogonality,
            "poles": [[float(p.real), float(p.imag)] for p in diag.poles],
        }
        if diag.scaling_convention is not None:
            doc["diagnostics"]["scaling_convention"] = diag.scaling_convention
            doc["diagnostics"]["scaling_residuals"] = {
                k: float(v) for k, v in diag.scaling_residuals.items()
            }
    return doc


def reduction_from_dict(data):
    if not isinstance(data, dict):
        raise SchemaError("reduction document must be a JSON object")
    for key in ("method", "reduced", "data", "W", "V"):
        if key not in data:
            raise SchemaError(f"reduction document is missing {key!r}")
    method = data["method"]
    if method not in ("left", "right", "passive"):
        raise SchemaError(f"unknown reduction method {method!r}")
    reduced = system_from_dict(data["reduced"])
    points, directions = points_from_dict(data["data"])
    side = "right" if method == "right" else "left"
    w = complex_matrix_from_json(data["W"], "W")
    v = complex_matrix_from_json(data["V"], "V")
    if method != "passive":
        w = np.real_if_close(w).astype(float)
        v = np.real_if_close(v).astype(float)
    return ReductionResult(
        w=w,
        v=v,
        reduced=reduced,
        data=InterpolationData(side=side, points=points, directions=directions),
        diagnostics=None,
    )


def load_reduction(path):
    data = _load_json_file(path)
    return data["method"], reduction_from_dict(data)


def _fmt(x):
    return f"{x:.17g}"


def write_error_curve_csv(path, pointwise):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("omega,error\n")
        for omega, err in np.asarray(pointwise):
            fh.write(f"{_fmt(omega)},{_fmt(err)}\n")


def write_frequency_response_csv(path, response):
    """Transfer samples: re/im of every entry in row-major order, then dB/deg."""
    if response.values:
        rows, cols = response.values[0].shape
    else:
        rows = cols = 0
    header = ["omega"]
    for i in range(rows):
        for j in range(cols):
            header += [f"entry_{i + 1}{j + 1}_re", f"entry_{i + 1}{j + 1}_im"]
    for i in range(rows):
        for j in range(cols):
            header += [f"entry_{i + 1}{j + 1}_db", f"entry_{i + 1}{j + 1}_deg"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for omega, reason in response.skipped:
            fh.write(f"# warning: omega {_fmt(omega)} skipped ({reason})\n")
        for omega, value in zip(response.omegas, response.values):
            cells = [_fmt(omega)]
            flat = value.reshape(-1)
            for x in flat:
                cells += [_fmt(x.real), _fmt(x.imag)]
            for x in flat:
                mag = abs(x)
                db = 20.0 * math.log10(mag) if mag > 0 else -math.inf
                cells += [_fmt(db), _fmt(math.degrees(np.angle(x)))]
            fh.write(",".join(cells) + "\n")


def write_error_surface_csv(path, real_points, imag_points, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("re,im,error\n")
        for i, im in enumerate(imag_points):
            for j, re in enumerate(real_points):
                cell = values[i, j]
                rendered = "nan" if math.isnan(cell) else _fmt(cell)
                fh.write(f"{_fmt(re)},{_fmt(im)},{rendered}\n")


def write_scan_trace_csv(path, trace):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("phase,omegas,cost,feasible,reason\n")
        for entry in trace:
            omegas = ";".join(_fmt(w) for w in entry["omegas"])
            reason = entry.get("reason", "").replace(",", ";").replace("\n", " ")
            fh.write(
                f"{entry['phase']},{omegas},{_fmt(entry['cost'])},"
                f"{int(entry['feasible'])},{reason}\n"
            )
