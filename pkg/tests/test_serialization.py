import json
import math

import numpy as np
import pytest

from qmor import cases, serialization, systems
from qmor.analysis import FrequencyResponse
from qmor.errors import SchemaError
from qmor.reduction import reduce_passive, reduce_right


def test_quadrature_round_trip_bit_exact(tmp_path):
    sys_q = systems.random_realizable_quadrature(3, 2, 1, 77)
    path = tmp_path / "sys.json"
    serialization.save_system(sys_q, path)
    loaded = serialization.load_system(path)
    assert np.array_equal(loaded.A, sys_q.A)
    assert np.array_equal(loaded.B, sys_q.B)
    assert np.array_equal(loaded.C, sys_q.C)
    assert np.array_equal(loaded.D, sys_q.D)


def test_annihilation_round_trip_bit_exact(tmp_path):
    sys_a = systems.random_realizable_annihilation(4, 2, 1, 78)
    path = tmp_path / "sys.json"
    serialization.save_system(sys_a, path)
    loaded = serialization.load_system(path)
    for name in "FGHK":
        assert np.array_equal(getattr(loaded, name), getattr(sys_a, name))


def test_double_round_trip_stable(tmp_path):
    sys_q = cases.optomechanical_system()
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    serialization.save_system(sys_q, p1)
    serialization.save_system(serialization.load_system(p1), p2)
    assert p1.read_text() == p2.read_text()


def test_schema_rejects_unknown_form():
    with pytest.raises(SchemaError, match="form"):
        serialization.system_from_dict({"form": "modal", "A": [[1.0]]})


def test_schema_rejects_missing_matrix():
    doc = serialization.system_to_dict(cases.optomechanical_system())
    doc.pop("B")
    with pytest.raises(SchemaError, match="missing"):
        serialization.system_from_dict(doc)


def test_schema_rejects_declared_dimension_mismatch():
    doc = serialization.system_to_dict(cases.optomechanical_system())
    doc["n"] = 7
    with pytest.raises(SchemaError, match="n=7"):
        serialization.system_from_dict(doc)


def test_schema_rejects_ragged_matrix():
    with pytest.raises(SchemaError, match="ragged"):
        serialization.real_matrix_from_json([[1.0, 2.0], [3.0]], "A")


def test_schema_rejects_bad_entries():
    with pytest.raises(SchemaError):
        serialization.complex_matrix_from_json([[{"re": 1}]], "F")


def test_points_round_trip():
    points = np.array([1.5j, -1.5j, 0.25 + 0j])
    directions = np.array([[1.0, 1j], [1.0, -1j], [0.5, 0.0]])
    doc = serialization.points_to_dict(points, directions)
    parsed_points, parsed_dirs = serialization.points_from_dict(
        json.loads(json.dumps(doc))
    )
    assert np.array_equal(parsed_points, points)
    assert np.array_equal(parsed_dirs, directions)


def test_reduction_bundle_round_trip_quadrature(tmp_path):
    sys_q = cases.optomechanical_system()
    result = reduce_right(sys_q, cases.ex1_interpolation_data())
    path = tmp_path / "reduction.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialization.reduction_to_dict(result, "right"), fh)
    method, loaded = serialization.load_reduction(path)
    assert method == "right"
    assert np.array_equal(loaded.w, result.w)
    assert np.array_equal(loaded.v, result.v)
    assert np.array_equal(loaded.reduced.A, result.reduced.A)
    assert loaded.data.side == "right"


def test_reduction_bundle_round_trip_passive(tmp_path):
    sys_a = cases.cascaded_cavity_system()
    result = reduce_passive(sys_a, cases.ex3_interpolation_data(), pr_tol=1e-8)
    path = tmp_path / "reduction.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialization.reduction_to_dict(result, "passive"), fh)
    method, loaded = serialization.load_reduction(path)
    assert method == "passive"
    assert np.array_equal(loaded.v, result.v)
    assert np.iscomplexobj(loaded.v)


def test_error_curve_csv_full_precision(tmp_path):
    path = tmp_path / "curve.csv"
    value = math.pi * 1e-3
    serialization.write_error_curve_csv(path, [(1.0 / 3.0, value)])
    lines = path.read_text().splitlines()
    assert lines[0] == "omega,error"
    omega, err = lines[1].split(",")
    assert float(omega) == 1.0 / 3.0
    assert float(err) == value


def test_frequency_response_csv_layout(tmp_path):
    response = FrequencyResponse(
        omegas=np.array([2.0]),
        values=[np.array([[1.0 + 1.0j, 0.5], [0.25j, -1.0]])],
        skipped=[(1.0, "resolvent singular")],
    )
    path = tmp_path / "freq.csv"
    serialization.write_frequency_response_csv(path, response)
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "omega"
    assert "entry_11_re" in header and "entry_22_im" in header
    assert "entry_21_db" in header and "entry_12_deg" in header
    assert lines[1].startswith("# warning: omega 1 skipped")
    row = lines[2].split(",")
    assert float(row[0]) == 2.0
    assert len(row) == 1 + 2 * 4 + 2 * 4
