import json

import numpy as np
import pytest

from dtph import io
from dtph.errors import DimensionError, FormatError
from dtph.geometric import dilate
from dtph.random import gaussian, scattering_ph
from dtph.subspace import from_image, graph, to_kernel
from dtph.systems import DescriptorSystem, simulate_standard


def test_matrix_round_trip_real_and_complex(rng):
    for a in (gaussian(rng, 3, 2), gaussian(rng, 2, 4, complex_=True), np.zeros((0, 3))):
        obj = json.loads(json.dumps(io.matrix_to_json(a)))
        b = io.matrix_from_json(obj)
        assert b.shape == a.shape and np.array_equal(a, b)
        assert np.iscomplexobj(b) == np.iscomplexobj(a)


@pytest.mark.parametrize("obj,field", [
    ({"rows": 1, "cols": 1, "field": "real"}, "m.data"),
    ({"rows": 2, "cols": 1, "field": "real", "data": [[1.0]]}, "m.data"),
    ({"rows": 1, "cols": 2, "field": "real", "data": [[1.0]]}, "m.data[0]"),
    ({"rows": 1, "cols": 1, "field": "quaternion", "data": [[1.0]]}, "m.field"),
    ({"rows": 1, "cols": 1, "field": "real", "data": [["x"]]}, "m.data[0][0]"),
    ({"rows": 1, "cols": 1, "field": "complex", "data": [[[1.0]]]}, "m.data[0][0]"),
    ({"rows": -1, "cols": 1, "field": "real", "data": []}, "m.rows"),
])
def test_matrix_errors_name_the_field(obj, field):
    with pytest.raises(FormatError) as info:
        io.matrix_from_json(obj, "m")
    assert info.value.field == field
    assert field in str(info.value)


def test_subspace_image_and_kernel_forms(rng):
    M = from_image(gaussian(rng, 3, 2, True), gaussian(rng, 2, 2, True))
    back = io.subspace_from_json(io.subspace_to_json(M))
    assert back.same_as(M)
    K = to_kernel(M)
    obj = {"p": 3, "q": 2, "kernel": {"K1": io.matrix_to_json(K.K1),
                                      "K2": io.matrix_to_json(K.K2)}}
    assert io.subspace_from_json(obj).same_as(M)


def test_subspace_shape_error():
    obj = io.subspace_to_json(graph(np.eye(2)))
    obj["p"] = 3
    with pytest.raises(FormatError):
        io.subspace_from_json(obj)


def test_system_round_trip(rng):
    s, _ = scattering_ph(rng, 2, 2, m1=1)
    obj = json.loads(io.dumps(io.system_to_json(s)))
    assert obj["E"] is None and obj["partition"] == {"m1": 1}
    back = io.system_from_json(obj)
    assert back.m1 == 1 and np.array_equal(back.A, s.A)
    d = DescriptorSystem(np.diag([1.0, 0.0]), np.eye(2), np.ones((2, 1)),
                         np.ones((1, 2)), np.zeros((1, 1)))
    back = io.system_from_json(io.system_to_json(d))
    assert isinstance(back, DescriptorSystem) and np.array_equal(back.E, d.E)


def test_system_dimension_error_is_not_a_format_error(rng):
    obj = io.system_to_json(scattering_ph(rng, 2, 1)[0])
    obj["B"] = io.matrix_to_json(np.zeros((3, 1)))
    with pytest.raises(DimensionError):
        io.system_from_json(obj)


def test_blocks_manifest():
    s = scattering_ph(np.random.default_rng(0), 2, 1)[0]
    obj = io.system_to_json(s, {"state": {"x1": slice(0, 1), "x2": slice(1, 2)}})
    assert obj["blocks"] == {"state": {"x1": [0, 1], "x2": [1, 2]}}


def test_geometric_round_trip(rng):
    s, X = scattering_ph(rng, 2, 1)
    g = dilate(s, X)
    back = io.geometric_from_json(json.loads(io.dumps(io.geometric_to_json(g))))
    assert (back.n, back.r, back.m) == (g.n, g.r, g.m)
    assert back.N.same_as(g.N) and back.C.same_as(g.C)


def test_coupling_modes():
    spec = io.coupling_from_json({"mode": "redheffer", "kernel": None})
    assert spec.mode == "redheffer" and spec.relation is None
    with pytest.raises(FormatError):
        io.coupling_from_json({"mode": "general", "kernel": None})
    with pytest.raises(FormatError):
        io.coupling_from_json({"mode": "series"})
    I = np.eye(2)
    obj = {"mode": "general", "kernel": {"M11": io.matrix_to_json(-I[:, :1]),
                                         "M12": io.matrix_to_json(-I[:, 1:]),
                                         "M21": io.matrix_to_json(I[:, :1]),
                                         "M22": io.matrix_to_json(I[:, 1:])}}
    spec = io.coupling_from_json(obj)
    assert spec.relation.widths == (1, 1, 1, 1)
    assert io.coupling_to_json(spec) == obj


def test_load_json_reports_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"rows": 1,')
    with pytest.raises(FormatError):
        io.load_json(p)


def test_trajectory_csv_layout(rng):
    s, _ = scattering_ph(rng, 2, 1, complex_=True)
    traj = simulate_standard(s, np.zeros(2), gaussian(rng, 3, 1, True))
    text = io.trajectory_csv(traj, np.zeros(3))
    lines = text.splitlines()
    assert lines[0] == ("k,re(x_1),im(x_1),re(x_2),im(x_2),re(u_1),im(u_1),"
                        "re(y_1),im(y_1),residual,margin")
    assert len(lines) == 5
    assert lines[-1].startswith("3,")


def test_inputs_csv_round_trip(tmp_path, rng):
    s, _ = scattering_ph(rng, 2, 2, complex_=True)
    u = gaussian(rng, 4, 2, True)
    traj = simulate_standard(s, np.zeros(2), u)
    p = tmp_path / "traj.csv"
    p.write_text(io.trajectory_csv(traj))
    assert np.array_equal(io.read_inputs_csv(p, 2), u)
    q = tmp_path / "plain.csv"
    q.write_text("1,2\n3,4\n")
    assert np.array_equal(io.read_inputs_csv(q, 2), [[1, 2], [3, 4]])
    with pytest.raises(FormatError):
        io.read_inputs_csv(q, 3)
