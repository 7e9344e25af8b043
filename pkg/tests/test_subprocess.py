import sys

import numpy as np
import pytest

from shapbox import SubprocessModel, encode_request, explain
from shapbox.errors import SubprocessAdapterError

from conftest import FIXTURE_DIR


def _spawn(name, *args, timeout=10.0):
    command = " ".join([sys.executable, str(FIXTURE_DIR / name), *args])
    return SubprocessModel(command, timeout=timeout)


def test_encode_request_golden():
    assert encode_request(1, [[3.0, 4.0]]) == '{"id":1,"rows":[[3.0,4.0]]}'


def test_round_trip_prediction():
    with _spawn("linear_child.py") as model:
        out = model([[3.0, 4.0], [0.0, 0.0]])
        assert out.tolist() == [2.5, 0.5]


def test_child_serves_many_batches():
    with _spawn("linear_child.py") as model:
        for i in range(5):
            assert model([[float(i), 0.0]]).tolist() == [2.0 * i + 0.5]


def test_wire_bytes_golden(tmp_path):
    log = tmp_path / "wire.log"
    with _spawn("recording_child.py", str(log)) as model:
        model([[3.0, 4.0]])
        model([[1.0, 2.0], [5.0, 6.0]])
    assert log.read_text() == (
        '{"id":1,"rows":[[3.0,4.0]]}\n'
        '{"id":2,"rows":[[1.0,2.0],[5.0,6.0]]}\n'
    )


def test_id_mismatch():
    with _spawn("mismatch_child.py") as model:
        with pytest.raises(SubprocessAdapterError, match="does not match"):
            model([[1.0]])


def test_timeout():
    with _spawn("slow_child.py", timeout=0.5) as model:
        with pytest.raises(SubprocessAdapterError, match="did not respond"):
            model([[1.0]])


def test_child_exits_early():
    with _spawn("exit_child.py") as model:
        with pytest.raises(SubprocessAdapterError, match="exited before answering"):
            model([[1.0]])


def test_unparseable_response():
    with _spawn("garbage_child.py") as model:
        with pytest.raises(SubprocessAdapterError, match="unparseable"):
            model([[1.0]])


def test_wrong_prediction_count():
    with _spawn("short_child.py") as model:
        with pytest.raises(SubprocessAdapterError, match="expected 2 predictions"):
            model([[1.0], [2.0]])


def test_non_numeric_prediction():
    with _spawn("string_child.py") as model:
        with pytest.raises(SubprocessAdapterError, match="non-numeric"):
            model([[1.0]])


def test_launch_failure():
    with pytest.raises(SubprocessAdapterError, match="failed to launch"):
        SubprocessModel("/nonexistent/binary-xyz")


def test_interchangeable_with_in_process_model():
    # the adapter plugs into the explainer and reproduces the in-process
    # linear result f(a, b) = 2a - b + 0.5 exactly
    x = [3.0, 4.0]
    bg = [[1.0, 2.0]]
    with _spawn("linear_child.py") as model:
        result = explain(model, x, bg)
    assert result.base_value == 0.5
    assert result.phi.tolist() == [4.0, -2.0]


def test_close_is_idempotent():
    model = _spawn("linear_child.py")
    model.close()
    model.close()


def test_outputs_are_float_array():
    with _spawn("linear_child.py") as model:
        out = model(np.array([[1.0, 1.0]]))
        assert isinstance(out, np.ndarray)
        assert out.dtype == float
