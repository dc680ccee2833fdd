from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from shm import appendix
from shm.errors import BadLabel, CorruptField, ParseError, RaggedRow, VersionMismatch
from shm.fileio import dump_model, load_dataset, load_model, read_table, save_model, write_dataset
from shm.train import KernelSpec, TrainConfig, TrainingSet, train

DATA = Path(__file__).parent / "data"


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_two_row_file(tmp_path):
    ts = load_dataset(write(tmp_path, "x1,x2,y1,y2,d\n1,2,3,4,1\n5,6,7,8,-1\n"))
    assert (ts.m, ts.z, ts.n) == (2, 2, 2)
    np.testing.assert_array_equal(ts.x, [[1, 5], [2, 6]])
    np.testing.assert_array_equal(ts.y, [[3, 7], [4, 8]])
    np.testing.assert_array_equal(ts.d, [1, -1])


def test_columns_mapped_by_name(tmp_path):
    ts = load_dataset(write(tmp_path, "d,y1,x2,x1\n1,3,2,1\n-1,6,5,4\n"))
    np.testing.assert_array_equal(ts.x, [[1, 4], [2, 5]])
    np.testing.assert_array_equal(ts.y, [[3, 6]])


def test_appendix_fixture_file_loads_losslessly():
    path = DATA / "appendix_a.csv"
    ts = load_dataset(path)
    assert (ts.n, ts.m, ts.z) == (16, 2, 2)
    np.testing.assert_array_equal(ts.d, [-1, 1] * 8)
    np.testing.assert_array_equal(ts.x, appendix.X)
    np.testing.assert_array_equal(ts.y, appendix.Y)
    rows = path.read_text().splitlines()[1:]
    for i, row in enumerate(rows):
        fields = row.split(",")
        for text, value in zip(fields[:4], [*ts.x[:, i], *ts.y[:, i]]):
            assert Decimal(text) == Decimal(repr(float(value)))


def test_write_then_read(tmp_path):
    ts = appendix.training_set()
    path = tmp_path / "a.csv"
    write_dataset(ts, path)
    back = load_dataset(path)
    np.testing.assert_array_equal(back.x, ts.x)
    np.testing.assert_array_equal(back.y, ts.y)
    np.testing.assert_array_equal(back.d, ts.d)


def test_bad_label(tmp_path):
    with pytest.raises(BadLabel) as err:
        load_dataset(write(tmp_path, "x1,y1,d\n1,2,1\n3,4,0\n"))
    assert err.value.line == 3
    assert "line 3" in str(err.value)


def test_ragged_row(tmp_path):
    with pytest.raises(RaggedRow) as err:
        load_dataset(write(tmp_path, "x1,y1,d\n1,2,1\n3,4\n"))
    assert err.value.line == 3


def test_non_numeric_field(tmp_path):
    with pytest.raises(ParseError) as err:
        load_dataset(write(tmp_path, "x1,y1,d\n1,2,1\n3,4 ,-1\n5,abc,1\n"))
    assert (err.value.line, err.value.column) == (4, 2)


def test_decimal_comma_rejected(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, 'x1,y1,d\n"1,5",2,1\n3,4,-1\n'))


@pytest.mark.parametrize("header", ["x1,y1", "x1,x3,y1,d", "x1,z1,y1,d", "y1,d", "x1,x1,y1,d"])
def test_bad_headers(tmp_path, header):
    width = len(header.split(","))
    body = "\n".join(",".join(["1"] * width) for _ in range(2))
    with pytest.raises(ParseError) as err:
        load_dataset(write(tmp_path, header + "\n" + body + "\n"))
    assert err.value.line == 1


def test_labels_optional_for_prediction(tmp_path):
    x, y, d = read_table(write(tmp_path, "x1,y1\n1,2\n3,4\n"), require_labels=False)
    assert d is None
    np.testing.assert_array_equal(x, [[1, 3]])


def _probe(model, seed=0, count=100):
    rng = np.random.default_rng(seed)
    return rng.uniform(-10, 10, (model.m, count)), rng.uniform(-15, 15, (model.z, count))


def test_model_round_trip_is_bit_identical(tmp_path, appendix_set, appendix_model):
    path = tmp_path / "m.shm"
    save_model(appendix_model, path)
    back = load_model(path)
    ts = appendix_set
    np.testing.assert_array_equal(back.decide(ts.x, ts.y), appendix_model.decide(ts.x, ts.y))
    x, y = _probe(appendix_model)
    np.testing.assert_array_equal(back.decide(x, y), appendix_model.decide(x, y))
    np.testing.assert_array_equal(back.decide(x, y, path="expansion"),
                                  appendix_model.decide(x, y, path="expansion"))
    assert back.meta == appendix_model.meta
    assert dump_model(back) == dump_model(appendix_model)


def test_kernel_model_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    ts = TrainingSet(rng.standard_normal((2, 7)), rng.standard_normal((3, 7)),
                     [1, -1, 1, -1, 1, -1, 1])
    model = train(ts, KernelSpec.polynomial(3, 0.5), TrainConfig(qp_mode="kkt", c=5.0))
    path = tmp_path / "k.shm"
    save_model(model, path)
    back = load_model(path)
    assert back.mode == "kernel-expansion"
    assert back.kernel == model.kernel
    x, y = _probe(model)
    np.testing.assert_array_equal(back.decide(x, y), model.decide(x, y))


def test_version_mismatch(tmp_path, appendix_model):
    text = dump_model(appendix_model).replace("format_version 1", "format_version 0")
    with pytest.raises(VersionMismatch):
        load_model(write(tmp_path, text, "m.shm"))


@pytest.mark.parametrize("cut", [0.3, 0.6, 0.95])
def test_truncated_model_file(tmp_path, appendix_model, cut):
    text = dump_model(appendix_model)
    with pytest.raises(CorruptField):
        load_model(write(tmp_path, text[: int(len(text) * cut)], "m.shm"))


def test_corrupt_numeric_field(tmp_path, appendix_model):
    text = dump_model(appendix_model).replace("\nb ", "\nb x", 1)
    with pytest.raises(CorruptField):
        load_model(write(tmp_path, text, "m.shm"))


def test_not_a_model_file(tmp_path):
    with pytest.raises(CorruptField):
        load_model(write(tmp_path, "hello\n", "m.shm"))
