import numpy as np
import pytest

from gmcf.gridio import read_grid, write_grid


@pytest.mark.parametrize("shape", [(17,), (9, 13), (5, 6, 7)])
def test_roundtrip_bitwise(tmp_path, shape):
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(shape)
    origin = rng.standard_normal(len(shape))
    path = tmp_path / "dump.gmcf"
    write_grid(path, vals, 0.125, origin)
    back = read_grid(path)
    assert back.dim == len(shape)
    assert back.spacing == 0.125
    assert np.array_equal(back.origin, origin)
    assert np.array_equal(back.values, vals)
    assert back.values.dtype == np.float64


def test_write_is_deterministic(tmp_path):
    vals = np.linspace(0, 1, 12).reshape(3, 4)
    p1, p2 = tmp_path / "a.gmcf", tmp_path / "b.gmcf"
    write_grid(p1, vals, 0.5, [0.0, 0.0])
    write_grid(p2, vals, 0.5, [0.0, 0.0])
    assert p1.read_bytes() == p2.read_bytes()


def test_rejects_bad_inputs(tmp_path):
    with pytest.raises(ValueError):
        write_grid(tmp_path / "x.gmcf", np.zeros((2, 2, 2, 2)), 1.0, np.zeros(4))
    with pytest.raises(ValueError):
        write_grid(tmp_path / "x.gmcf", np.zeros((2, 2)), 1.0, np.zeros(3))


def test_rejects_corrupt_files(tmp_path):
    bad = tmp_path / "bad.gmcf"
    bad.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ValueError):
        read_grid(bad)
    good = tmp_path / "good.gmcf"
    write_grid(good, np.ones((4, 4)), 1.0, [0.0, 0.0])
    blob = good.read_bytes()
    trunc = tmp_path / "trunc.gmcf"
    trunc.write_bytes(blob[:-9])
    with pytest.raises(ValueError):
        read_grid(trunc)
