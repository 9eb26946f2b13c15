"""Round trips for the on-disk formats."""

import struct

import numpy as np
import pytest

from grampa.fileio import (
    read_pgm,
    read_vector,
    read_vector_csv,
    write_pgm,
    write_vector,
    write_vector_csv,
)


class TestPgm:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.uniform(size=(12, 9))
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        back = read_pgm(path)
        assert back.shape == (12, 9)
        assert np.max(np.abs(back - img)) <= 0.5 / 65535 + 1e-12

    def test_header_layout(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm(path, np.zeros((2, 3)))
        data = path.read_bytes()
        assert data.startswith(b"P5\n3 2\n65535\n")
        assert len(data) == len(b"P5\n3 2\n65535\n") + 2 * 3 * 2

    def test_payload_is_big_endian(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm(path, np.array([[1.0]]))
        assert path.read_bytes().endswith(b"\xff\xff")

    def test_values_clipped(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm(path, np.array([[-0.5, 1.5]]))
        back = read_pgm(path)
        assert np.array_equal(back, [[0.0, 1.0]])

    def test_rejects_non_2d(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm(tmp_path / "x.pgm", np.zeros(5))


class TestVector:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        v = rng.standard_normal(37)
        path = tmp_path / "v.bin"
        write_vector(path, v)
        assert np.array_equal(read_vector(path), v)

    def test_layout(self, tmp_path):
        path = tmp_path / "v.bin"
        write_vector(path, [1.0, -2.0])
        data = path.read_bytes()
        assert struct.unpack("<Q", data[:8]) == (2,)
        assert np.frombuffer(data, dtype="<f8", offset=8).tolist() == [1.0, -2.0]

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "v.bin"
        path.write_bytes(struct.pack("<Q", 3) + b"\x00" * 8)
        with pytest.raises(ValueError):
            read_vector(path)

    def test_csv_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        v = rng.standard_normal(11)
        path = tmp_path / "v.csv"
        write_vector_csv(path, v)
        assert np.array_equal(read_vector_csv(path), v)
