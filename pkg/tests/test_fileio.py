import json
import os

import numpy as np
import pytest

from sourcecond import fileio
from sourcecond.errors import InputError


class TestPgm16:
    def test_constant_zero_image(self, tmp_path):
        path = str(tmp_path / "zero.pgm")
        fileio.write_pgm16(path, np.zeros((5, 7)))
        raw = open(path, "rb").read()
        header = b"P5\n7 5\n65535\n"
        assert raw.startswith(header)
        assert raw[len(header):] == b"\x00" * (5 * 7 * 2)
        meta = json.load(open(path + ".json"))
        assert meta == {"min": 0.0, "max": 0.0}

    def test_file_size_arithmetic(self, tmp_path):
        path = str(tmp_path / "p.pgm")
        fileio.write_pgm16(path, np.linspace(0, 1, 400 * 400).reshape(400, 400))
        header_bytes = len(b"P5\n400 400\n65535\n")
        assert os.path.getsize(path) == 400 * 400 * 2 + header_bytes

    def test_roundtrip_restores_scale(self, tmp_path, rng):
        path = str(tmp_path / "r.pgm")
        arr = rng.uniform(-3, 5, (9, 4))
        fileio.write_pgm16(path, arr)
        back = fileio.read_pgm16(path)
        assert back.shape == arr.shape
        # 16-bit quantization of the min-max range
        span = arr.max() - arr.min()
        assert np.max(np.abs(back - arr)) <= span / 65535.0

    def test_rejects_non_finite(self, tmp_path):
        with pytest.raises(InputError):
            fileio.write_pgm16(str(tmp_path / "bad.pgm"), np.array([[np.nan, 1.0]]))


class TestPfm:
    def test_roundtrip_bit_identical(self, tmp_path, rng):
        path = str(tmp_path / "a.pfm")
        arr = rng.standard_normal((6, 11)).astype(np.float32)
        fileio.write_pfm(path, arr)
        back = fileio.read_pfm(path)
        assert back.dtype == np.float32
        assert back.tobytes() == arr.tobytes()

    def test_two_channel_field_roundtrip(self, tmp_path, rng):
        path = str(tmp_path / "q.pfm")
        q = rng.standard_normal((4, 5, 2)).astype(np.float32)
        fileio.write_pfm(path, q)
        back = fileio.read_pfm(path)
        assert back.shape == (4, 5, 3)
        assert not np.any(back[:, :, 2])
        assert fileio.field_from_pfm(back).astype(np.float32).tobytes() == q.tobytes()

    def test_write_read_write_stable(self, tmp_path, rng):
        p1, p2 = str(tmp_path / "1.pfm"), str(tmp_path / "2.pfm")
        fileio.write_pfm(p1, rng.standard_normal((8, 3)))
        fileio.write_pfm(p2, fileio.read_pfm(p1))
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_header_is_little_endian_pf(self, tmp_path):
        path = str(tmp_path / "h.pfm")
        fileio.write_pfm(path, np.ones((2, 3)))
        with open(path, "rb") as f:
            assert f.readline() == b"Pf\n"
            assert f.readline() == b"3 2\n"  # width height
            assert float(f.readline()) == -1.0


class TestSeriesCsv:
    def test_line_count(self, tmp_path):
        path = str(tmp_path / "s.csv")
        fileio.write_series_csv(path, {"a": [1.0, 2.0, 3.0], "b": [4.0, 5.0, 6.0]})
        text = open(path, "r", newline="").read()
        assert text.count("\r\n") == 4
        assert len(text.splitlines()) == 4

    def test_seventeen_digit_floats(self, tmp_path):
        path = str(tmp_path / "f.csv")
        fileio.write_series_csv(path, {"x": [0.1]})
        assert "0.10000000000000001" in open(path).read()

    def test_roundtrip_bitwise(self, tmp_path, rng):
        path = str(tmp_path / "r.csv")
        cols = {"x": rng.standard_normal(50), "y": 1e30 * rng.standard_normal(50),
                "z": 1e-30 * rng.standard_normal(50)}
        fileio.write_series_csv(path, cols)
        back = fileio.read_series_csv(path)
        for name, vals in cols.items():
            assert np.array_equal(back[name], vals)

    def test_length_mismatch(self, tmp_path):
        with pytest.raises(InputError):
            fileio.write_series_csv(str(tmp_path / "bad.csv"), {"a": [1.0], "b": [1.0, 2.0]})


class TestConfigHash:
    def test_stable_under_key_reordering(self):
        h1 = fileio.config_hash({"a": 1, "b": [1, 2], "c": {"x": 0.5, "y": None}})
        h2 = fileio.config_hash({"c": {"y": None, "x": 0.5}, "b": [1, 2], "a": 1})
        assert h1 == h2

    def test_sensitive_to_values(self):
        assert fileio.config_hash({"a": 1}) != fileio.config_hash({"a": 2})


class TestManifest:
    def test_requires_existing_artifacts(self, tmp_path):
        m = fileio.RunManifest(command="x", config_hash="00", seed=0,
                               artifacts=["missing.csv"])
        with pytest.raises(InputError):
            fileio.write_manifest(str(tmp_path), m)

    def test_written_manifest_contents(self, tmp_path):
        open(tmp_path / "a.csv", "w").write("x\r\n")
        m = fileio.RunManifest(command="demo", config_hash="ff", seed=3,
                               artifacts=["a.csv"], timings={"total": 0.5})
        path = fileio.write_manifest(str(tmp_path), m)
        data = json.load(open(path))
        assert data["command"] == "demo"
        assert data["seed"] == 3
        assert data["artifacts"] == ["a.csv"]
        assert "sourcecond" in data["versions"] and "numpy" in data["versions"]


class TestLoadGrayscale:
    def test_pfm_color_uses_luma(self, tmp_path):
        path = str(tmp_path / "c.pfm")
        rgb = np.zeros((4, 4, 3), dtype=np.float32)
        rgb[:, :, 1] = 1.0  # pure green
        fileio.write_pfm(path, rgb)
        img = fileio.load_grayscale(path)
        assert img.shape == (4, 4)
        # constant image normalizes to zero
        assert not np.any(img)

    def test_p5_and_normalization(self, tmp_path, rng):
        path = str(tmp_path / "g.pgm")
        arr = rng.uniform(2.0, 3.0, (6, 6))
        fileio.write_pgm16(path, arr)
        img = fileio.load_grayscale(path)
        assert img.min() == 0.0 and img.max() == 1.0
