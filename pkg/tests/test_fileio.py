"""File format tests: PPM/PGM round trips, the packed mask bitset, the
Plücker blob, and atomic writes."""

import struct

import numpy as np
import pytest

from epiview import fileio
from epiview.camera import intrinsics_from_fov, spherical_pose
from epiview.epipolar import build_mask_set


class TestPpm:
    def test_roundtrip_quantizes_once(self, tmp_path):
        rng = np.random.default_rng(401)
        img = rng.random((6, 9, 3))
        path = tmp_path / "img.ppm"
        fileio.write_ppm(path, img)
        back = fileio.read_ppm(path)
        np.testing.assert_allclose(back, img, atol=0.5 / 255 + 1e-12)
        # a second trip through 8 bits is lossless
        fileio.write_ppm(path, back)
        np.testing.assert_array_equal(fileio.read_ppm(path), back)

    def test_header_bytes(self, tmp_path):
        path = tmp_path / "tiny.ppm"
        fileio.write_ppm(path, np.zeros((2, 3, 3)))
        raw = path.read_bytes()
        assert raw.startswith(b"P6\n3 2\n255\n")
        assert len(raw) == len(b"P6\n3 2\n255\n") + 2 * 3 * 3

    def test_rejects_wrong_shape(self, tmp_path):
        with pytest.raises(ValueError):
            fileio.write_ppm(tmp_path / "x.ppm", np.zeros((4, 4)))


class TestPgm:
    def test_eight_bit_roundtrip(self, tmp_path):
        data = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
        path = tmp_path / "g.pgm"
        fileio.write_pgm(path, data)
        back, maxval = fileio.read_pgm(path)
        assert maxval == 255
        np.testing.assert_array_equal(back, data)

    def test_sixteen_bit_is_big_endian(self, tmp_path):
        data = np.array([[0x0102, 0x0304]], dtype=np.uint16)
        path = tmp_path / "d.pgm"
        fileio.write_pgm(path, data, maxval=65535)
        raw = path.read_bytes()
        assert raw.endswith(bytes([0x01, 0x02, 0x03, 0x04]))
        back, maxval = fileio.read_pgm(path)
        assert maxval == 65535
        np.testing.assert_array_equal(back, data)

    def test_depth_encoding(self, tmp_path):
        depth = np.array([[1.0, 2.0], [4.0, np.inf]])
        encoded = fileio.encode_depth(depth)
        assert encoded[1, 1] == 65535  # empty pixel
        assert encoded[1, 0] == 65534  # farthest finite depth
        assert encoded[0, 0] == round(65534 / 4)
        path = tmp_path / "depth.pgm"
        fileio.write_depth_pgm(path, depth)
        back, _ = fileio.read_pgm(path)
        np.testing.assert_array_equal(back, encoded)


class TestMaskBitset:
    def test_roundtrip(self, tmp_path):
        poses = [spherical_pose(0, 0, 3.5), spherical_pose(20, 80, 3.5),
                 spherical_pose(-10, 200, 3.5)]
        masks = build_mask_set(poses, intrinsics_from_fov(40.26, 8, 8))
        path = tmp_path / "masks.bin"
        fileio.write_mask_bitset(path, masks)
        back = fileio.read_mask_bitset(path)
        assert back.n_views == 3 and back.height == 8 and back.width == 8
        for key in masks.ordered_pairs():
            np.testing.assert_array_equal(back.pairs[key], masks.pairs[key])

    def test_header_layout(self, tmp_path):
        poses = [spherical_pose(0, 0, 3.5), spherical_pose(20, 80, 3.5)]
        masks = build_mask_set(poses, intrinsics_from_fov(40.26, 8, 8))
        path = tmp_path / "masks.bin"
        fileio.write_mask_bitset(path, masks)
        raw = path.read_bytes()
        assert raw[:4] == b"EPIM"
        assert struct.unpack("<III", raw[4:16]) == (2, 8, 8)
        assert len(raw) == 16 + 2 * (64 * 64) // 8

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\0" * 12)
        with pytest.raises(ValueError):
            fileio.read_mask_bitset(path)


class TestPluckerBlob:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(409)
        dirs = rng.standard_normal((4, 5, 3))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        values = np.concatenate([np.cross(rng.standard_normal((4, 5, 3)), dirs), dirs], axis=-1)
        path = tmp_path / "p.bin"
        fileio.write_plucker_blob(path, values)
        back = fileio.read_plucker_blob(path)
        np.testing.assert_array_equal(back, values)
        raw = path.read_bytes()
        assert struct.unpack("<III", raw[:12]) == (4, 5, 6)
        assert len(raw) == 12 + 4 * 5 * 6 * 8


class TestAtomicWrite:
    def test_no_temp_files_left_behind(self, tmp_path):
        path = tmp_path / "out.bin"
        fileio.atomic_write_bytes(path, b"payload")
        assert path.read_bytes() == b"payload"
        assert [p.name for p in tmp_path.iterdir()] == ["out.bin"]

    def test_overwrites_in_place(self, tmp_path):
        path = tmp_path / "out.bin"
        fileio.atomic_write_bytes(path, b"one")
        fileio.atomic_write_bytes(path, b"two")
        assert path.read_bytes() == b"two"
