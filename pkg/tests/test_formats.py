import io
import json

import numpy as np
import pytest

from sparse_rmt.ensemble import Deformation, deformation_matrix, random_unit_vector
from sparse_rmt.errors import ConfigurationError
from sparse_rmt.formats import (
    deformation_from_description,
    parse_complex,
    read_deformation,
    read_matrix,
    read_spectrum,
    vector_from_description,
    write_deformation,
    write_matrix,
    write_spectrum,
)


class TestMatrixFiles:
    def test_complex_roundtrip_is_exact(self, tmp_path, rng):
        m = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        write_matrix(tmp_path / "m.txt", m)
        assert np.array_equal(read_matrix(tmp_path / "m.txt"), m)

    def test_real_matrix_reads_back_real(self, tmp_path, rng):
        m = rng.standard_normal((3, 3))
        write_matrix(tmp_path / "m.txt", m)
        back = read_matrix(tmp_path / "m.txt")
        assert back.dtype == np.float64 and np.array_equal(back, m)

    def test_stream(self):
        buf = io.StringIO()
        write_matrix(buf, np.eye(2))
        assert buf.getvalue().splitlines()[0] == "2 2"
        assert len(buf.getvalue().splitlines()) == 5

    def test_bad_header(self, tmp_path):
        (tmp_path / "m.txt").write_text("2\n1 0\n")
        with pytest.raises(ConfigurationError):
            read_matrix(tmp_path / "m.txt")

    def test_wrong_count(self, tmp_path):
        (tmp_path / "m.txt").write_text("2 2\n1 0\n2 0\n")
        with pytest.raises(ConfigurationError):
            read_matrix(tmp_path / "m.txt")

    def test_spectrum_roundtrip(self, tmp_path):
        vals = np.array([1 + 2j, -0.5, 3j])
        write_spectrum(tmp_path / "s.txt", vals)
        assert np.array_equal(read_spectrum(tmp_path / "s.txt"), vals)


class TestComplexParsing:
    @pytest.mark.parametrize("value,expected", [
        ([1.5, 0.8], 1.5 + 0.8j), ("1.5+0.8j", 1.5 + 0.8j), ("1.5+0.8i", 1.5 + 0.8j), (2, 2 + 0j), ("0.5j", 0.5j),
    ])
    def test_forms(self, value, expected):
        assert parse_complex(value) == expected

    @pytest.mark.parametrize("value", ["abc", [1, 2, 3]])
    def test_invalid(self, value):
        with pytest.raises(ConfigurationError):
            parse_complex(value)


class TestDeformationFiles:
    def test_roundtrip(self, tmp_path):
        defm = Deformation([(random_unit_vector(5, 1, True) * 2, random_unit_vector(5, 2, True))])
        write_deformation(tmp_path / "d.json", defm)
        back = read_deformation(tmp_path / "d.json")
        assert np.array_equal(deformation_matrix(back), deformation_matrix(defm))

    def test_mismatched_counts(self, tmp_path):
        (tmp_path / "d.json").write_text(json.dumps({"u": [[[1, 0]]], "v": []}))
        with pytest.raises(ConfigurationError):
            read_deformation(tmp_path / "d.json")

    def test_file_reference_relative_to_base(self, tmp_path):
        defm = Deformation([(np.array([2.0, 0.0]), np.array([1.0, 0.0]))])
        write_deformation(tmp_path / "d.json", defm)
        got = deformation_from_description({"file": "d.json"}, 2, tmp_path)
        assert np.allclose(got.eigenvalues(), [2])
        with pytest.raises(ConfigurationError):
            deformation_from_description({"file": "d.json"}, 3, tmp_path)


class TestVectorDescriptions:
    def test_kinds(self):
        assert np.array_equal(vector_from_description({"kind": "basis", "index": 1, "scale": 2}, 3), [0, 2, 0])
        c = vector_from_description({"kind": "constant"}, 4)
        assert np.allclose(c, 0.5)
        r = vector_from_description({"kind": "random_unit", "seed": 4}, 50)
        assert np.isclose(np.linalg.norm(r), 1)
        v = vector_from_description({"kind": "same_as_u", "scale": 2}, 50, 3 * r)
        assert np.isclose(np.vdot(v, 3 * r), 6)
        e = vector_from_description({"kind": "values", "values": [[1, 1], "2"]}, 2)
        assert np.array_equal(e, [1 + 1j, 2])

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            vector_from_description({"kind": "same_as_u"}, 3)
        with pytest.raises(ConfigurationError):
            vector_from_description({"kind": "values", "values": [1]}, 3)
        with pytest.raises(ConfigurationError):
            vector_from_description({"kind": "sphere"}, 3)
