import json

import numpy as np
import pytest

from gapmeasures.errors import FormatError
from gapmeasures.fileio import (SampleBatch, dumps_batch, dumps_matrix, read_batch, read_matrix,
                                write_batch, write_matrix)
from gapmeasures.measures import sample_GAP_reweight_batch

from conftest import random_density


class TestMatrixFiles:
    def test_round_trip_exact(self, tmp_path):
        m = random_density(4, 2).matrix
        path = tmp_path / "rho.json"
        write_matrix(path, m)
        assert np.array_equal(read_matrix(path), m)

    def test_rewrite_is_byte_identical(self, tmp_path):
        m = random_density(3, 5).matrix
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_matrix(a, m)
        write_matrix(b, read_matrix(a))
        assert a.read_bytes() == b.read_bytes()

    def test_17_significant_digits(self):
        text = dumps_matrix(np.array([[1 / 3]]))
        assert "0.33333333333333331" in text

    def test_wrong_length_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "entries": [[1, 0], [0, 0], [0, 0]]}))
        with pytest.raises(FormatError):
            read_matrix(path)

    @pytest.mark.parametrize("obj", [
        {"entries": []},
        {"dim": 0, "entries": []},
        {"dim": 1, "entries": [[1, 0, 0]]},
        {"dim": 1, "entries": [["a", 0]]},
    ])
    def test_malformed_rejected(self, tmp_path, obj):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(obj))
        with pytest.raises(FormatError):
            read_matrix(path)

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "nan.json"
        path.write_text('{"dim": 1, "entries": [[NaN, 0]]}')
        with pytest.raises(FormatError):
            read_matrix(path)
        with pytest.raises(FormatError):
            dumps_matrix(np.array([[np.inf]]))

    def test_not_json(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("not json")
        with pytest.raises(FormatError):
            read_matrix(path)


class TestBatchFiles:
    def test_unweighted_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        v = rng.normal(size=(7, 3)) + 1j * rng.normal(size=(7, 3))
        path = tmp_path / "b.csv"
        write_batch(path, SampleBatch(v, "G", 9, rho_file="rho.json"))
        back = read_batch(path)
        assert np.array_equal(back.vectors, v)
        assert back.weights is None
        assert (back.measure, back.seed, back.rho_file) == ("G", 9, "rho.json")

    def test_weighted_round_trip(self, tmp_path):
        v, w = sample_GAP_reweight_batch(random_density(3, 1), 4, 25)
        path = tmp_path / "w.csv"
        write_batch(path, SampleBatch(v, "GA-weighted", 4, w))
        back = read_batch(path)
        assert np.array_equal(back.vectors, v)
        assert np.array_equal(back.weights, w)
        header = json.loads(path.read_text().splitlines()[0])
        assert header["measure"] == "GA-weighted"

    def test_layout(self):
        text = dumps_batch(SampleBatch(np.array([[1 + 2j, 3 - 4j]]), "GAP", 1))
        assert text.splitlines()[1] == "1,2,3,-4"

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "b.csv"
        path.write_text('{"dim": 1, "n": 2, "measure": "G"}\n1,0\n')
        with pytest.raises(FormatError):
            read_batch(path)

    def test_width_mismatch(self, tmp_path):
        path = tmp_path / "b.csv"
        path.write_text('{"dim": 1, "n": 1, "measure": "GA-weighted"}\n1,0\n')
        with pytest.raises(FormatError):
            read_batch(path)

    def test_unknown_measure(self, tmp_path):
        path = tmp_path / "b.csv"
        path.write_text('{"dim": 1, "n": 0, "measure": "X"}\n')
        with pytest.raises(FormatError):
            read_batch(path)
