"""Dataset containers and the CSV interchange format."""

import numpy as np
import pytest

from conftest import make_dataset
from spatreg import (
    CurveEstimate,
    DuplicateLocationError,
    SpatialDataset,
    read_dataset_csv,
    write_dataset_csv,
)
from spatreg.errors import DatasetFormatError


class TestSpatialDataset:
    def test_basic_construction(self):
        d = make_dataset([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
        assert d.n == 3
        assert d.locations.shape == (3, 2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            SpatialDataset([[0, 0], [1, 1]], [1.0], [1.0, 2.0])

    def test_too_small(self):
        with pytest.raises(ValueError, match="at least two"):
            SpatialDataset([[0, 0]], [1.0], [1.0])

    def test_duplicate_locations(self):
        with pytest.raises(DuplicateLocationError):
            SpatialDataset([[0, 0], [0, 0]], [1.0, 2.0], [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            SpatialDataset([[0, 0], [1, 1]], [1.0, np.nan], [1.0, 2.0])

    def test_duplicate_covariates_allowed(self):
        d = make_dataset([1.0, 1.0], [0.0, 1.0])
        assert d.n == 2


class TestCurveEstimate:
    def test_basic(self):
        c = CurveEstimate([0.0, 1.0], [2.0, np.nan], 0.5, "mean")
        assert list(c.degenerate_mask) == [False, True]

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            CurveEstimate([1.0, 0.0], [1.0, 2.0], 0.5, "mean")

    def test_tied_points_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            CurveEstimate([0.0, 0.0], [1.0, 2.0], 0.5, "mean")

    def test_bad_bandwidth(self):
        with pytest.raises(ValueError, match="bandwidth"):
            CurveEstimate([0.0], [1.0], 0.0, "mean")

    def test_bad_tag(self):
        with pytest.raises(ValueError, match="estimator_tag"):
            CurveEstimate([0.0], [1.0], 0.5, "spline")


class TestCsv:
    def test_round_trip(self, tmp_path, rng):
        d = make_dataset(rng.normal(size=5), rng.normal(size=5))
        path = tmp_path / "data.csv"
        write_dataset_csv(d, path)
        back = read_dataset_csv(path)
        np.testing.assert_array_equal(back.locations, d.locations)
        np.testing.assert_array_equal(back.x, d.x)
        np.testing.assert_array_equal(back.y, d.y)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n1,2,3,4\n")
        with pytest.raises(DatasetFormatError, match="line 1"):
            read_dataset_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DatasetFormatError, match="line 1"):
            read_dataset_csv(path)

    def test_bad_field_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u,v,x,y\n0,0,1,2\n1,1,oops,3\n")
        with pytest.raises(DatasetFormatError, match="line 3") as err:
            read_dataset_csv(path)
        assert err.value.line == 3

    def test_wrong_arity_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u,v,x,y\n0,0,1\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            read_dataset_csv(path)

    def test_single_row_rejected(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("u,v,x,y\n0,0,1,2\n")
        with pytest.raises(DatasetFormatError, match="two data rows"):
            read_dataset_csv(path)
