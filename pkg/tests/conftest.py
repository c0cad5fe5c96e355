import numpy as np
import pytest

from spatreg import SpatialDataset


def make_dataset(x, y):
    """Dataset with the given covariates/responses on distinct dummy locations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    locations = np.column_stack([np.arange(x.size, dtype=float), np.zeros(x.size)])
    return SpatialDataset(locations, x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240614)
