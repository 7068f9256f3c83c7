import numpy as np
import pytest

from tsfingerprint.dataio import TimeSeriesDataset, TimeSeriesInstance


def make_dataset(rng, name, n_classes=None, per_class=None, length=None, constant=False):
    """Random dataset; lengths may vary per instance when length is None."""
    n_classes = n_classes or int(rng.integers(1, 6))
    train, test = [], []
    for c in range(n_classes):
        count = per_class or int(rng.integers(2, 8))
        for _ in range(count):
            t = length or int(rng.integers(2, 30))
            values = np.full(t, 1.5) if constant else rng.normal(size=t)
            train.append(TimeSeriesInstance(values, f"c{c}"))
        test.append(TimeSeriesInstance(rng.normal(size=length or 5), f"c{c}"))
    return TimeSeriesDataset(name=name, train_instances=train, test_instances=test)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
