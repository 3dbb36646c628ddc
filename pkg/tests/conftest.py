import sys
from pathlib import Path

import numpy as np
import pytest

# Flat layout: modules live at the repository root.
ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import field  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def field_vec(rng):
    def make(shape):
        return rng.integers(0, field.P, size=shape, dtype=np.uint64)
    return make
