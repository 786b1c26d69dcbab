import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from newton_forge.utils.config import load_config  # noqa: E402

SAMPLES = ROOT / 'newton_forge' / 'data' / 'samples'


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def config():
    return load_config()


@pytest.fixture
def samples():
    return SAMPLES
