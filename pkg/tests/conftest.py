import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from asldigits.synthetic import make_dataset

settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")

FIXTURES = Path(__file__).parent / "fixtures"
DATA_ENV = "ASL_DIGITS_DATA"

# criterion number -> list of (status, message); filled by test_acceptance
ACCEPTANCE = {}


def published_dataset_dir():
    """Directory holding the published X.npy / Y.npy, or None."""
    root = os.environ.get(DATA_ENV)
    if root and (Path(root) / "X.npy").is_file() and (Path(root) / "Y.npy").is_file():
        return Path(root)
    return None


@pytest.fixture(scope="session")
def small_dataset():
    return make_dataset(per_class=10, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        for status, msg in ACCEPTANCE[key]:
            terminalreporter.write_line(f"criterion {key}: {status:7s} {msg}")
