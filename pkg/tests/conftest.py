import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rfsel.metrics import LinkParams  # noqa: E402
from rfsel.scene import GeometryConfig, generate_scene  # noqa: E402
from rfsel.txselect import SelectionProblem  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def small_scene(seed, n_t=8, n_c=4, n_s=4, n_paths=4):
    cfg = GeometryConfig(n_t=n_t, n_c=n_c, n_s=n_s, n_paths=n_paths)
    return generate_scene(cfg, np.random.default_rng(seed))


def small_problem(seed, snr_db=10.0, omega_c=0.5, **kw):
    p = LinkParams.from_db(snr_db, omega_c=omega_c)
    return SelectionProblem.from_scene(small_scene(seed, **kw), p), p
