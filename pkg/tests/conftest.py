import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def write_mesh(tmp_path):
    """Write mesh-format text to a temp file, return its path."""

    def _write(text: str, name: str = "m.mesh"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write
