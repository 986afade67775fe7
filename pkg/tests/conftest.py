import numpy as np
import pytest

from soundstage.vecmath import Embedding


def emb(*values: float, dim: int | None = None) -> Embedding:
    """Build an embedding from leading components, zero-padded to dim."""
    v = list(values)
    if dim is not None:
        v = v + [0.0] * (dim - len(v))
    return Embedding(np.asarray(v, dtype=np.float64))


def unit(*values: float, dim: int | None = None) -> Embedding:
    return emb(*values, dim=dim).unit()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
