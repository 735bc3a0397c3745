import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from colorfpp import ColoringLaw, LatticeBox, sample_color_field


@pytest.fixture(scope="session")
def box3():
    return LatticeBox(2, 1)


@pytest.fixture(scope="session")
def box5():
    return LatticeBox(2, 2)


@pytest.fixture(scope="session")
def field5():
    return sample_color_field(LatticeBox(2, 2), ColoringLaw.uniform(3), 2024)


@st.composite
def law_strategy(draw, max_colors=6):
    m = draw(st.integers(min_value=1, max_value=max_colors))
    weights = draw(
        st.lists(st.integers(min_value=0, max_value=20), min_size=m, max_size=m).filter(
            lambda w: sum(w) > 0
        )
    )
    total = sum(weights)
    return ColoringLaw(tuple(w / total for w in weights))


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
