"""
Shared fixtures: small layouts and translate systems for each preset.
"""

import os
import sys

import numpy as np
import pytest

# Add the project root to the path so `fibers`, `models` and `utils` import
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fibers.action import TranslateSystem  # noqa: E402
from fibers.group import lattice_gamma1, preset  # noqa: E402
from fibers.range_function import orthonormalize_fibers  # noqa: E402
from fibers.transform import make_layout, random_field, t_transform  # noqa: E402

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")

# (group, S, q, j_half) small enough for brute-force loops
SMALL_LAYOUTS = {
    "abelian(1)": ("abelian(1)", 8, 8, 2),
    "abelian(2)": ("abelian(2)", 3, 3, 1),
    "heisenberg3": ("heisenberg3", 4, 4, 1),
    "twostep6": ("twostep6", 2, 2, 1),
    "threestep5": ("threestep5", 2, 2, 1),
}


def small_layout(name: str):
    group, S, q, j_half = SMALL_LAYOUTS[name]
    return make_layout(preset(group), S, q, j_half)


def random_system(layout, rng, generators: int = 1, radius: int = 1) -> TranslateSystem:
    fields = [t_transform(random_field(layout, rng)) for _ in range(generators)]
    return TranslateSystem.build(fields, lattice_gamma1(layout.group, radius))


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def heisenberg_layout():
    return small_layout("heisenberg3")


@pytest.fixture
def heisenberg_system(heisenberg_layout, rng):
    return random_system(heisenberg_layout, rng)


@pytest.fixture(scope="module")
def orthonormal_system():
    """heisenberg3 with S=4, q=12, j in {-1, 0}, radius 1, orthonormalized"""
    layout = make_layout(preset("heisenberg3"), S=4, q=12, j_half=1)
    system = random_system(layout, np.random.default_rng(99))
    return orthonormalize_fibers(system)
