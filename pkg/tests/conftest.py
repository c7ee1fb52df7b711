import numpy as np
import pytest

from orlicz_mce.expectation import ConditionalExpectation
from orlicz_mce.measure import MeasureSpace, SubSigmaAlgebra


def random_space(rng, max_cells=64, atomic_only=False):
    """Random mix of atoms and non-atomic cells with masses spread over decades."""
    n = int(rng.integers(1, max_cells + 1))
    n_atoms = n if atomic_only else int(rng.integers(0, n + 1))
    masses = 10.0 ** rng.uniform(-3, 1, n)
    atoms = {f"a{i}": masses[i] for i in range(n_atoms)}
    nonatomic = {f"b{i}": masses[i] for i in range(n_atoms, n)}
    return MeasureSpace.from_masses(atoms, nonatomic)


def random_algebra(rng, space):
    """Random partition that never mixes atoms and non-atomic cells."""
    blocks = {}
    for kind, cells in (("A", space.atoms), ("B", space.nonatomic)):
        ids = [c.id for c in cells]
        if not ids:
            continue
        labels = rng.integers(0, max(1, len(ids) // 2) + 1, len(ids))
        for lab in np.unique(labels):
            blocks[f"{kind}{lab}"] = tuple(i for i, l in zip(ids, labels) if l == lab)
    return SubSigmaAlgebra(blocks)


def random_nonneg(rng, n, zero_frac=0.3):
    v = rng.lognormal(0.0, 1.0, n)
    v[rng.random(n) < zero_frac] = 0.0
    return v


def random_triple(rng, max_cells=64):
    sp = random_space(rng, max_cells)
    E = ConditionalExpectation(sp, random_algebra(rng, sp))
    return sp, E, random_nonneg(rng, len(sp.cells))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
