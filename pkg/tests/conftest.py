import numpy as np
import pytest
from hypothesis import settings

from superteich import builders
from superteich.grassmann import GrassmannNumber

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SUITE_TYPES = [(0, 3), (0, 4), (1, 1), (1, 2), (2, 1)]
SUITE_PER_TYPE = 40
SUITE_SEED = 20240611


def make_suite(seed: int = SUITE_SEED, per_type: int = SUITE_PER_TYPE):
    rng = np.random.default_rng(seed)
    out = []
    for g, s in SUITE_TYPES:
        for _ in range(per_type):
            out.append(builders.random_surface(g, s, rng))
    return out


@pytest.fixture(scope="session")
def suite():
    return make_suite()


def random_grassmann(rng, n: int, parity: str | None = None, coeff: float = 10.0, density: float = 0.5) -> GrassmannNumber:
    """Random value on ``n`` generators; ``parity`` restricts to even or odd monomials."""
    masks = []
    for m in range(1 << n):
        k = bin(m).count("1")
        if parity == "even" and k % 2:
            continue
        if parity == "odd" and k % 2 == 0:
            continue
        if m == 0 or rng.random() < density:
            masks.append(m)
    coeffs = rng.uniform(-coeff, coeff, size=len(masks))
    return GrassmannNumber.from_masks(n, masks, coeffs)
