import random
from fractions import Fraction

import pytest
from hypothesis import settings

import definetti as d

settings.register_profile("suite", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def three_atom_mu():
    """The reference three-atom measure {0.2: 0.3, 0.5: 0.4, 0.9: 0.3}."""
    return d.MixingMeasure(
        (
            (Fraction(1, 5), Fraction(3, 10)),
            (Fraction(1, 2), Fraction(2, 5)),
            (Fraction(9, 10), Fraction(3, 10)),
        )
    )


@pytest.fixture(scope="session")
def fair_coin():
    return d.MixingMeasure(((Fraction(1, 2), Fraction(1)),))


def random_rational_measure(rng: random.Random, max_atoms: int = 4,
                            max_den: int = 12) -> d.MixingMeasure:
    """Seeded random discrete measure with small rational data."""
    n_atoms = rng.randint(1, max_atoms)
    locs = set()
    while len(locs) < n_atoms:
        den = rng.randint(1, max_den)
        locs.add(Fraction(rng.randint(0, den), den))
    locs = sorted(locs)
    raw = [Fraction(rng.randint(1, 9)) for _ in locs]
    total = sum(raw)
    return d.MixingMeasure(tuple((p, w / total) for p, w in zip(locs, raw)))
