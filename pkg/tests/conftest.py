import random
from typing import List

import pytest

from app.services.grpcore import Permutation, is_transitive
from app.services.origami import Origami
from app.utils.builtins import builtin_origami


def random_permutation(rng: random.Random, d: int) -> Permutation:
    images = list(range(1, d + 1))
    rng.shuffle(images)
    return Permutation(tuple(images))


def random_origami(rng: random.Random, d: int) -> Origami:
    while True:
        h, v = random_permutation(rng, d), random_permutation(rng, d)
        if is_transitive([h, v], d):
            return Origami(d, h, v)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240607)


@pytest.fixture
def random_origamis(rng) -> List[Origami]:
    return [random_origami(rng, rng.randint(1, 8)) for _ in range(120)]


@pytest.fixture
def s2() -> Origami:
    return builtin_origami("S2")


@pytest.fixture
def l22() -> Origami:
    return builtin_origami("L22")


@pytest.fixture
def torus() -> Origami:
    return builtin_origami("torus")
