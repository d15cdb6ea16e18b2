"""Shared fixtures: every test starts from a fresh generator registry and settings."""

import random
from fractions import Fraction
from typing import List

import pytest

from src.config import reset_settings
from src.diffalg import DiffPoly, DerivedGen, gen_id, generic, h, lam, mu, reset_registry, t


@pytest.fixture(autouse=True)
def fresh_registry():
    registry = reset_registry()
    reset_settings()
    yield registry
    reset_registry()


@pytest.fixture
def rng():
    return random.Random(20240917)


def random_poly(rng: random.Random, terms: int = 3, with_lambda: bool = False) -> DiffPoly:
    """Small random polynomial over t2, t3, mu2, mu3 (and λ^{±1} when asked)."""
    pool: List[DiffPoly] = [t(2), t(3), mu(2), mu(3)]
    if with_lambda:
        pool.append(lam())
    out = DiffPoly.zero()
    for _ in range(rng.randint(1, terms)):
        term = DiffPoly.const(Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(0, 2)):
            g = rng.choice(pool)
            dg = DerivedGen(gen_id(g), rng.randint(0, 2), rng.randint(0, 1))
            exp = rng.randint(1, 2)
            if with_lambda and gen_id(g) == gen_id(lam()) and rng.random() < 0.3:
                dg, exp = DerivedGen(gen_id(g)), -1
            term = term * DiffPoly.of(dg, exp)
        term = term * h(Fraction(rng.choice([0, 1, 2, 3]), 2))
        out = out + term
    return out


@pytest.fixture
def poly_factory(rng):
    def make(terms: int = 3, with_lambda: bool = False) -> DiffPoly:
        return random_poly(rng, terms, with_lambda)

    return make


@pytest.fixture
def invertible_u():
    return generic("u", invertible=True)
