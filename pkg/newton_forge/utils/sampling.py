"""Seeded random rationals. numpy draws integers; everything downstream is exact."""
import os
from fractions import Fraction

import numpy as np

from newton_forge.utils.config import load_config


def resolve_seed(seed=None):
    """
    Resolve the seed: explicit value, then NEWTON_FORGE_SEED, then the config default.

    Args:
        seed (int, optional): Explicit seed.

    Returns:
        int: The seed to use.
    """
    if seed is not None:
        return int(seed)
    env_seed = os.environ.get('NEWTON_FORGE_SEED')
    if env_seed not in (None, ''):
        return int(env_seed)
    return int(load_config()['sampling']['seed'])


def make_rng(seed=None):
    """Create the single numpy Generator a run draws all its randomness from."""
    return np.random.default_rng(resolve_seed(seed))


def random_rational(rng, low=-5, high=5, denominator=None):
    """
    Draw a rational uniformly from a grid inside [low, high].

    Args:
        rng (numpy.random.Generator): Random source.
        low (int, optional): Lower bound. Default is -5.
        high (int, optional): Upper bound. Default is 5.
        denominator (int, optional): Grid denominator; drawn in 1..8 when None.

    Returns:
        Fraction: The sampled value.
    """
    if denominator is None:
        denominator = int(rng.integers(1, 9))
    numerator = int(rng.integers(low * denominator, high * denominator + 1))
    return Fraction(numerator, denominator)


def random_coords(rng, dim, low=-5, high=5, denominator=None):
    """A list of dim random rationals."""
    return [random_rational(rng, low, high, denominator) for _ in range(dim)]


def random_nonzero_coords(rng, dim, low=-5, high=5, denominator=None):
    """Like random_coords but never the zero vector."""
    while True:
        coords = random_coords(rng, dim, low, high, denominator)
        if any(c != 0 for c in coords):
            return coords


def random_ordered_pair(rng, dim, low=-5, high=5, denominator=None):
    """
    Draw x <= y componentwise.

    Returns:
        tuple: (x, y) as lists of Fractions.
    """
    x = random_coords(rng, dim, low, high, denominator)
    y = [xi + random_rational(rng, 0, high - low, denominator) for xi in x]
    return x, y
