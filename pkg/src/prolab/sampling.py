"""Seeded rational sampling used by every randomized check.

All randomness in the package flows through `seeded`, so a fixed seed makes
every sampled verdict reproducible byte for byte.
"""

from __future__ import annotations

import random
from fractions import Fraction

_DENOMINATORS = (1, 1, 1, 2, 2, 3)


def seeded(seed: int, *tags) -> random.Random:
    key = str(seed) + "".join(f"/{t}" for t in tags)
    return random.Random(key)


def rational(rng: random.Random, span: int = 3) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.choice(_DENOMINATORS))


def nonzero_rational(rng: random.Random, span: int = 3) -> Fraction:
    while True:
        value = rational(rng, span)
        if value:
            return value


def rational_vector(rng: random.Random, n: int, span: int = 3) -> tuple[Fraction, ...]:
    return tuple(rational(rng, span) for _ in range(n))
