"""Shared model builders for the test suite."""

import random
from fractions import Fraction as F

from triurn.matrix import validate

DIAGONALS = [F(0), F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4)]


def random_matrix(rng: random.Random, dim: int | None = None):
    """Random balanced triangular rational model.

    Diagonals come from a small set so ties (and log corrections) are common;
    off-diagonal entries are zero with probability 1/2.
    """
    K1 = dim if dim is not None else rng.randint(1, 8)
    rows = []
    for i in range(K1 - 1):
        d = rng.choice(DIAGONALS)
        w = [rng.randint(1, 4) if rng.random() < 0.5 else 0 for _ in range(i + 1, K1)]
        if sum(w) == 0:
            w[rng.randrange(len(w))] = 1
        total = sum(w)
        rows.append([F(0)] * i + [d] + [(1 - d) * x / total for x in w])
    rows.append([F(0)] * (K1 - 1) + [F(1)])
    c0 = [rng.randint(1, 5) for _ in range(K1)]
    return validate(rows, [F(c, sum(c0)) for c in c0])


def three_color(r11, r22, r12, c0=("1/3", "1/3", "1/3")):
    r11, r22, r12 = F(r11), F(r22), F(r12)
    return validate([[r11, r12, 1 - r11 - r12], [0, r22, 1 - r22], [0, 0, 1]], list(c0))


def two_color(r, c0=("1/2", "1/2")):
    r = F(r)
    return validate([[r, 1 - r], [0, 1]], list(c0))


def suite():
    """Fixed 2- and 3-color models with rational entries."""
    models = [two_color(r, c0) for r in ("0", "1/4", "1/2", "2/3", "1")
              for c0 in (("1/2", "1/2"), ("1/5", "4/5"))]
    models += [
        three_color("1/2", "1/2", "1/2"),
        three_color("3/5", "1/5", "3/10"),
        three_color("3/5", "3/10", "1/5"),
        three_color("1/2", "3/10", "0"),
        three_color("1/2", "0", "0"),
        three_color("0", "1/2", "1/4"),
        three_color("0", "0", "1/2"),
        three_color("1/3", "2/3", "1/6", ("1/6", "1/3", "1/2")),
        three_color("3/10", "3/5", "1/5"),
        three_color("1/4", "1/4", "1/2", ("1/2", "1/4", "1/4")),
        validate([["1/2", 0, "1/2"], [0, "3/10", "7/10"], [0, 0, 1]], ["1/3", "1/3", "1/3"]),
        validate([["1/2", 0, "1/2"], [0, "1/2", "1/2"], [0, 0, 1]], ["1/3", "1/3", "1/3"]),
        validate([[0, 1, 0], [0, 0, 1], [0, 0, 1]], ["1/2", "1/4", "1/4"]),
    ]
    return models
