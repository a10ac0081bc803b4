from fractions import Fraction as F

import numpy as np
import pytest

from helpers import suite, three_color, two_color
from triurn.errors import NotApplicable, TooLarge
from triurn.matrix import block_structure, validate
from triurn.oracle import (
    chi_square_against,
    composition_from_draws,
    enumerate_distribution,
    exact_mean,
    verify_martingale_M,
    verify_martingale_U,
)
from triurn.simulator import run_ensemble

HALF = two_color("1/2")


def test_exact_mean_examples():
    assert exact_mean(HALF, 1) == (F(3, 4), F(5, 4))
    m = validate([[0, 1], [0, 1]], ["1/3", "2/3"])
    assert all(exact_mean(m, n)[0] == F(1, 3) for n in range(12))
    assert exact_mean(HALF, 0) == HALF.initial


def test_enumerate_one_step():
    tree = enumerate_distribution(HALF, 1)
    assert dict(tree.leaves) == {(F(1), F(1)): F(1, 2), (F(1, 2), F(3, 2)): F(1, 2)}


def test_enumerate_single_color():
    tree = enumerate_distribution(validate([[1]], [1]), 7)
    assert tree.leaves == [((F(8),), F(1))]


@pytest.mark.parametrize("m", suite(), ids=lambda m: str([str(x) for x in m.diagonal]))
def test_enumeration_mean_and_mass(m):
    tree = enumerate_distribution(m, 8)
    for n, layer in enumerate(tree.layers):
        assert sum(layer.values()) == 1
        assert all(sum(c) == n + 1 for c in layer)
        assert tree.mean(n) == exact_mean(m, n)


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        enumerate_distribution(validate([[F(1, 8)] * 8] + [[0] * i + [F(1, 8 - i)] * (8 - i) for i in range(1, 8)],
                                        [F(1, 8)] * 8), 40)


def test_martingale_U_examples():
    assert verify_martingale_U(HALF, 0, 4) == 0
    assert verify_martingale_U(HALF, 1, 4) == 0
    assert verify_martingale_U(validate([[1]], [1]), 0, 5) == 0
    m = three_color("1/2", "1/2", "1/2")
    with pytest.raises(NotApplicable):
        verify_martingale_U(m, 1, 3)


def test_martingale_M_examples():
    assert verify_martingale_M(HALF, 1, 4) == 0
    assert verify_martingale_M(HALF, 0, 4) == 0
    m = validate([["0.3", "0.2", "0.5"], [0, "0.6", "0.4"], [0, 0, 1]], ["1/3"] * 3)
    assert verify_martingale_M(m, 1, 3) == 0
    with pytest.raises(TooLarge):
        verify_martingale_M(m, 1, 30)


@pytest.mark.parametrize("m", suite()[:6] + suite()[10:16], ids=lambda m: str([str(x) for x in m.diagonal]))
def test_martingales_exact_on_suite(m):
    for b in block_structure(m):
        if b.nu == 0:
            assert verify_martingale_U(m, b.index, 5) == 0
    for color in range(m.dim):
        assert verify_martingale_M(m, color, 5) == 0


def test_composition_from_draws():
    m = three_color("1/2", "1/2", "1/2")
    assert composition_from_draws(m, [0, 0, 0]) == m.initial
    c = composition_from_draws(m, [2, 1, 0])
    assert c == (F(1, 3) + 1, F(1, 3) + 1 + F(1, 2), F(1, 3) + F(1, 2))


def test_chi_square_agrees_with_simulation():
    m = two_color("1/3", ("1/4", "3/4"))
    tree = enumerate_distribution(m, 6)
    ens = run_ensemble(m, 6, 20000, master_seed=1, schedule=[6], track_u=False)
    res = chi_square_against(m, tree, ens.draws[:, -1, :])
    assert res.pvalue > 1e-3
    assert res.dof == res.bins - 1


def test_chi_square_rejects_wrong_law():
    m = two_color("1/3", ("1/4", "3/4"))
    other = two_color("1/3", ("1/2", "1/2"))
    tree = enumerate_distribution(m, 6)
    ens = run_ensemble(other, 6, 20000, master_seed=1, schedule=[6], track_u=False)
    assert chi_square_against(m, tree, ens.draws[:, -1, :]).pvalue < 1e-6


def test_chi_square_rejects_impossible_atom():
    m = two_color("1/3")
    tree = enumerate_distribution(m, 2)
    with pytest.raises(ValueError):
        chi_square_against(m, tree, np.array([[5, 5]]))
