from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_matrix
from triurn.errors import (
    InitialLengthMismatch,
    InitialSumNotOne,
    InvalidPermutation,
    NegativeEntry,
    NonPositiveInitial,
    NonSquare,
    NotTriangular,
    RowSumNotOne,
)
from triurn.matrix import (
    apply_permutation,
    block_structure,
    check_increasing_order,
    check_unique_arrangement,
    running_maxima,
    to_fraction,
    validate,
)


def diag_model(diag):
    """Upper bidiagonal model with the given diagonal; off-diagonal mass goes to the next color."""
    n = len(diag)
    rows = []
    for i, d in enumerate(diag):
        d = F(d)
        row = [F(0)] * n
        row[i] = d
        if i + 1 < n:
            row[i + 1] = 1 - d
        rows.append(row)
    return validate(rows, [F(1, n)] * n)


def test_single_color_is_valid():
    m = validate([[1]], [1])
    assert m.dim == 1
    assert m.entries == ((F(1),),)


def test_two_color_valid():
    m = validate([["0.5", "0.5"], [0, 1]], ["0.5", "0.5"])
    assert m[0, 1] == F(1, 2)
    assert m.initial == (F(1, 2), F(1, 2))


def test_row_sum_not_one():
    with pytest.raises(RowSumNotOne) as exc:
        validate([["0.5", "0.4"], [0, 1]], ["0.5", "0.5"])
    assert exc.value.i == 0


@pytest.mark.parametrize("raw, init, err", [
    ([[1, 0]], [1], NonSquare),
    ([["1.5", "-0.5"], [0, 1]], ["0.5", "0.5"], NegativeEntry),
    ([["0.5", "0.5"], ["0.5", "0.5"]], ["0.5", "0.5"], NotTriangular),
    ([["0.5", "0.5"], [0, 1]], ["1"], InitialLengthMismatch),
    ([["0.5", "0.5"], [0, 1]], ["1", "0"], NonPositiveInitial),
    ([["0.5", "0.5"], [0, 1]], ["1", "1"], InitialSumNotOne),
])
def test_validation_errors(raw, init, err):
    with pytest.raises(err):
        validate(raw, init)


def test_normalize_rescales_and_warns():
    m = validate([["0.5", "0.5"], [0, 1]], [1, 3], normalize=True)
    assert m.initial == (F(1, 4), F(3, 4))
    assert any(w.startswith("Normalized") for w in m.warnings)


def test_interior_unit_diagonal_warns():
    m = validate([[1, 0], [0, 1]], ["1/2", "1/2"])
    assert any(w.startswith("Diag1Interior") for w in m.warnings)


def test_decimal_strings_exact_and_floats_binary():
    assert to_fraction("0.1") == F(1, 10)
    assert to_fraction(0.1) == F(0.1)
    assert to_fraction(0.1) != F(1, 10)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_running_maxima_examples():
    assert running_maxima(diag_model(["0.2", "0.5", "0.3", "0.5", 1])) == [0, 1, 3, 4]
    assert running_maxima(validate([[1]], [1])) == [0]
    assert running_maxima(diag_model(["0.5", "0.3", 1])) == [0, 2]


def test_block_structure_examples():
    bs = block_structure(diag_model(["0.2", "0.5", "0.3", "0.5", 1]))
    assert [b.nu for b in bs] == [0, 0, 1, 0]
    bs = block_structure(diag_model([0, 0, 0, 1]))
    assert len(bs) == 4
    assert [b.nu for b in bs] == [0, 1, 2, 0]
    bs = block_structure(diag_model(["0.3", "0.5", 1]))
    assert [list(b.colors) for b in bs] == [[0], [1], [2]]
    assert [b.nu for b in bs] == [0, 0, 0]


def test_block_rho_and_submatrix():
    m = validate([["0.5", "0.2", "0.3"], [0, "0.3", "0.7"], [0, 0, 1]], ["1/3"] * 3)
    b0 = block_structure(m)[0]
    assert b0.sub_matrix == ((F(1, 2), F(1, 5)), (F(0), F(3, 10)))
    assert b0.rho == (F(3, 10), F(7, 10))
    assert block_structure(m)[1].rho is None


def test_increasing_order_examples():
    bad = validate([["0.5", 0, "0.5"], [0, "0.3", "0.7"], [0, 0, 1]], ["1/3"] * 3)
    assert check_increasing_order(bad) == [1]
    assert check_increasing_order(diag_model(["0.1", "0.4", "0.7", 1])) == []
    good = validate([["0.5", "0.2", "0.3"], [0, "0.3", "0.7"], [0, 0, 1]], ["1/3"] * 3)
    assert check_increasing_order(good) == []


def test_unique_arrangement_examples():
    bad = validate([["0.5", 0, "0.5"], [0, "0.5", "0.5"], [0, 0, 1]], ["1/3"] * 3)
    assert check_unique_arrangement(bad) is False
    good = validate([["0.5", "0.2", "0.3"], [0, "0.5", "0.5"], [0, 0, 1]], ["1/3"] * 3)
    assert check_unique_arrangement(good) is True
    assert check_unique_arrangement(diag_model(["0.1", "0.4", 1])) is True


def test_apply_permutation_examples():
    m = validate([["0.5", 0, "0.5"], [0, "0.3", "0.7"], [0, 0, 1]], ["1/2", "1/3", "1/6"])
    assert apply_permutation(m, [0, 1, 2]) == m
    swapped = apply_permutation(m, [1, 0, 2])
    expected = validate([["0.3", 0, "0.7"], [0, "0.5", "0.5"], [0, 0, 1]], ["1/3", "1/2", "1/6"])
    assert swapped == expected
    assert apply_permutation(swapped, [1, 0, 2]) == m


def test_apply_permutation_rejects_bad_input():
    m = validate([["0.5", "0.5"], [0, 1]], ["1/2", "1/2"])
    with pytest.raises(InvalidPermutation):
        apply_permutation(m, [0, 0])
    with pytest.raises(NotTriangular):
        apply_permutation(m, [1, 0])


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_structure_invariants(rng):
    m = random_matrix(rng)
    r = m.diagonal
    assert all(sum(row) == 1 for row in m.entries)
    lead = running_maxima(m)
    assert lead[0] == 0 and lead == sorted(set(lead))
    bs = block_structure(m)
    lams = [b.lam for b in bs]
    assert lams == sorted(lams)
    assert bs.blocks[-1].stop == m.dim
    for b in bs:
        assert all(r[k] < b.lam for k in range(b.start + 1, b.stop))
        assert b.nu == sum(1 for k in range(b.start) if r[k] == b.lam)
    for prev, b in zip(bs.blocks, bs.blocks[1:]):
        assert (b.nu > 0) == (prev.lam == b.lam)
        if b.nu > 0:
            assert prev.nu == b.nu - 1


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_permutation_preserves_row_sums(rng):
    from triurn.rearrange import rearrange_to_increasing

    m = random_matrix(rng)
    out = rearrange_to_increasing(m).rearranged
    assert all(sum(row) == 1 for row in out.entries)
    assert sum(out.initial) == 1
