"""Relabel colors into increasing order while keeping the matrix triangular."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AssumptionFailure
from .matrix import (
    ZERO,
    ReplacementMatrix,
    apply_permutation,
    block_structure,
    check_increasing_order,
    unique_arrangement_failures,
)


@dataclass(frozen=True)
class Rearrangement:
    perm: tuple[int, ...]  # perm[old color] = new color
    rearranged: ReplacementMatrix
    certificate: tuple[int, ...]  # increasing-order violations of ``rearranged``; empty when sound
    tie_break: str = "rightmost maximizer"

    @property
    def is_identity(self) -> bool:
        return all(a == b for a, b in enumerate(self.perm))

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.perm)
        for old, new in enumerate(self.perm):
            inv[new] = old
        return tuple(inv)


def _construction_order(matrix: ReplacementMatrix) -> list[int]:
    """Old color sitting at each new position.

    Blocks are built backward from the last color. Inside the block under
    construction, a color with no inflow from the block so far is rotated in
    front of the current leading color, shifting the block up by one.
    """
    r = matrix.diagonal
    order = list(range(matrix.dim))
    i = matrix.dim - 1
    while i > 0:
        best = max(r[order[m]] for m in range(i))
        lead = max(m for m in range(i) if r[order[m]] == best)
        size = 1
        while lead + size < i:
            color = order[lead + size]
            inflow = sum((matrix[order[m], color] for m in range(lead, lead + size)), ZERO)
            if inflow > 0:
                size += 1
            else:
                order.insert(lead, order.pop(lead + size))
                lead += 1
        i = lead
    return order


def rearrange_to_increasing(matrix: ReplacementMatrix) -> Rearrangement:
    order = _construction_order(matrix)
    perm = [0] * matrix.dim
    for new, old in enumerate(order):
        perm[old] = new
    rearranged = apply_permutation(matrix, perm)
    return Rearrangement(tuple(perm), rearranged, tuple(check_increasing_order(rearranged)))


def canonicalize(matrix: ReplacementMatrix) -> Rearrangement:
    """Rearrange into increasing order and require the unique-arrangement condition.

    Raises :class:`AssumptionFailure` for the first offending adjacent block
    pair; the exception carries the rearrangement so rate-only analysis can
    continue.
    """
    arrangement = rearrange_to_increasing(matrix)
    failures = unique_arrangement_failures(arrangement.rearranged)
    if failures:
        j = failures[0]
        lam = block_structure(arrangement.rearranged)[j].lam
        raise AssumptionFailure(j, lam, arrangement)
    return arrangement
