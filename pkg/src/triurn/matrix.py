"""Balanced triangular replacement matrices and their block decomposition.

All structural work is done in exact rationals (:class:`fractions.Fraction`).
Colors are indexed from 0, so the last color is ``dim - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import (
    InitialLengthMismatch,
    InitialSumNotOne,
    InvalidPermutation,
    NegativeEntry,
    NonPositiveInitial,
    NonSquare,
    NotTriangular,
    RowSumNotOne,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(value) -> Fraction:
    """Convert a number or numeric string to the exact rational it denotes.

    Decimal strings such as ``"0.1"`` give ``1/10``; binary floats give the
    exact dyadic rational they store (``0.1`` is *not* ``1/10``).
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not valid matrix entries")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


@dataclass(frozen=True)
class ReplacementMatrix:
    """Validated urn model: row-stochastic upper-triangular ``entries`` plus ``initial``.

    Build instances with :func:`validate`; the constructor does not check anything.
    """

    entries: tuple[tuple[Fraction, ...], ...]
    initial: tuple[Fraction, ...]
    labels: tuple[str, ...] | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def diagonal(self) -> tuple[Fraction, ...]:
        return tuple(self.entries[k][k] for k in range(self.dim))

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    def initial_numpy(self) -> np.ndarray:
        return np.array([float(x) for x in self.initial], dtype=float)


def validate(raw_matrix, raw_initial, *, normalize: bool = False, labels=None) -> ReplacementMatrix:
    """Check a raw model and return it as an exact :class:`ReplacementMatrix`.

    Raises a :class:`~triurn.errors.ValidationError` subclass on the first
    problem found. With ``normalize=True`` an initial composition that does
    not sum to one is rescaled and a warning is attached instead.
    """
    rows = [list(r) for r in raw_matrix]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise NonSquare(tuple(len(r) for r in rows))
    entries = [[to_fraction(x) for x in r] for r in rows]

    for i in range(n):
        for j in range(n):
            if entries[i][j] < 0:
                raise NegativeEntry(i, j)
    for i in range(n):
        for j in range(i):
            if entries[i][j] != 0:
                raise NotTriangular(i, j)
    for i in range(n):
        total = sum(entries[i], ZERO)
        if total != 1:
            raise RowSumNotOne(i, total)

    initial = [to_fraction(x) for x in raw_initial]
    if len(initial) != n:
        raise InitialLengthMismatch(n, len(initial))
    for i, c in enumerate(initial):
        if c <= 0:
            raise NonPositiveInitial(i)

    warnings = []
    total = sum(initial, ZERO)
    if total != 1:
        if not normalize:
            raise InitialSumNotOne(total)
        initial = [c / total for c in initial]
        warnings.append(f"Normalized: initial composition rescaled from total {total} to 1")

    interior_ones = [k for k in range(n - 1) if entries[k][k] == 1]
    if interior_ones:
        warnings.append(
            f"Diag1Interior: colors {interior_ones} have diagonal 1 before the last color; "
            "the unique-arrangement assumption cannot hold"
        )

    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise InitialLengthMismatch(n, len(labels))

    return ReplacementMatrix(
        entries=tuple(tuple(r) for r in entries),
        initial=tuple(initial),
        labels=labels,
        warnings=tuple(warnings),
    )


def running_maxima(matrix: ReplacementMatrix) -> list[int]:
    """Indices of the running maxima of the diagonal; ties open a new block."""
    r = matrix.diagonal
    leading = [0]
    for k in range(1, matrix.dim):
        if r[k] >= r[leading[-1]]:
            leading.append(k)
    return leading


@dataclass(frozen=True)
class Block:
    index: int
    start: int
    stop: int  # exclusive
    lam: Fraction
    nu: int
    sub_matrix: tuple[tuple[Fraction, ...], ...]
    # rows of this block in the next block's leading column; None for the last block
    rho: tuple[Fraction, ...] | None

    @property
    def colors(self) -> range:
        return range(self.start, self.stop)

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class BlockStructure:
    leading_indices: tuple[int, ...]
    blocks: tuple[Block, ...]

    def block_of(self, color: int) -> Block:
        for b in self.blocks:
            if b.start <= color < b.stop:
                return b
        raise IndexError(color)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, j) -> Block:
        return self.blocks[j]


def block_structure(matrix: ReplacementMatrix) -> BlockStructure:
    r = matrix.diagonal
    leading = running_maxima(matrix)
    bounds = leading + [matrix.dim]
    blocks = []
    for j, (start, stop) in enumerate(zip(bounds[:-1], bounds[1:])):
        lam = r[start]
        nu = sum(1 for m in range(start) if r[m] == lam)
        sub = tuple(tuple(matrix[a, b] for b in range(start, stop)) for a in range(start, stop))
        rho = None
        if stop < matrix.dim:
            rho = tuple(matrix[a, stop] for a in range(start, stop))
        blocks.append(Block(j, start, stop, lam, nu, sub, rho))
    return BlockStructure(tuple(leading), tuple(blocks))


def check_increasing_order(matrix: ReplacementMatrix) -> list[int]:
    """Non-leading colors that receive nothing from the earlier colors of their block."""
    violations = []
    for b in block_structure(matrix):
        for k in range(b.start + 1, b.stop):
            if sum((matrix[m, k] for m in range(b.start, k)), ZERO) <= 0:
                violations.append(k)
    return violations


def unique_arrangement_failures(matrix: ReplacementMatrix) -> list[int]:
    """Blocks ``j`` with ``lambda_j == lambda_{j+1}`` and a zero ``rho^(j)``."""
    blocks = block_structure(matrix).blocks
    failures = []
    for b, nxt in zip(blocks[:-1], blocks[1:]):
        if b.lam == nxt.lam and sum(b.rho, ZERO) <= 0:
            failures.append(b.index)
    return failures


def check_unique_arrangement(matrix: ReplacementMatrix) -> bool:
    return not unique_arrangement_failures(matrix)


def _check_permutation(perm, n: int) -> list[int]:
    try:
        perm = [int(p) for p in perm]
    except (TypeError, ValueError) as exc:
        raise InvalidPermutation(f"permutation entries must be integers: {perm!r}") from exc
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise InvalidPermutation(f"{perm!r} is not a bijection on {n} colors")
    return perm


def apply_permutation(matrix: ReplacementMatrix, perm) -> ReplacementMatrix:
    """Relabel colors so that old color ``a`` becomes color ``perm[a]``.

    Raises :class:`NotTriangular` if the relabelled matrix is not upper triangular.
    """
    n = matrix.dim
    perm = _check_permutation(perm, n)
    new = [[ZERO] * n for _ in range(n)]
    init = [ZERO] * n
    for a in range(n):
        init[perm[a]] = matrix.initial[a]
        for b in range(n):
            new[perm[a]][perm[b]] = matrix[a, b]
    for i in range(n):
        for j in range(i):
            if new[i][j] != 0:
                raise NotTriangular(i, j)
    labels = None
    if matrix.labels is not None:
        labels = [""] * n
        for a in range(n):
            labels[perm[a]] = matrix.labels[a]
        labels = tuple(labels)
    return ReplacementMatrix(
        entries=tuple(tuple(r) for r in new),
        initial=tuple(init),
        labels=labels,
        warnings=matrix.warnings,
    )
