"""Eigenvectors, Euler products and growth rates attached to each block."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import AssumptionFailure, NegativeIntegerParameter, NotApplicable, ZeroDenominator
from .matrix import (
    ZERO,
    Block,
    BlockStructure,
    ReplacementMatrix,
    block_structure,
    check_increasing_order,
    unique_arrangement_failures,
)


class Rate(NamedTuple):
    """Growth ``N**exponent * log(N)**log_power``."""

    exponent: Fraction
    log_power: int


def block_left_eigenvector(block: Block) -> tuple[Fraction, ...]:
    """Left eigenvector of the block sub-matrix for its leading diagonal, first entry 1."""
    sub = block.sub_matrix
    lam = block.lam
    pi = [Fraction(1)]
    for k in range(1, block.size):
        denom = lam - sub[k][k]
        if denom == 0:
            raise ZeroDenominator(f"block {block.index}: diagonal {k} equals the leading eigenvalue")
        pi.append(sum((pi[m] * sub[m][k] for m in range(k)), ZERO) / denom)
    return tuple(pi)


def right_eigenvector_zeta(matrix: ReplacementMatrix, block: Block) -> tuple[Fraction, ...]:
    """Right eigenvector of the full matrix for ``block.lam``.

    Normalized to 1 at the block's leading color and 0 after it. Only defined
    when no earlier diagonal entry equals ``block.lam``.
    """
    if block.nu > 0:
        raise NotApplicable(f"block {block.index} has nu={block.nu}; zeta needs nu=0")
    lead = block.start
    zeta = [ZERO] * matrix.dim
    zeta[lead] = Fraction(1)
    for k in range(lead - 1, -1, -1):
        denom = block.lam - matrix[k, k]
        if denom == 0:
            raise ZeroDenominator(f"diagonal {k} equals lambda={block.lam}")
        zeta[k] = sum((matrix[k, m] * zeta[m] for m in range(k + 1, lead + 1)), ZERO) / denom
    return tuple(zeta)


def _check_s(s):
    if s < 0 and s == int(s):
        raise NegativeIntegerParameter(f"s={s} is a negative integer")


def euler_product(n: int, s):
    """``prod_{i=0}^{n-1} (1 + s/(i+1))``.

    Exact when ``s`` is a :class:`~fractions.Fraction` or int; float otherwise.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_s(s)
    if isinstance(s, (Fraction, int)) and not isinstance(s, bool):
        s = Fraction(s)
        out = Fraction(1)
        for i in range(1, n + 1):
            out *= 1 + s / i
        return out
    s = float(s)
    if n == 0:
        return 1.0
    return float(np.prod(1.0 + s / np.arange(1, n + 1, dtype=float)))


def euler_asymptotic(n, s) -> float:
    """``n**s / Gamma(s + 1)``, the large-``n`` equivalent of :func:`euler_product`."""
    _check_s(s)
    return float(n) ** float(s) / math.gamma(float(s) + 1.0)


@dataclass(frozen=True)
class LimitTag:
    """What the block limit ``V_j`` is.

    ``kind`` is one of ``deterministic_one``, ``deterministic_initial``,
    ``nondegenerate`` or ``chained``. For chained blocks ``V_j`` equals
    ``coefficient * V_{chained_to}``.
    """

    kind: str
    value: Fraction | None = None
    chained_to: int | None = None
    coefficient: Fraction | None = None


@dataclass(frozen=True)
class BlockLimit:
    block: Block
    pi: tuple[Fraction, ...]
    zeta: tuple[Fraction, ...] | None
    rate: Rate
    chain_coeff: Fraction | None
    tag: LimitTag


@dataclass(frozen=True)
class ColorLimit:
    color: int
    rate: Rate
    kind: str
    # C_{N,color} / rate -> coefficient * V_j (or the constant itself for deterministic kinds)
    coefficient: Fraction | None
    block: int


@dataclass(frozen=True)
class LimitProfile:
    structure: BlockStructure
    blocks: tuple[BlockLimit, ...]

    def per_color(self) -> list[ColorLimit]:
        out = []
        for bl in self.blocks:
            b = bl.block
            for offset, color in enumerate(b.colors):
                p = bl.pi[offset]
                tag = bl.tag
                if tag.kind == "deterministic_one":
                    coeff = p
                elif tag.kind == "deterministic_initial":
                    coeff = p * tag.value
                elif tag.kind == "chained":
                    coeff = p * tag.coefficient
                else:
                    coeff = p
                out.append(ColorLimit(color, bl.rate, tag.kind, coeff, b.index))
        return out

    def rates(self) -> list[Rate]:
        return [c.rate for c in self.per_color()]


def theorem_rates(matrix: ReplacementMatrix) -> LimitProfile:
    """Block rates, eigenvectors and limit bookkeeping for a matrix in increasing order.

    Requires increasing order (use :func:`triurn.rearrange.canonicalize`) and
    raises :class:`AssumptionFailure` if equal-eigenvalue neighbours are not
    linked.
    """
    violations = check_increasing_order(matrix)
    if violations:
        raise NotApplicable(f"colors {violations} break increasing order; rearrange first")
    failures = unique_arrangement_failures(matrix)
    structure = block_structure(matrix)
    if failures:
        j = failures[0]
        raise AssumptionFailure(j, structure[j].lam)

    last = len(structure) - 1
    limits: list[BlockLimit] = []
    for b in structure:
        pi = block_left_eigenvector(b)
        zeta = right_eigenvector_zeta(matrix, b) if b.nu == 0 else None
        chain = None
        if b.nu > 0:
            prev = limits[b.index - 1]
            dot = sum((x * y for x, y in zip(prev.pi, prev.block.rho)), ZERO)
            chain = dot / b.nu
        if b.index == last:
            tag = LimitTag("deterministic_one", value=Fraction(1))
        elif b.index == 0 and b.lam == 0:
            tag = LimitTag("deterministic_initial", value=matrix.initial[0])
        elif chain is not None:
            tag = LimitTag("chained", chained_to=b.index - 1, coefficient=chain)
        else:
            tag = LimitTag("nondegenerate")
        limits.append(BlockLimit(b, pi, zeta, Rate(b.lam, b.nu), chain, tag))
    return LimitProfile(structure, tuple(limits))


def per_color_rates(matrix: ReplacementMatrix) -> list[Rate]:
    """Color-by-color growth rates; no rearrangement or extra assumption needed.

    A color with no inflow from earlier colors grows like ``n**r_k``. Otherwise
    it inherits the fastest donor rate, compared as (exponent, log power),
    gaining one log power when its own diagonal ties that exponent and
    overriding it when its own diagonal is larger.
    """
    r = matrix.diagonal
    rates = [Rate(r[0], 0)]
    for k in range(1, matrix.dim):
        donors = [rates[j] for j in range(k) if matrix[j, k] > 0]
        if not donors:
            rates.append(Rate(r[k], 0))
            continue
        s, delta = max(donors)
        if r[k] < s:
            rates.append(Rate(s, delta))
        elif r[k] == s:
            rates.append(Rate(s, delta + 1))
        else:
            rates.append(Rate(r[k], 0))
    return rates
