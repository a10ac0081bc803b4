"""Exact small-N ground truth by enumerating draw histories in rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy import stats

from .errors import NotApplicable, TooLarge
from .matrix import ZERO, ReplacementMatrix, block_structure
from .spectral import euler_product, right_eigenvector_zeta

MAX_STATES = 10**7

Composition = tuple[Fraction, ...]


def _add_row(c: Composition, row) -> Composition:
    return tuple(a + b for a, b in zip(c, row))


def exact_mean(model: ReplacementMatrix, N: int) -> tuple[Fraction, ...]:
    """``E[C_N]`` from the recursion ``E[C_{n+1}] = E[C_n] (I + R/(n+1))``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    K1 = model.dim
    mean = list(model.initial)
    for n in range(N):
        drift = [sum((mean[i] * model[i, j] for i in range(K1)), ZERO) for j in range(K1)]
        mean = [mean[j] + drift[j] / (n + 1) for j in range(K1)]
    return tuple(mean)


@dataclass(frozen=True)
class OracleTree:
    """Exact law of ``C_n`` for ``n = 0..depth``; equal compositions are merged."""

    depth: int
    layers: tuple[dict, ...]  # layers[n]: composition -> probability

    @property
    def leaves(self) -> list[tuple[Composition, Fraction]]:
        return list(self.layers[-1].items())

    def mean(self, n: int | None = None) -> tuple[Fraction, ...]:
        layer = self.layers[self.depth if n is None else n]
        K1 = len(next(iter(layer)))
        return tuple(sum((c[k] * p for c, p in layer.items()), ZERO) for k in range(K1))


def _guard(model: ReplacementMatrix, N: int, limit: int) -> None:
    # distinct compositions at depth N are bounded by the number of draw-count vectors
    bound = comb(N + model.dim - 1, model.dim - 1)
    if bound > limit:
        raise TooLarge(f"up to {bound} states at depth {N} exceeds the limit {limit}")


def enumerate_distribution(model: ReplacementMatrix, N: int, *, max_states: int = MAX_STATES) -> OracleTree:
    _guard(model, N, max_states)
    layer = {tuple(model.initial): Fraction(1)}
    layers = [layer]
    for n in range(N):
        total = n + 1
        nxt: dict = {}
        for c, p in layer.items():
            for i, ci in enumerate(c):
                if ci == 0:
                    continue
                child = _add_row(c, model.entries[i])
                nxt[child] = nxt.get(child, ZERO) + p * ci / total
        layer = nxt
        layers.append(layer)
    return OracleTree(N, tuple(layers))


def _history_guard(model: ReplacementMatrix, N: int, limit: int) -> None:
    if model.dim**N > limit:
        raise TooLarge(f"{model.dim}**{N} histories exceeds the limit {limit}")


def verify_martingale_U(model: ReplacementMatrix, block: int, N: int, *,
                        max_states: int = MAX_STATES) -> Fraction:
    """Largest ``|E[U_{n+1} | F_n] - U_n|`` over all nodes of depth ``n < N``."""
    b = block_structure(model)[block]
    if b.nu > 0:
        raise NotApplicable(f"block {block} has nu={b.nu}")
    _guard(model, N, max_states)
    zeta = right_eigenvector_zeta(model, b)
    pis = [euler_product(n, b.lam) for n in range(N + 1)]

    def U(c, n):
        return sum((x * z for x, z in zip(c, zeta)), ZERO) / pis[n]

    # U_n depends on the history only through C_n, so merged layers suffice
    tree = enumerate_distribution(model, N, max_states=max_states)
    worst = ZERO
    for n in range(N):
        for c in tree.layers[n]:
            total = n + 1
            expected = sum((ci / total * U(_add_row(c, model.entries[i]), n + 1)
                            for i, ci in enumerate(c) if ci != 0), ZERO)
            worst = max(worst, abs(expected - U(c, n)))
    return worst


def verify_martingale_M(model: ReplacementMatrix, color: int, N: int, *,
                        max_states: int = MAX_STATES) -> Fraction:
    """Largest conditional-expectation defect of ``M_n`` for ``color``, history by history.

    ``M_n = C_{n,l}/Pi_n(r_l) - sum_{m<l} sum_{k<n} r_ml/(k+1+r_l) * C_{k,m}/Pi_k(r_l)``.
    """
    _history_guard(model, N, max_states)
    l = color
    rl = model[l, l]
    pis = [euler_product(n, rl) for n in range(N + 1)]
    R = model.entries
    worst = ZERO

    def increment(c, n):
        return sum((R[m][l] * c[m] for m in range(l)), ZERO) / ((n + 1 + rl) * pis[n])

    stack = [(tuple(model.initial), 0, ZERO)]
    while stack:
        c, n, acc = stack.pop()
        if n == N:
            continue
        m_now = c[l] / pis[n] - acc
        acc_next = acc + increment(c, n)
        total = n + 1
        expected = ZERO
        for i, ci in enumerate(c):
            if ci == 0:
                continue
            child = _add_row(c, R[i])
            expected += ci / total * (child[l] / pis[n + 1] - acc_next)
            stack.append((child, n + 1, acc_next))
        worst = max(worst, abs(expected - m_now))
    return worst


def composition_from_draws(model: ReplacementMatrix, draws) -> Composition:
    """Exact ``C_0 + sum_i draws[i] * R[i]``."""
    out = list(model.initial)
    for i, d in enumerate(draws):
        d = int(d)
        if d:
            out = [a + d * b for a, b in zip(out, model.entries[i])]
    return tuple(out)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    pvalue: float
    dof: int
    bins: int


def chi_square_against(model: ReplacementMatrix, tree: OracleTree, draws: np.ndarray,
                       *, min_expected: float = 5.0) -> ChiSquareResult:
    """Pearson test of simulated depth-``N`` draw vectors against the exact law.

    Atoms with expected count below ``min_expected`` are pooled into one bin.
    """
    law = tree.layers[-1]
    atoms = list(law)
    index = {c: k for k, c in enumerate(atoms)}
    observed = np.zeros(len(atoms))
    cache: dict = {}
    for row in np.asarray(draws):
        key = tuple(int(x) for x in row)
        if key not in cache:
            c = composition_from_draws(model, key)
            if c not in index:
                raise ValueError(f"simulated composition {c} is impossible under the exact law")
            cache[key] = index[c]
        observed[cache[key]] += 1
    n = observed.sum()
    expected = np.array([float(law[c]) for c in atoms]) * n
    small = expected < min_expected
    if small.any():
        obs = np.append(observed[~small], observed[small].sum())
        exp = np.append(expected[~small], expected[small].sum())
        if exp[-1] == 0:
            obs, exp = obs[:-1], exp[:-1]
    else:
        obs, exp = observed, expected
    exp = exp * obs.sum() / exp.sum()
    res = stats.chisquare(obs, exp)
    return ChiSquareResult(float(res.statistic), float(res.pvalue), len(obs) - 1, len(obs))
