"""Monte Carlo simulation of urn trajectories.

Every replication owns a Philox stream keyed by ``(master_seed, rep)``, so an
ensemble is the same no matter how many workers build it or in what order.
Counts are doubles; the tracked martingales are updated at every draw, not
only at checkpoints.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ScheduleEmpty
from .matrix import ReplacementMatrix, block_structure
from .spectral import Rate, right_eigenvector_zeta

CHUNK = 1 << 18


def replication_seed(master_seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(rep),))


def _generator(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def geometric_schedule(steps: int, gamma: float = 1.2) -> np.ndarray:
    """Checkpoints ``ceil(gamma**m)`` up to ``steps``, deduplicated, ``steps`` included."""
    if steps < 1:
        raise ScheduleEmpty(f"steps must be >= 1, got {steps}")
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    points = set()
    m = 0
    while True:
        v = math.ceil(gamma**m)
        if v > steps:
            break
        points.add(v)
        m += 1
    points.add(steps)
    return np.array(sorted(points), dtype=np.int64)


def _as_schedule(schedule, steps: int) -> np.ndarray:
    pts = sorted({int(x) for x in schedule if 1 <= int(x) <= steps} | {steps}) if steps >= 1 else []
    if not pts:
        raise ScheduleEmpty("no checkpoint within 1..steps")
    return np.array(pts, dtype=np.int64)


# ---------------------------------------------------------------------------
# reference single step


@dataclass
class UrnState:
    n: int
    counts: np.ndarray
    rng: np.random.Generator = field(repr=False)


def initial_state(model: ReplacementMatrix, seed=0) -> UrnState:
    return UrnState(0, model.initial_numpy(), _generator(seed))


def draw_color(counts: np.ndarray, u: float) -> int:
    """Inverse-CDF draw: the first color whose cumulative count exceeds ``u * total``."""
    cum = np.cumsum(counts)
    i = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return min(i, len(counts) - 1)


def step(state: UrnState, model: ReplacementMatrix | np.ndarray) -> tuple[UrnState, int]:
    R = model.to_numpy() if isinstance(model, ReplacementMatrix) else model
    color = draw_color(state.counts, state.rng.random())
    return UrnState(state.n + 1, state.counts + R[color], state.rng), color


# ---------------------------------------------------------------------------
# compiled kernel


@numba.njit(cache=True, nogil=True)
def _advance(R, counts, draws, n, u, ck, ck_ptr, rec_counts, rec_draws,
             zeta, lam, pi_u, rec_u, mcols, pi_m, msum, mcomp, rec_m):
    K1 = counts.shape[0]
    n_ck = ck.shape[0]
    for t in range(u.shape[0]):
        # running sums of M use the composition before this draw
        for q in range(mcols.shape[0]):
            l = mcols[q]
            rl = R[l, l]
            acc = 0.0
            for m in range(l):
                acc += R[m, l] * counts[m]
            y = acc / ((n + 1.0 + rl) * pi_m[q]) - mcomp[q]
            s = msum[q] + y
            mcomp[q] = (s - msum[q]) - y
            msum[q] = s

        total = 0.0
        for c in range(K1):
            total += counts[c]
        target = u[t] * total
        color = K1 - 1
        cum = 0.0
        for c in range(K1):
            cum += counts[c]
            if target < cum:
                color = c
                break
        for c in range(K1):
            counts[c] += R[color, c]
        draws[color] += 1
        n += 1
        for q in range(lam.shape[0]):
            pi_u[q] *= 1.0 + lam[q] / n
        for q in range(mcols.shape[0]):
            pi_m[q] *= 1.0 + R[mcols[q], mcols[q]] / n

        if ck_ptr < n_ck and ck[ck_ptr] == n:
            for c in range(K1):
                rec_counts[ck_ptr, c] = counts[c]
                rec_draws[ck_ptr, c] = draws[c]
            for q in range(lam.shape[0]):
                dot = 0.0
                for c in range(K1):
                    dot += counts[c] * zeta[q, c]
                rec_u[ck_ptr, q] = dot / pi_u[q]
            for q in range(mcols.shape[0]):
                rec_m[ck_ptr, q] = counts[mcols[q]] / pi_m[q] - msum[q]
            ck_ptr += 1
    return n, ck_ptr


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Tracking:
    """Floating-point data needed by the kernel for one model."""

    R: np.ndarray
    initial: np.ndarray
    u_blocks: tuple[int, ...]
    zeta: np.ndarray
    lam: np.ndarray
    m_colors: np.ndarray

    @classmethod
    def build(cls, model: ReplacementMatrix, track_u: bool = True, m_colors=()) -> "Tracking":
        u_blocks, zetas, lams = [], [], []
        if track_u:
            for b in block_structure(model):
                if b.nu == 0:
                    u_blocks.append(b.index)
                    zetas.append([float(z) for z in right_eigenvector_zeta(model, b)])
                    lams.append(float(b.lam))
        K1 = model.dim
        m_colors = np.array(sorted({int(c) for c in m_colors}), dtype=np.int64)
        if m_colors.size and (m_colors.min() < 0 or m_colors.max() >= K1):
            raise IndexError(f"tracked colors must lie in 0..{K1 - 1}")
        return cls(
            R=model.to_numpy(),
            initial=model.initial_numpy(),
            u_blocks=tuple(u_blocks),
            zeta=np.array(zetas, dtype=float).reshape(len(zetas), K1),
            lam=np.array(lams, dtype=float),
            m_colors=m_colors,
        )


@dataclass(frozen=True)
class Trajectory:
    checkpoints: np.ndarray  # N values, strictly increasing
    counts: np.ndarray  # (n_checkpoints, K+1)
    draws: np.ndarray  # (n_checkpoints, K+1) number of times each color was drawn
    U: np.ndarray  # (n_checkpoints, n_u_blocks)
    M: np.ndarray  # (n_checkpoints, n_m_colors)
    u_blocks: tuple[int, ...]
    m_colors: tuple[int, ...]
    seed: object = None


def _simulate(tracking: Tracking, steps: int, ck: np.ndarray, seed) -> Trajectory:
    K1 = tracking.R.shape[0]
    n_ck = ck.shape[0]
    n_u = tracking.lam.shape[0]
    n_m = tracking.m_colors.shape[0]
    counts = tracking.initial.copy()
    draws = np.zeros(K1, dtype=np.int64)
    rec_counts = np.empty((n_ck, K1))
    rec_draws = np.empty((n_ck, K1), dtype=np.int64)
    rec_u = np.empty((n_ck, n_u))
    rec_m = np.empty((n_ck, n_m))
    pi_u = np.ones(n_u)
    pi_m = np.ones(n_m)
    msum = np.zeros(n_m)
    mcomp = np.zeros(n_m)
    rng = _generator(seed)
    n, ptr = 0, 0
    while n < steps:
        u = rng.random(min(CHUNK, steps - n))
        n, ptr = _advance(tracking.R, counts, draws, n, u, ck, ptr, rec_counts, rec_draws,
                          tracking.zeta, tracking.lam, pi_u, rec_u, tracking.m_colors,
                          pi_m, msum, mcomp, rec_m)
    return Trajectory(ck, rec_counts, rec_draws, rec_u, rec_m, tracking.u_blocks,
                      tuple(int(c) for c in tracking.m_colors), seed)


def run(model: ReplacementMatrix, steps: int, *, schedule=None, gamma: float = 1.2, seed=0,
        track_u: bool = True, m_colors=()) -> Trajectory:
    """Simulate one trajectory of ``steps`` draws.

    ``seed`` is an int or a :class:`numpy.random.SeedSequence`. ``U`` is
    recorded for every block whose leading diagonal is new (``nu == 0``),
    ``M`` for each color in ``m_colors``.
    """
    ck = geometric_schedule(steps, gamma) if schedule is None else _as_schedule(schedule, steps)
    return _simulate(Tracking.build(model, track_u, m_colors), steps, ck, seed)


# ---------------------------------------------------------------------------
# ensembles


def scale_factors(checkpoints, rates) -> np.ndarray:
    """``N**s * log(N)**delta`` per checkpoint and color; NaN where log N = 0 and delta > 0."""
    N = np.asarray(checkpoints, dtype=float)[:, None]
    s = np.array([float(r[0]) for r in rates])[None, :]
    d = np.array([int(r[1]) for r in rates])[None, :]
    logN = np.log(N)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = N**s * np.where(d > 0, logN**d, 1.0)
    return np.where((d > 0) & (N <= 1), np.nan, f)


def scaled_counts(trajectory, rates) -> np.ndarray:
    """Counts divided by their predicted growth; works on a Trajectory or an Ensemble."""
    rates = _rates_of(rates)
    return trajectory.counts / scale_factors(trajectory.checkpoints, rates)


def _rates_of(profile) -> list[Rate]:
    if hasattr(profile, "rates"):
        return profile.rates()
    return [Rate(r[0], r[1]) for r in profile]


@dataclass(frozen=True)
class Ensemble:
    checkpoints: np.ndarray
    counts: np.ndarray  # (reps, n_checkpoints, K+1)
    draws: np.ndarray
    U: np.ndarray
    M: np.ndarray
    u_blocks: tuple[int, ...]
    m_colors: tuple[int, ...]
    master_seed: int
    initial: np.ndarray

    @property
    def reps(self) -> int:
        return self.counts.shape[0]

    def trajectory(self, rep: int) -> Trajectory:
        return Trajectory(self.checkpoints, self.counts[rep], self.draws[rep], self.U[rep],
                          self.M[rep], self.u_blocks, self.m_colors,
                          replication_seed(self.master_seed, rep))

    def scaled(self, rates) -> np.ndarray:
        return scaled_counts(self, rates)

    def summary(self, values: np.ndarray | None = None, quantiles=(0.05, 0.25, 0.75, 0.95)) -> dict:
        """Per-checkpoint mean, variance, median and quantiles over replications."""
        x = self.counts if values is None else values
        return {
            "mean": np.mean(x, axis=0),
            "var": np.var(x, axis=0, ddof=1) if x.shape[0] > 1 else np.zeros(x.shape[1:]),
            "median": np.median(x, axis=0),
            "quantiles": {q: np.quantile(x, q, axis=0) for q in quantiles},
        }


def run_ensemble(model: ReplacementMatrix, steps: int, reps: int, *, master_seed: int = 0,
                 schedule=None, gamma: float = 1.2, track_u: bool = True, m_colors=(),
                 n_jobs: int = 1) -> Ensemble:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    ck = geometric_schedule(steps, gamma) if schedule is None else _as_schedule(schedule, steps)
    tracking = Tracking.build(model, track_u, m_colors)

    def one(rep):
        return _simulate(tracking, steps, ck, replication_seed(master_seed, rep))

    if n_jobs == 1:
        trajs = [one(rep) for rep in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trajs = list(pool.map(one, range(reps)))
    return Ensemble(
        checkpoints=ck,
        counts=np.stack([t.counts for t in trajs]),
        draws=np.stack([t.draws for t in trajs]),
        U=np.stack([t.U for t in trajs]),
        M=np.stack([t.M for t in trajs]),
        u_blocks=tracking.u_blocks,
        m_colors=tuple(int(c) for c in tracking.m_colors),
        master_seed=int(master_seed),
        initial=tracking.initial,
    )
