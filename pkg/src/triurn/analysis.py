"""Empirical checks of predicted growth rates: exponent fits, three-color cases, CLT pivots, reports."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np
from scipy import stats

from .errors import AssumptionFailure, AssumptionViolation, InsufficientData, WrongRegime
from .matrix import ZERO, ReplacementMatrix
from .oracle import composition_from_draws
from .rearrange import Rearrangement, canonicalize, rearrange_to_increasing
from .serialization import config_hash, frac_str, model_hash, model_to_dict, rate_dict
from .simulator import Ensemble, geometric_schedule, run_ensemble
from .spectral import LimitProfile, Rate, per_color_rates, theorem_rates


def default_config() -> dict:
    text = resources.files("triurn").joinpath("default_config.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_config(path=None, **overrides) -> dict:
    """Defaults, then the JSON file at ``path``, then keyword overrides (``None`` values ignored)."""
    cfg = default_config()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
        tol = user.pop("tolerances", {})
        cfg.update(user)
        cfg["tolerances"].update(tol)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


# ---------------------------------------------------------------------------
# exponent estimation


def _ols(x, y) -> tuple[float, float]:
    y = np.asarray(y, dtype=float)
    if np.all(y == y[0]):
        return 0.0, 0.0
    res = stats.linregress(x, y)
    return float(res.slope), float(res.stderr)


def _center(values: np.ndarray, center: str) -> np.ndarray:
    if center == "mean":
        return np.mean(values, axis=0)
    if center == "median":
        return np.median(values, axis=0)
    raise ValueError(f"center must be 'mean' or 'median', got {center!r}")


@dataclass(frozen=True)
class ExponentEstimate:
    exponent: float
    exponent_se: float
    log_power: float
    log_power_se: float
    anchor: float  # exponent divided out before fitting the log power
    log_slope: float  # d(log log N)/d(log N) over the window

    def expected_slope(self, rate: Rate) -> float:
        """Log-log slope a rate ``N**s log(N)**d`` produces over the same window."""
        return float(rate.exponent) + rate.log_power * self.log_slope


def estimate_exponent(ensemble: Ensemble, color: int, *, anchor=None, center: str = "mean",
                      window_decades: float = 1.0) -> ExponentEstimate:
    """Fit ``N**s (log N)**d`` growth of one color over the last decade.

    The exponent is the OLS slope of log(center count) against log N. The log
    power is the slope of log(center count / N**anchor) against log log N,
    with ``anchor`` defaulting to the fitted exponent.
    """
    N = ensemble.checkpoints.astype(float)
    if len(N) < 8 or N[-1] / N[0] < 100:
        raise InsufficientData("need at least 8 checkpoints spanning two decades")
    w = N >= N[-1] / 10**window_decades
    if w.sum() < 3 or N[w][0] < 2:
        raise InsufficientData("fewer than 3 usable checkpoints in the tail window")
    logN = np.log(N[w])
    loglogN = np.log(logN)
    y = np.log(_center(ensemble.counts[:, :, color], center)[w])

    s_hat, s_se = _ols(logN, y)
    ref = s_hat if anchor is None else float(anchor)
    d_hat, d_se = _ols(loglogN, y - ref * logN)
    kappa = float(stats.linregress(logN, loglogN).slope)
    return ExponentEstimate(s_hat, s_se, d_hat, d_se, ref, kappa)


# ---------------------------------------------------------------------------
# three-color urns


@dataclass(frozen=True)
class ThreeColorCase:
    label: str  # 'iii', 'iv', 'v' or 'vi': the statement governing color 2
    branch: str | None  # for 'v': 'a' when r12 > 0, 'b' when r12 == 0 < r22
    color1_constant: bool
    color2_rate: Rate
    color2_coefficient: Fraction | None  # C_n2 / rate -> coefficient * V1 when not None
    color2_limit: str
    regime: str  # 'sub', 'critical', 'super' or 'none'
    xi2: tuple[Fraction, Fraction, Fraction]
    xi2_kind: str  # 'eigenvector' or 'jordan'
    r11: Fraction
    r22: Fraction
    r12: Fraction

    @property
    def xi2_constant(self) -> bool:
        """C_n xi2 never moves: r12 == r22 == 0, or 0 == r22 < r11 with r12 > 0."""
        return self.r22 == 0 and self.r11 > 0


def three_color_dispatch(model: ReplacementMatrix) -> ThreeColorCase:
    if model.dim != 3:
        raise AssumptionViolation(f"three-color dispatch needs 3 colors, got {model.dim}")
    r11, r22, r12 = model[0, 0], model[1, 1], model[0, 1]
    if r11 >= 1 or r22 >= 1:
        raise AssumptionViolation("need r11 < 1 and r22 < 1")
    if r11 == r22 and r12 == 0:
        raise AssumptionViolation("r11 == r22 requires r12 > 0")

    branch = None
    coeff = None
    if r22 > r11:
        label, rate, limit = "iii", Rate(r22, 0), "V2"
    elif r22 == r11:
        label, rate, limit, coeff = "iv", Rate(r22, 1), "r12*V1", r12
    elif r12 > 0:
        label, branch, rate, limit = "v", "a", Rate(r11, 0), "r12*V1/(r11-r22)"
        coeff = r12 / (r11 - r22)
    elif r22 > 0:
        label, branch, rate, limit = "v", "b", Rate(r22, 0), "V3"
    else:
        label, rate, limit = "vi", Rate(ZERO, 0), "C02"

    regime = "none"
    if 0 < r22 < r11 and r12 > 0:
        regime = "sub" if 2 * r22 < r11 else "critical" if 2 * r22 == r11 else "super"

    if r11 != r22:
        xi2, kind = (r12, r22 - r11, ZERO), "eigenvector"
    else:
        # any alpha works for the Jordan vector; alpha = 0
        xi2, kind = (ZERO, 1 / r12, ZERO), "jordan"
    return ThreeColorCase(label, branch, r11 == 0, rate, coeff, limit, regime, xi2, kind, r11, r22, r12)


def clt_variance_coefficient(case: ThreeColorCase) -> Fraction:
    """Limit variance of ``C_n xi2 / sqrt(a_n)`` divided by ``V1``."""
    r11, r22, r12 = case.r11, case.r22, case.r12
    base = r12 * r22**2 * (r12 + r11 - r22)
    if case.regime == "sub":
        return base / (r11 - 2 * r22)
    if case.regime == "critical":
        return base
    raise WrongRegime(f"no Gaussian limit in regime {case.regime!r}")


def xi2_values(counts: np.ndarray, case: ThreeColorCase) -> np.ndarray:
    xi = np.array([float(x) for x in case.xi2])
    return counts @ xi


def clt_pivot(counts: np.ndarray, N: int, case: ThreeColorCase) -> np.ndarray:
    """Self-normalized ``C_n xi2 / sqrt(a_n sigma^2(V1_hat))`` per replication."""
    k = float(clt_variance_coefficient(case))
    r11 = float(case.r11)
    a_n = N**r11 * (math.log(N) if case.regime == "critical" else 1.0)
    v1 = counts[..., 0] / N**r11
    return xi2_values(counts, case) / np.sqrt(a_n) / np.sqrt(k * v1)


@dataclass(frozen=True)
class CLTResult:
    regime: str
    statistic: float
    pvalue: float
    threshold: float | None
    passed: bool | None
    n: int
    variance_coefficient: Fraction


def clt_check(ensemble: Ensemble, case: ThreeColorCase, threshold: float | None = None) -> CLTResult:
    """Kolmogorov-Smirnov distance of the terminal pivots to N(0, 1)."""
    if case.regime not in ("sub", "critical"):
        raise WrongRegime(f"regime {case.regime!r}; use the almost-sure check instead")
    N = int(ensemble.checkpoints[-1])
    z = clt_pivot(ensemble.counts[:, -1, :], N, case)
    res = stats.kstest(z, "norm")
    passed = None if threshold is None else bool(res.statistic <= threshold)
    return CLTResult(case.regime, float(res.statistic), float(res.pvalue), threshold, passed,
                     len(z), clt_variance_coefficient(case))


def xi2_constancy(model: ReplacementMatrix, ensemble: Ensemble, case: ThreeColorCase) -> dict:
    """Check ``C_n xi2 == C_0 xi2`` in floats (bitwise) and exactly from draw counts."""
    start_float = float(np.dot(ensemble.initial, [float(x) for x in case.xi2]))
    vals = xi2_values(ensemble.counts, case)
    start = sum((c * x for c, x in zip(model.initial, case.xi2)), ZERO)
    exact = True
    seen = set()
    for row in ensemble.draws.reshape(-1, model.dim):
        key = tuple(int(d) for d in row)
        if key in seen:
            continue
        seen.add(key)
        c = composition_from_draws(model, key)
        if sum((a * x for a, x in zip(c, case.xi2)), ZERO) != start:
            exact = False
            break
    return {
        "initial_value": start,
        "bitwise_equal": bool(np.all(vals == start_float)),
        "max_float_deviation": float(np.max(np.abs(vals - start_float))),
        "exact_equal": exact,
    }


# ---------------------------------------------------------------------------
# convergence report


def _decade_schedule(steps: int, gamma: float) -> np.ndarray:
    pts = set(int(x) for x in geometric_schedule(steps, gamma))
    d = steps
    while d >= 1:
        pts.add(int(d))
        d //= 10
    return np.array(sorted(pts), dtype=np.int64)


def _index_at(checkpoints: np.ndarray, N: int) -> int:
    return int(np.argmin(np.abs(checkpoints.astype(float) - N)))


def _shrink(stat: np.ndarray, checkpoints: np.ndarray) -> dict:
    """Median |stat| at the terminal checkpoint and one decade earlier."""
    last = len(checkpoints) - 1
    earlier = _index_at(checkpoints, checkpoints[-1] // 10)
    now = float(np.median(np.abs(stat[:, last])))
    before = float(np.median(np.abs(stat[:, earlier])))
    return {
        "N_earlier": int(checkpoints[earlier]),
        "N_terminal": int(checkpoints[last]),
        "median_abs_earlier": before,
        "median_abs_terminal": now,
        "ratio": now / before if before > 0 else (0.0 if now == 0 else math.inf),
    }


@dataclass
class ConvergenceReport:
    metadata: dict
    canonical: dict
    assumption: dict
    colors: list = field(default_factory=list)
    blocks: list = field(default_factory=list)
    three_color: dict | None = None
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def assumption_failed(self) -> bool:
        return not self.assumption["holds"]

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "canonical": self.canonical,
            "assumption": self.assumption,
            "colors": self.colors,
            "blocks": self.blocks,
            "three_color": self.three_color,
            "verdicts": self.verdicts,
            "passed": self.passed,
        }


def evaluate_verdicts(report: ConvergenceReport, tolerances: dict) -> dict:
    """Pass/fail per check, computed only from statistics already stored in ``report``."""
    out = {}
    if not report.assumption["holds"]:
        out["unique_arrangement"] = False
    for c in report.colors:
        est = c.get("estimated")
        if est is None:
            continue
        k = c["color"]
        out[f"color{k}.exponent"] = abs(est["exponent"] - est["expected_slope"]) <= tolerances["exponent"]
        out[f"color{k}.log_power"] = abs(est["log_power"] - c["predicted"]["log_power"]) <= tolerances["log_power"]
    for b in report.blocks:
        if "nondegeneracy" in b:
            rel = b["nondegeneracy"]["relative_variance"]
            out[f"block{b['block']}.nondegenerate"] = rel >= tolerances["nondegenerate_min_rel_var"]
        if "chain" in b:
            out[f"block{b['block']}.chain"] = b["chain"]["ratio"] <= tolerances["chain_shrink_ratio"]
    tc = report.three_color
    if tc is not None:
        if "clt" in tc:
            key = "ks_sub" if tc["clt"]["regime"] == "sub" else "ks_critical"
            out["three_color.clt"] = tc["clt"]["ks"] <= tolerances[key]
        if "xi2_constancy" in tc:
            out["three_color.xi2_constant"] = tc["xi2_constancy"]["exact_equal"]
        if "jordan" in tc:
            m = tc["jordan"]["median_abs"]
            out["three_color.log_correction"] = all(a > b for a, b in zip(m, m[1:]))
    return {k: bool(v) for k, v in out.items()}


def _arrangement(model: ReplacementMatrix) -> tuple[Rearrangement, dict, LimitProfile | None]:
    try:
        arr = canonicalize(model)
    except AssumptionFailure as exc:
        arr = exc.rearrangement or rearrange_to_increasing(model)
        info = {"holds": False, "block": exc.block, "lambda": frac_str(exc.lam), "message": str(exc)}
        return arr, info, None
    return arr, {"holds": True}, theorem_rates(arr.rearranged)


def simulate_for_report(model: ReplacementMatrix, cfg: dict) -> Ensemble:
    """The ensemble a report with config ``cfg`` uses; ``model`` should already be rearranged."""
    steps = int(cfg["steps"])
    return run_ensemble(model, steps, int(cfg["reps"]), master_seed=int(cfg["seed"]),
                        schedule=_decade_schedule(steps, float(cfg["gamma"])),
                        track_u=False, n_jobs=int(cfg.get("n_jobs", 1)))


def convergence_report(model: ReplacementMatrix, config: dict | None = None,
                       ensemble: Ensemble | None = None) -> ConvergenceReport:
    """Simulate the canonically arranged model and compare it with every predicted rate.

    Colors in the report follow the rearranged order; ``original_color`` maps
    back. Pass ``ensemble`` to reuse a simulation of the rearranged model.
    """
    cfg = copy.deepcopy(config) if config is not None else default_config()
    arr, assumption, profile = _arrangement(model)
    canon = arr.rearranged
    inverse = arr.inverse()
    rates = profile.rates() if profile is not None else per_color_rates(canon)

    report = ConvergenceReport(
        metadata={
            "seed": cfg["seed"],
            "reps": cfg["reps"],
            "steps": cfg["steps"],
            "gamma": cfg["gamma"],
            "center": cfg["center"],
            "matrix_hash": model_hash(model),
            "config_hash": config_hash(cfg),
            "config": cfg,
            "warnings": list(model.warnings),
        },
        canonical={"perm": list(arr.perm), "model": model_to_dict(canon),
                   "certificate": list(arr.certificate), "tie_break": arr.tie_break},
        assumption=assumption,
    )
    if not assumption["holds"] and cfg.get("require_unique_arrangement", True):
        report.verdicts = evaluate_verdicts(report, cfg["tolerances"])
        return report

    if ensemble is None:
        ensemble = simulate_for_report(canon, cfg)
    ck = ensemble.checkpoints
    scaled = ensemble.scaled(rates)
    logN = np.log(ck.astype(float))
    tail = ck >= ck[-1] / 10
    enough = len(ck) >= 8 and ck[-1] / ck[0] >= 100

    for k in range(canon.dim):
        rate = rates[k]
        term = scaled[:, -1, k]
        entry = {
            "color": k,
            "original_color": inverse[k],
            "label": None if canon.labels is None else canon.labels[k],
            "predicted": rate_dict(rate),
            "terminal_scaled": {"mean": float(np.mean(term)),
                                "var": float(np.var(term, ddof=1)) if len(term) > 1 else 0.0},
        }
        if enough:
            est = estimate_exponent(ensemble, k, anchor=float(rate.exponent), center=cfg["center"])
            entry["estimated"] = {
                "exponent": est.exponent, "exponent_se": est.exponent_se,
                "log_power": est.log_power, "log_power_se": est.log_power_se,
                "expected_slope": est.expected_slope(rate),
            }
            center_scaled = _center(scaled[:, :, k], cfg["center"])
            entry["drift_slope"] = _ols(logN[tail], np.log(center_scaled[tail]))[0]
        report.colors.append(entry)

    if profile is not None:
        for bl in profile.blocks:
            report.blocks.append(_block_section(profile, bl, scaled, ck, enough))

    if canon.dim == 3:
        report.three_color = _three_color_section(canon, ensemble, enough)
    report.verdicts = evaluate_verdicts(report, cfg["tolerances"])
    return report


def _block_section(profile: LimitProfile, bl, scaled: np.ndarray, ck: np.ndarray, enough: bool) -> dict:
    b = bl.block
    out = {"block": b.index, "colors": list(b.colors), "lambda": frac_str(b.lam), "nu": b.nu,
           "v_tag": bl.tag.kind}
    lead = scaled[:, :, b.start]
    if bl.tag.kind == "nondegenerate":
        t = lead[:, -1]
        rel = float(np.var(t, ddof=1) / np.mean(t) ** 2) if len(t) > 1 else 0.0
        out["nondegeneracy"] = {"relative_variance": rel}
    if b.nu > 0 and enough:
        prev = profile.blocks[b.index - 1].block
        d = lead - float(bl.chain_coeff) * scaled[:, :, prev.start]
        out["chain"] = {"coefficient": frac_str(bl.chain_coeff), **_shrink(d, ck)}
    if b.size > 1 and enough:
        # informational: within-block proportions toward pi
        out["within_block"] = [
            {"color": b.start + i, "pi": frac_str(bl.pi[i]),
             **_shrink(scaled[:, :, b.start + i] - float(bl.pi[i]) * lead, ck)}
            for i in range(1, b.size)
        ]
    return out


def _three_color_section(model: ReplacementMatrix, ensemble: Ensemble, enough: bool) -> dict:
    try:
        case = three_color_dispatch(model)
    except AssumptionViolation as exc:
        return {"error": str(exc)}
    out = {
        "case": case.label, "branch": case.branch, "color1_constant": case.color1_constant,
        "color2_rate": rate_dict(case.color2_rate),
        "color2_coefficient": None if case.color2_coefficient is None else frac_str(case.color2_coefficient),
        "color2_limit": case.color2_limit, "regime": case.regime,
        "xi2": [frac_str(x) for x in case.xi2], "xi2_kind": case.xi2_kind,
    }
    ck = ensemble.checkpoints
    N = ck.astype(float)
    decades = [_index_at(ck, ck[-1] // 10**p) for p in (2, 1, 0)]
    if case.regime in ("sub", "critical"):
        res = clt_check(ensemble, case)
        out["clt"] = {"regime": res.regime, "ks": res.statistic, "pvalue": res.pvalue,
                      "variance_coefficient": frac_str(res.variance_coefficient)}
    elif case.regime == "super" and enough:
        vals = xi2_values(ensemble.counts, case) / N[None, :] ** float(case.r22)
        early, mid, last = decades
        out["xi2_scaled"] = {
            "median_abs_change_previous_decade": float(np.median(np.abs(vals[:, mid] - vals[:, early]))),
            "median_abs_change_last_decade": float(np.median(np.abs(vals[:, last] - vals[:, mid]))),
        }
    if case.xi2_constant:
        res = xi2_constancy(model, ensemble, case)
        out["xi2_constancy"] = {**res, "initial_value": frac_str(res["initial_value"])}
    if case.xi2_kind == "jordan" and enough:
        # C_n xi2 / (n^r22 log n) -> V1, with V1 estimated by C_n1 / n^r11
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (xi2_values(ensemble.counts, case) / (N ** float(case.r22) * np.log(N))
                 - ensemble.counts[:, :, 0] / N ** float(case.r11))
        out["jordan"] = {"N": [int(ck[i]) for i in decades],
                         "median_abs": [float(np.median(np.abs(d[:, i]))) for i in decades]}
    return out
