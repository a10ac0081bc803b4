"""JSON and CSV formats: model files, profiles, oracle reports, trajectories."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .matrix import ReplacementMatrix, validate
from .oracle import OracleTree
from .spectral import LimitProfile, Rate


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def load_model(path, *, normalize: bool = False) -> ReplacementMatrix:
    """Read ``{"R": [[...]], "C0": [...], "labels": [...]}``.

    Decimal strings are parsed exactly (``"0.1"`` is ``1/10``); bare JSON
    numbers are binary floats and keep the exact value they store.
    """
    text = Path(path).read_text(encoding="utf-8")
    return model_from_json(text, normalize=normalize)


def model_from_json(text: str, *, normalize: bool = False) -> ReplacementMatrix:
    data = json.loads(text)
    return model_from_dict(data, normalize=normalize)


def model_from_dict(data: dict, *, normalize: bool = False) -> ReplacementMatrix:
    try:
        R, C0 = data["R"], data["C0"]
    except KeyError as exc:
        raise ValueError(f"model file is missing key {exc}") from None
    return validate(R, C0, normalize=normalize, labels=data.get("labels"))


def model_to_dict(model: ReplacementMatrix) -> dict:
    out = {
        "R": [[frac_str(x) for x in row] for row in model.entries],
        "C0": [frac_str(x) for x in model.initial],
    }
    if model.labels is not None:
        out["labels"] = list(model.labels)
    return out


def model_hash(model: ReplacementMatrix) -> str:
    return _hash(model_to_dict(model))


def config_hash(config: dict) -> str:
    return _hash(config)


def _hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def rate_dict(rate: Rate) -> dict:
    return {"exponent": frac_str(rate.exponent), "log_power": int(rate.log_power)}


def profile_to_dict(profile: LimitProfile) -> dict:
    colors = []
    for c in profile.per_color():
        limit = {"kind": c.kind, "coefficient": None if c.coefficient is None else frac_str(c.coefficient)}
        if c.kind == "chained":
            limit["relative_to_block"] = c.block - 1
        colors.append({"color": c.color, "block": c.block, **rate_dict(c.rate), "limit": limit})
    blocks = []
    for bl in profile.blocks:
        b = bl.block
        blocks.append({
            "block": b.index,
            "colors": list(b.colors),
            "lambda": frac_str(b.lam),
            "nu": b.nu,
            "pi": [frac_str(x) for x in bl.pi],
            "zeta": None if bl.zeta is None else [frac_str(x) for x in bl.zeta],
            "chain_coeff": None if bl.chain_coeff is None else frac_str(bl.chain_coeff),
            "v_tag": bl.tag.kind,
        })
    return {"colors": colors, "blocks": blocks}


def oracle_report(tree: OracleTree | None, mean, checks) -> dict:
    """Build ``{"mean", "atoms", "martingale_checks"}``; ``checks`` are (kind, index, discrepancy)."""
    out = {"mean": [frac_str(x) for x in mean]}
    out["atoms"] = [] if tree is None else [
        {"c": [frac_str(x) for x in c], "p": frac_str(p)} for c, p in tree.leaves
    ]
    out["martingale_checks"] = [
        {"kind": kind, "index": int(index), "max_discrepancy": frac_str(d)} for kind, index, d in checks
    ]
    return out


def _fmt(x: float) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def trajectory_csv(ensemble, rates, meta: dict | None = None) -> str:
    """CSV text with one row per (replication, checkpoint); colors and blocks numbered from 1.

    ``meta`` entries are written first as ``# key=value`` comment lines.
    """
    K1 = ensemble.counts.shape[2]
    scaled = ensemble.scaled(rates)
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={value}\n")
    header = ["rep", "N"] + [f"c_{k + 1}" for k in range(K1)] + [f"scaled_{k + 1}" for k in range(K1)]
    header += [f"U_{j + 1}" for j in ensemble.u_blocks] + [f"M_{l + 1}" for l in ensemble.m_colors]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rep in range(ensemble.reps):
        for i, N in enumerate(ensemble.checkpoints):
            row = [rep, int(N)]
            row += [_fmt(x) for x in ensemble.counts[rep, i]]
            row += [_fmt(x) for x in scaled[rep, i]]
            row += [_fmt(x) for x in ensemble.U[rep, i]]
            row += [_fmt(x) for x in ensemble.M[rep, i]]
            w.writerow(row)
    return buf.getvalue()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def to_jsonable(obj):
    """Recursively convert Fractions and numpy scalars for :func:`json.dumps`."""
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj
