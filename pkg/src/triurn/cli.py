"""Command line entry point ``urn``."""

from __future__ import annotations

import argparse
import json
import sys

from . import analysis, oracle
from .errors import NotApplicable, TooLarge, UrnError, ValidationError
from .matrix import block_structure, check_increasing_order, check_unique_arrangement
from .rearrange import rearrange_to_increasing
from .serialization import (
    config_hash,
    frac_str,
    load_model,
    model_hash,
    model_to_dict,
    oracle_report,
    profile_to_dict,
    to_jsonable,
    trajectory_csv,
    write_text,
)
from .simulator import run_ensemble
from .spectral import per_color_rates, theorem_rates

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_ASSUMPTION = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# analyze


def _analyze(model, rearrange: bool) -> dict:
    out = {"model": model_to_dict(model), "warnings": list(model.warnings)}
    target = model
    if rearrange:
        arr = rearrange_to_increasing(model)
        out["perm"] = list(arr.perm)
        out["rearranged"] = model_to_dict(arr.rearranged)
        target = arr.rearranged
    violations = check_increasing_order(target)
    out["blocks"] = [
        {"block": b.index, "colors": list(b.colors), "lambda": frac_str(b.lam), "nu": b.nu}
        for b in block_structure(target)
    ]
    out["increasing_order"] = {"holds": not violations, "violations": violations}
    out["unique_arrangement"] = check_unique_arrangement(target)
    out["rates"] = [
        {"color": k, "exponent": frac_str(r.exponent), "log_power": r.log_power}
        for k, r in enumerate(per_color_rates(target))
    ]
    try:
        out["profile"] = profile_to_dict(theorem_rates(target))
    except UrnError as exc:
        out["profile"] = None
        out["profile_error"] = str(exc)
    return out


def _analyze_text(info: dict) -> str:
    lines = []
    for w in info["warnings"]:
        lines.append(f"warning: {w}")
    if "perm" in info:
        lines.append(f"permutation (old -> new): {info['perm']}")
        lines.append("rearranged R:")
        lines += ["  " + "  ".join(row) for row in info["rearranged"]["R"]]
    inc = info["increasing_order"]
    lines.append("increasing order: " + ("yes" if inc["holds"] else f"no, colors {inc['violations']}"))
    lines.append(f"unique arrangement: {'yes' if info['unique_arrangement'] else 'no'}")
    for b in info["blocks"]:
        lines.append(f"block {b['block']}: colors {b['colors']} lambda={b['lambda']} nu={b['nu']}")
    for r in info["rates"]:
        log = f" (log N)^{r['log_power']}" if r["log_power"] else ""
        lines.append(f"color {r['color']}: C_N ~ N^{r['exponent']}{log}")
    if info["profile"] is None:
        lines.append(f"profile: unavailable ({info['profile_error']})")
    else:
        for c in info["profile"]["colors"]:
            coef = c["limit"]["coefficient"]
            lines.append(f"color {c['color']} limit: {c['limit']['kind']}" + (f", coefficient {coef}" if coef else ""))
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    model = load_model(args.model, normalize=args.normalize)
    info = _analyze(model, args.rearrange)
    _emit(_dump(info) if args.format == "json" else _analyze_text(info), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    model = load_model(args.model, normalize=args.normalize)
    cfg = {"steps": args.steps, "reps": args.reps, "seed": args.seed, "gamma": args.gamma,
           "m_colors": list(range(model.dim)) if args.track_m else []}
    ens = run_ensemble(model, args.steps, args.reps, master_seed=args.seed, gamma=args.gamma,
                       m_colors=cfg["m_colors"], n_jobs=args.jobs)
    meta = {"seed": args.seed, "config_hash": config_hash(cfg), "matrix_hash": model_hash(model)}
    write_text(args.out, trajectory_csv(ens, per_color_rates(model), meta))
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    model = load_model(args.model, normalize=args.normalize)
    N = args.steps
    tree = None
    checks = []
    if args.mode == "enumerate":
        tree = oracle.enumerate_distribution(model, N)
    elif args.mode == "martingale":
        for b in block_structure(model):
            if b.nu == 0:
                checks.append(("U", b.index, oracle.verify_martingale_U(model, b.index, N)))
        for color in range(model.dim):
            checks.append(("M", color, oracle.verify_martingale_M(model, color, N)))
    report = {"N": N, "mode": args.mode, "matrix_hash": model_hash(model),
              **oracle_report(tree, oracle.exact_mean(model, N), checks)}
    _emit(_dump(report), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    model = load_model(args.model, normalize=args.normalize)
    cfg = analysis.load_config(args.config, steps=args.steps, reps=args.reps, seed=args.seed,
                               gamma=args.gamma, n_jobs=args.jobs)
    report = analysis.convergence_report(model, cfg)
    _emit(_dump(report.to_dict()), args.out)
    if report.assumption_failed and cfg.get("require_unique_arrangement", True):
        print(f"assumption failure: {report.assumption['message']}", file=sys.stderr)
        return EXIT_ASSUMPTION
    failed = [k for k, v in report.verdicts.items() if not v]
    for k in failed:
        print(f"FAIL {k}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="urn", description="Balanced triangular urn analysis and simulation.")
    sub = p.add_subparsers(dest="command", required=True)

    def model_arg(sp):
        sp.add_argument("model", help="model JSON file with keys R, C0 and optionally labels")
        sp.add_argument("--normalize", action="store_true", help="divide R by its common row sum")

    a = sub.add_parser("analyze", help="validate, rearrange and print the predicted growth profile")
    model_arg(a)
    a.add_argument("--rearrange", action="store_true")
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="write a trajectory CSV")
    model_arg(s)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gamma", type=float, default=1.2, help="checkpoint spacing ratio")
    s.add_argument("--track-m", action="store_true", help="also record M for every color")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="exact small-N mean, distribution or martingale checks")
    model_arg(o)
    o.add_argument("--steps", type=int, required=True)
    o.add_argument("--mode", choices=("mean", "enumerate", "martingale"), default="mean")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", help="simulate and check every predicted rate")
    model_arg(v)
    v.add_argument("--steps", type=int)
    v.add_argument("--reps", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--gamma", type=float)
    v.add_argument("--jobs", type=int)
    v.add_argument("--config", help="JSON overriding the default config and tolerances")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid model: {type(exc).__name__}: {exc}", file=sys.stderr)
        print("hint: give decimals as strings, e.g. \"0.1\", to keep them exact", file=sys.stderr)
        return EXIT_INVALID
    except (TooLarge, NotApplicable, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
