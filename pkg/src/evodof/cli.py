"""Command-line entry point: reproducible runs with structured reports.

Subcommands
-----------
region    - emit a DoF region (half-planes, vertices, status) as JSON/CSV
corollary - closed-form feedback/DoF trade-off solvers
scheme    - resolve a scheme: durations, allocation tables, ledger, DoF
simulate  - Monte Carlo exponent verification of a scheme config
lattice   - rotated-QAM codebook distance/decoding verification

Every report embeds the fully resolved run configuration (including the
seed), all numbers are printed at 12 significant digits, and identical
configurations produce byte-identical reports.  Exit status: 0 when all
contract checks pass, 1 on a contract failure, 64 on a configuration
error (the message names the violated precondition).

``EVODOF_THREADS`` sets the worker-thread count for the independent
measurement tasks of ``simulate``; results are merged in task order and
do not depend on the thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import lattice as lat
from . import measure, regions, schemes
from .quality import (
    ProfileError,
    QualityProfile,
    average_exponent,
    fractional_delay,
    profile_from_dict,
    validate_profile,
)

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_CONFIG = 64

REPORT_VERSION = "1"


class ConfigError(ValueError):
    pass


def _sig12(x):
    """Round floats (recursively) to 12 significant digits for reports."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _sig12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_sig12(v) for v in x]
    return x


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(_sig12(doc), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for c in row:
            if isinstance(c, float):
                cells.append(f"{c:.12g}")
            else:
                cells.append(str(c))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_profile_cfg(spec) -> QualityProfile:
    if spec is None:
        raise ConfigError("a quality profile is required (file path or inline object)")
    if isinstance(spec, str):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read profile file: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed profile JSON: {e}") from e
    return profile_from_dict(spec)


def _parse_grid(text: str) -> list[float]:
    """'1e2:1e6:5' -> 5 log-spaced points; '1e2,1e4,1e6' -> explicit list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be lo:hi:n or a comma list, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(p) for p in np.geomspace(lo, hi, n)]
    return [float(p) for p in text.split(",")]


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",")]


# ---------------------------------------------------------------------------
# subcommands


def _region_doc(region: regions.DofRegion) -> dict:
    return {
        "halfplanes": [list(h) for h in region.halfplanes],
        "vertices": [[v.d1, v.d2] for v in region.vertices],
        "status": region.status,
    }


def run_region(cfg: dict) -> tuple[dict, int]:
    which = str(cfg.get("theorem", "1"))
    prof = cfg.get("profile")
    abar = cfg.get("abar")
    abar1, abar2, beta = cfg.get("abar1"), cfg.get("abar2"), cfg.get("beta")
    if prof is not None:
        p = _load_profile_cfg(prof)
        abar = average_exponent(p, 1) if abar is None else abar
        abar1 = average_exponent(p, 1) if abar1 is None else abar1
        abar2 = average_exponent(p, 2) if abar2 is None else abar2
        beta = p.beta if beta is None else beta

    if which == "1":
        if abar is None:
            raise ConfigError("region 1 needs --abar (or --profile)")
        region = regions.region_perfect_delayed(abar)
    elif which == "2":
        if abar is None or beta is None:
            raise ConfigError("region 2 needs --abar and --beta (or --profile)")
        region = regions.region_imperfect_delayed(abar, beta)
    elif which == "4":
        if abar1 is None or abar2 is None:
            raise ConfigError("region 4 needs --abar1 and --abar2 (or --profile)")
        region = regions.region_asymmetric(abar1, abar2)
    elif which == "outer":
        if abar1 is None or abar2 is None:
            raise ConfigError("outer bound needs --abar1 and --abar2")
        region = regions.outer_bound(abar1, abar2)
    else:
        raise ConfigError(f"unknown region selector {which!r} (1, 2, 4 or outer)")

    doc = {"version": REPORT_VERSION, "command": "region", "config": cfg,
           "region": _region_doc(region)}
    if cfg.get("csv"):
        verts = list(region.vertices) + [region.vertices[0]]
        _write_csv(cfg["csv"], ["d1", "d2"], [[v.d1, v.d2] for v in verts])
    return doc, EXIT_OK


def run_corollary(cfg: dict) -> tuple[dict, int]:
    solve = cfg.get("solve")
    doc = {"version": REPORT_VERSION, "command": "corollary", "config": cfg}
    if solve == "min-quality":
        if cfg.get("dprime") is None:
            raise ConfigError("min-quality needs --dprime")
        mq = regions.solve_min_quality(float(cfg["dprime"]))
        doc["result"] = {"abar_min": mq.abar, "beta_min": mq.beta, "note": mq.note}
    elif solve == "max-delay":
        if cfg.get("dprime") is None:
            raise ConfigError("max-delay needs --dprime")
        gamma, witness = regions.solve_max_delay(
            float(cfg["dprime"]),
            alpha_max=cfg.get("alpha_max"),
            beta_max=cfg.get("beta_max"),
            T=int(cfg.get("T", 360)),
        )
        doc["result"] = {
            "gamma_max": gamma,
            "witness": witness.to_dict(),
            "witness_abar": average_exponent(witness, 1),
            "witness_gamma": fractional_delay(witness, 1),
        }
    elif solve == "asymmetry-penalty":
        if cfg.get("abar") is None or cfg.get("abar_prime") is None:
            raise ConfigError("asymmetry-penalty needs --abar and --abar-prime")
        pair, shortfall = regions.asymmetry_penalty(
            float(cfg["abar"]), float(cfg["abar_prime"]))
        doc["result"] = {"pair": [pair.d1, pair.d2], "shortfall": shortfall}
    else:
        raise ConfigError(
            f"unknown solver {solve!r} (min-quality, max-delay, asymmetry-penalty)")
    return doc, EXIT_OK


def _build_scheme_cfg(cfg: dict) -> schemes.SchemeConfig:
    profile = _load_profile_cfg(cfg.get("profile"))
    return schemes.build_scheme(
        kind=cfg.get("kind", "X3"),
        profile=profile,
        S=int(cfg.get("S", 10)),
        T1=float(cfg.get("T1", 1.0)),
        delta=cfg.get("delta"),
        omega=float(cfg.get("omega", 0.5)),
        common_assignment=cfg.get("common_assignment", schemes.SPLIT),
    )


def run_scheme(cfg: dict) -> tuple[dict, int]:
    sc = _build_scheme_cfg(cfg)
    if cfg.get("round"):
        sc = sc.rounded()
    doc = {"version": REPORT_VERSION, "command": "scheme", "config": cfg,
           "summary": schemes.scheme_summary(sc)}
    rows = []
    for phase in measure.representative_phases(sc):
        for t in range(1, sc.profile.T + 1):
            al = schemes.allocation(sc, phase, t)
            for key, cl in sorted(al.classes.items()):
                rows.append([phase, sc.phase_kind(phase), t, key,
                             cl.power, cl.rate, cl.precoder,
                             "vector" if (key == "c" and al.vector_common) else "scalar"])
    doc["allocations"] = {
        "header": ["phase", "kind", "slot", "class", "power_exponent",
                   "rate_prelog", "precoder", "decoding"],
        "rows": rows,
    }
    if cfg.get("csv"):
        _write_csv(cfg["csv"], doc["allocations"]["header"], rows)
    ok = schemes.quantization_ledger(sc).balanced
    return doc, EXIT_OK if ok else EXIT_CONTRACT


def run_simulate(cfg: dict) -> tuple[dict, int]:
    spec = cfg.get("scheme_config")
    if isinstance(spec, str):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read scheme config: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed scheme config JSON: {e}") from e
    if not isinstance(spec, dict):
        raise ConfigError("simulate needs --scheme-config FILE (a JSON object)")
    sc = _build_scheme_cfg(spec)
    grid = _parse_grid(str(cfg.get("grid", "1e2:1e6:5")))
    trials = int(cfg.get("trials", 2000))
    seed = int(cfg.get("seed", 0))
    tol = float(cfg.get("tol", measure.SLOPE_TOL))
    threads = int(os.environ.get("EVODOF_THREADS", "1"))

    phases = measure.representative_phases(sc)
    tasks = []
    for phase in phases:
        kind = sc.phase_kind(phase)
        tasks.append(lambda ph=phase: measure.term_exponents(sc, ph, grid, trials, seed))
        if "c" in schemes.allocation(sc, phase, 1).classes:
            tasks.append(lambda ph=phase: measure.rate_prelog_common(sc, ph, grid, trials, seed))
        tasks.append(lambda ph=phase: measure.transmit_power(sc, ph, grid, trials, seed))
        if kind == "tail":
            for user in (1, 2):
                tasks.append(lambda ph=phase, u=user: measure.rate_prelog_private(
                    sc, ph, u, grid, trials, seed))
        else:
            for user in (1, 2):
                tasks.append(lambda ph=phase, u=user: measure.rate_prelog_mimo(
                    sc, ph, u, grid, trials, seed))
            tasks.append(lambda ph=phase: measure.quantizer_residuals(
                sc, ph, grid, trials, seed))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(lambda f: f(), tasks))
    else:
        chunks = [f() for f in tasks]
    results: list[measure.ExponentMeasurement] = [m for ch in chunks for m in ch]

    override = cfg.get("override_expected") or {}
    rows = []
    all_pass = True
    for m in results:
        expected = m.expected
        for pat, val in override.items():
            if pat in m.label:
                expected = float(val)
        ok = abs(m.slope - expected) <= tol
        all_pass &= ok
        extras = ";".join(f"{k}={_sig12(v)}" for k, v in sorted(m.extras.items()))
        rows.append([m.label, expected, m.slope, m.stderr, "pass" if ok else "FAIL",
                     extras])

    doc = {
        "version": REPORT_VERSION,
        "command": "simulate",
        "config": cfg,
        "grid": grid,
        "trials": trials,
        "seed": seed,
        "tolerance": tol,
        "pass": bool(all_pass),
        "results": [
            {"quantity": r[0], "expected_exponent": r[1], "measured_slope": r[2],
             "stderr": r[3], "status": r[4], "extras": r[5]}
            for r in rows
        ],
    }
    if cfg.get("report"):
        _write_csv(cfg["report"],
                   ["quantity", "expected_exponent", "measured_slope", "stderr",
                    "status", "extras"],
                   rows)
    return doc, EXIT_OK if all_pass else EXIT_CONTRACT


def run_lattice(cfg: dict) -> tuple[dict, int]:
    T = int(cfg.get("T", 2))
    qam = cfg.get("qam")
    qam = int(qam) if qam is not None else None
    delta = float(cfg.get("delta", 0.1))
    grid = _parse_grid(str(cfg.get("P_grid", "1e2,1e4,1e6")))
    alphas = _parse_floats(cfg.get("alphas", "0.0")) if cfg.get("alphas") else [0.0] * T
    if len(alphas) == 1:
        alphas = alphas * T
    if len(alphas) != T:
        raise ConfigError(f"need {T} alphas, got {len(alphas)}")
    abar = sum(alphas) / T
    r = cfg.get("r")
    r = float(r) if r is not None else max(1e-6, 1 - abar - delta)
    trials = int(cfg.get("trials", 10000))
    seed = int(cfg.get("seed", 0))

    rows = []
    ratios = []
    wdists = []
    errs = []
    gap_ok = True
    for P in grid:
        cb = lat.build_codebook(T, r=r, P=P, delta=delta, qam=qam)
        gap = lat.min_coordinate_gap(cb)
        gap_ok &= gap > 0
        mpd = lat.min_product_distance(cb)
        ratio = mpd / cb.theta ** (2 * cb.T)
        wd = lat.whitened_min_distance(cb, alphas)
        er = lat.decode_error_rate(cb, alphas, trials=trials, seed=seed)
        rows.append([P, cb.qam, cb.theta, gap, mpd, ratio, wd, er])
        ratios.append(ratio)
        wdists.append(wd)
        errs.append(er)

    slope = None
    if len(grid) >= 2:
        x = np.log10(grid)
        y = np.log10(np.maximum(wdists, 1e-300))
        slope = float(((x - x.mean()) * (y - y.mean())).sum() / ((x - x.mean()) ** 2).sum())
    monotone = all(errs[i + 1] <= errs[i] + 1e-12 for i in range(len(errs) - 1))
    ok = gap_ok and monotone

    doc = {
        "version": REPORT_VERSION,
        "command": "lattice",
        "config": cfg,
        "rate_prelog": r,
        "alphas": alphas,
        "whitened_distance_slope": slope,
        "ratio_spread": max(ratios) - min(ratios) if ratios else None,
        "pass": bool(ok),
        "rows": [
            {"P": p, "qam": q, "theta": th, "min_coordinate_gap": g,
             "min_product_distance": m, "ratio_to_theta_2T": ra,
             "whitened_min_distance": w, "decode_error_rate": e}
            for p, q, th, g, m, ra, w, e in rows
        ],
    }
    if cfg.get("report"):
        _write_csv(cfg["report"],
                   ["P", "qam", "theta", "min_coordinate_gap", "min_product_distance",
                    "ratio_to_theta_2T", "whitened_min_distance", "decode_error_rate"],
                   rows)
    return doc, EXIT_OK if ok else EXIT_CONTRACT


COMMANDS = {
    "region": run_region,
    "corollary": run_corollary,
    "scheme": run_scheme,
    "simulate": run_simulate,
    "lattice": run_lattice,
}


def run(cfg: dict) -> int:
    """Execute a resolved run configuration; returns the exit status.

    The written report embeds ``cfg`` itself, so re-running the embedded
    config reproduces the report byte for byte.
    """
    command = cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    doc, status = COMMANDS[command](cfg)
    _emit(doc, cfg.get("out"))
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="evodof",
        description="DoF regions and scheme verification for the two-user "
                    "MISO broadcast channel with evolving CSIT",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="emit a DoF region")
    r.add_argument("--theorem", default="1", help="region selector: 1, 2, 4 or outer")
    r.add_argument("--abar", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--abar1", type=float)
    r.add_argument("--abar2", type=float)
    r.add_argument("--profile", help="quality profile JSON file")
    r.add_argument("--csv", help="write the polygon boundary as CSV")
    r.add_argument("--out", help="write the JSON report here instead of stdout")

    c = sub.add_parser("corollary", help="closed-form trade-off solvers")
    c.add_argument("--solve", required=True,
                   choices=["min-quality", "max-delay", "asymmetry-penalty"])
    c.add_argument("--dprime", type=float)
    c.add_argument("--alpha-max", dest="alpha_max", type=float)
    c.add_argument("--beta-max", dest="beta_max", type=float)
    c.add_argument("--abar", type=float)
    c.add_argument("--abar-prime", dest="abar_prime", type=float)
    c.add_argument("--T", type=int, default=360, help="witness profile length")
    c.add_argument("--out")

    s = sub.add_parser("scheme", help="resolve a scheme configuration")
    s.add_argument("--kind", required=True, choices=[k.value for k in schemes.SchemeKind])
    s.add_argument("--profile", required=True)
    s.add_argument("--S", type=int, default=10)
    s.add_argument("--T1", type=float, default=1.0)
    s.add_argument("--delta", type=float)
    s.add_argument("--omega", type=float, default=0.5)
    s.add_argument("--common", dest="common_assignment", default=schemes.SPLIT,
                   choices=[schemes.SPLIT, schemes.USER1, schemes.USER2])
    s.add_argument("--round", action="store_true",
                   help="floor durations to whole blocks before reporting")
    s.add_argument("--csv", help="write the allocation table as CSV")
    s.add_argument("--out")

    m = sub.add_parser("simulate", help="Monte Carlo exponent verification")
    m.add_argument("--scheme-config", dest="scheme_config", required=True,
                   help="JSON file with kind/profile/S/T1/...")
    m.add_argument("--grid", default="1e2:1e6:5", help="lo:hi:n or comma list")
    m.add_argument("--trials", type=int, default=2000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--tol", type=float, default=measure.SLOPE_TOL)
    m.add_argument("--report", help="CSV report path")
    m.add_argument("--out", help="JSON report path (default stdout)")

    l = sub.add_parser("lattice", help="lattice codebook verification")
    l.add_argument("--T", type=int, default=2)
    l.add_argument("--qam", type=int, help="pin the per-dimension QAM size")
    l.add_argument("--r", type=float, help="rate prelog (default 1 - abar - delta)")
    l.add_argument("--P-grid", dest="P_grid", default="1e2,1e4,1e6")
    l.add_argument("--delta", type=float, default=0.1)
    l.add_argument("--alphas", help="comma list of per-slot whitening exponents")
    l.add_argument("--trials", type=int, default=10000)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--report", help="CSV report path")
    l.add_argument("--out")

    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    cfg = {k: v for k, v in vars(ns).items() if v is not None and v is not False}
    try:
        return run(cfg)
    except (ConfigError, ProfileError, schemes.SchemeError, lat.LatticeError,
            regions.InfeasibleError, ValueError, OSError) as e:
        print(f"evodof: error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
