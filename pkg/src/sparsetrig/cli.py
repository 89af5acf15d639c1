"""Batch experiment runner.

Subcommands: build-spectrum, approximate, represent, riesz, sharpness.
Each reads a JSON config (strict keys), writes a manifest JSON plus data
CSVs into --out, and exits 0 iff every certificate in the run passed;
failures leave a machine-readable report and a nonzero exit code.
Identical configs (including the seed) produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import blocks, numbertheory, riesz
from .approximants import (ApproximantReport, ConstructionInfeasible,
                           analytic_korner, analytic_unit, block_approximant,
                           analytic_block_approximant, korner_polynomial)
from .blockpoly import iter_coeffs_of
from .circle import CircleGrid
from .engines import (engine_grid, run_ae_engine, run_asymptotic_l2_engine,
                      run_infinity_mode, run_measure_engine,
                      run_squares_engine, run_stoptime_engine)
from .targets import make_target
from .trigpoly import TrigPoly

STREAM_COEFF_CAP = 200000


class ConfigError(ValueError):
    pass


def _check_keys(cfg: dict, allowed: set, context: str):
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {context}: {sorted(unknown)}")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1, default=str)
                    + "\n")


def _write_spectrum(path: Path, spec) -> None:
    with open(path, "w") as fh:
        for x in spec:
            fh.write(f"{x}\n")


def _write_poly_csv(path: Path, poly) -> None:
    rows = []
    try:
        for k, c in iter_coeffs_of(poly, STREAM_COEFF_CAP):
            rows.append((k, c))
    except (OverflowError, AttributeError):
        rows = None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "re", "im"])
        if rows is None:
            return
        for k, c in sorted(rows, key=lambda kc: kc[0]):
            w.writerow([k, repr(float(c.real)), repr(float(c.imag))])


def cmd_build_spectrum(cfg: dict, out: Path, grid_size: int, seed: int) -> int:
    _check_keys(cfg, {"kind", "eps", "n", "w", "blocks", "s_cap"}, "build-spectrum")
    kind = cfg.get("kind")
    s_cap = int(cfg.get("s_cap", blocks.DEFAULT_S_CAP))
    if kind in ("hadamard", "analytic_hadamard"):
        eps_name = cfg.get("eps", "1/log")
        n = int(cfg.get("n", 200))
        if eps_name == "1/log":
            eps = lambda i: 1.0 / math.log(i + 2)
        elif eps_name == "1/n":
            eps = lambda i: 1.0 / (i + 2)
        elif isinstance(eps_name, (int, float)):
            eps = lambda i: float(eps_name)
        else:
            raise ConfigError(f"unknown eps rule {eps_name!r}")
        build = blocks.build_hadamard_spectrum if kind == "hadamard" \
            else blocks.build_analytic_hadamard_spectrum
        built = build(eps, n, s_cap=s_cap)
    elif kind in ("squares", "analytic_squares"):
        n_blocks = int(cfg.get("blocks", 3))
        w_name = cfg.get("w", "k")
        if w_name == "k":
            w = lambda k: float(k)
        elif w_name == "sqrt":
            w = lambda k: math.sqrt(max(k, 0))
        else:
            raise ConfigError(f"unknown w rule {w_name!r}")
        build = blocks.build_squares_spectrum if kind == "squares" \
            else blocks.build_analytic_squares_spectrum
        built = build(w, n_blocks, s_cap=s_cap)
    else:
        raise ConfigError(f"unknown spectrum kind {kind!r}")
    _write_spectrum(out / "spectrum.txt", built.spectrum)
    _write_json(out / "manifest.json", {
        "command": "build-spectrum", "kind": kind, "seed": seed,
        "size": len(built.spectrum),
        "blocks": [m.as_dict() for m in built.manifest],
        "certificates_passed": True,
    })
    return 0


def cmd_approximate(cfg: dict, out: Path, grid_size: int, seed: int) -> int:
    _check_keys(cfg, {"kind", "eps", "delta", "target", "target_params",
                      "s", "a"}, "approximate")
    kind = cfg.get("kind")
    grid = CircleGrid(grid_size)
    report: ApproximantReport
    try:
        if kind == "analytic_unit":
            report = analytic_unit(float(cfg["eps"]), grid=grid, strict=False)
        elif kind == "korner":
            report = korner_polynomial(float(cfg["eps"]), float(cfg["delta"]),
                                       grid=grid, strict=False)
        elif kind == "analytic_korner":
            report = analytic_korner(float(cfg["eps"]), grid=grid, strict=False)
        elif kind in ("block", "analytic_block"):
            f = make_target(cfg.get("target", "step"), grid,
                            cfg.get("target_params", {}))
            s, a = int(cfg["s"]), int(cfg["a"])
            if kind == "block":
                report = block_approximant(f, float(cfg["eps"]),
                                           float(cfg["delta"]), s, a,
                                           strict=False)
            else:
                report = analytic_block_approximant(f, float(cfg["eps"]),
                                                    s, a, strict=False)
        else:
            raise ConfigError(f"unknown approximant kind {kind!r}")
    except ConstructionInfeasible as exc:
        _write_json(out / "manifest.json", {
            "command": "approximate", "kind": kind, "seed": seed,
            "certificates_passed": False,
            "infeasible": {"message": str(exc), "diagnostics": exc.diagnostics},
        })
        return 2
    _write_poly_csv(out / "poly.csv", report.poly)
    (out / "report.json").write_text(report.to_json() + "\n")
    if report.exceptional_set is not None:
        np.save(out / "exceptional_mask.npy", report.exceptional_set)
    passed = report.all_passed()
    _write_json(out / "manifest.json", {
        "command": "approximate", "kind": kind, "seed": seed,
        "certificates_passed": passed,
        "failures": report.failures(),
    })
    return 0 if passed else 1


def cmd_represent(cfg: dict, out: Path, grid_size: int, seed: int) -> int:
    _check_keys(cfg, {"engine", "target", "target_params", "stages",
                      "eps", "s", "a", "spectrum"}, "represent")
    engine = cfg.get("engine")
    grid = CircleGrid(grid_size)
    f = make_target(cfg.get("target", "zero"), grid,
                    cfg.get("target_params", {}))
    stages = int(cfg.get("stages", 3))
    if engine == "ae":
        spec_cfg = cfg.get("spectrum", {"kind": "hadamard", "eps": "1/n", "n": 120})
        eps_rule = spec_cfg.get("eps", "1/n")
        fn = (lambda i: 1.0 / math.log(i + 2)) if eps_rule == "1/log" \
            else (lambda i: 1.0 / (i + 2))
        built = blocks.build_hadamard_spectrum(fn, int(spec_cfg.get("n", 120)))
        run = run_ae_engine(f, built, stages)
    elif engine == "squares":
        run = run_squares_engine(f, stages,
                                 s_budget=int(cfg.get("s", 200000)),
                                 a=int(cfg.get("a", 3)))
    elif engine == "asymptotic_l2":
        run = run_asymptotic_l2_engine(f, stages)
    elif engine == "infinity":
        run = run_infinity_mode(f, stages)
    elif engine == "stoptime":
        t = grid.points
        mask = (t >= 0) & (t < math.pi / 2)
        run = run_stoptime_engine(f, mask, float(cfg.get("eps", 0.25)),
                                  s_budget=int(cfg.get("s", 200000)),
                                  a=int(cfg.get("a", 3)))
    elif engine == "measure":
        run = run_measure_engine(f, stages,
                                 s_budget=int(cfg.get("s", 200000)),
                                 a=int(cfg.get("a", 3)))
    else:
        raise ConfigError(f"unknown engine {engine!r}")
    _write_json(out / "manifest.json", {
        "command": "represent", "engine": engine, "seed": seed,
        "run": run.manifest(),
        "certificates_passed": run.all_certificates_passed(),
    })
    with open(out / "stages.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "ok", "note"])
        for st in run.stages:
            w.writerow([st.index, int(st.ok), st.note])
    _write_merged_stream(out / "merged_stream.csv", run)
    for st in run.stages:
        if st.poly is not None:
            _write_poly_csv(out / f"stage_{st.index}.csv", st.poly)
    if run.final_residual is not None:
        np.save(out / "final_residual.npy", run.final_residual)
    return 0 if run.all_certificates_passed() else 1


def _write_merged_stream(path: Path, run) -> None:
    """Merged coefficient stream in the engine's partial-sum order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["order_index", "k", "re", "im"])
        order = 0
        for st in run.stages:
            if st.poly is None:
                continue
            try:
                rows = sorted(iter_coeffs_of(st.poly, STREAM_COEFF_CAP),
                              key=lambda kc: abs(kc[0]))
            except (OverflowError, AttributeError):
                continue  # lazy frequencies: structural record only
            for k, cval in rows:
                w.writerow([order, k, repr(float(cval.real)),
                            repr(float(cval.imag))])
                order += 1


def cmd_riesz(cfg: dict, out: Path, grid_size: int, seed: int) -> int:
    _check_keys(cfg, {"n", "nu1", "n_max", "threshold", "clt_terms"}, "riesz")
    n = int(cfg.get("n", 60))
    sched = riesz.make_schedule(n, nu1=int(cfg.get("nu1", 9)))
    grid = CircleGrid(grid_size)
    n_max = int(cfg.get("n_max", min(n, 60)))
    cos_diag = riesz.cosine_product_bounds(sched, grid, n_max)
    an_diag = riesz.analytic_product_diagnostics(
        sched, grid, min(n_max, 40), threshold=float(cfg.get("threshold", 1e-2)))
    cross = riesz.cross_identity_max_error(sched, grid, min(n_max, 40))
    clt = riesz.clt_check(sched, grid, min(int(cfg.get("clt_terms", n)), n))
    riesz.export_diagnostics_csv(cos_diag, out / "cosine_diag.csv")
    riesz.export_diagnostics_csv(an_diag, out / "analytic_diag.csv")
    payload = {
        "command": "riesz", "seed": seed,
        "cosine": cos_diag.summary, "analytic": an_diag.summary,
        "cross_identity_max_log_error": cross,
        "clt": clt,
        "certificates_passed": bool(
            abs(cos_diag.summary["mean_log_one_minus_cos"]
                - riesz.NEG_LOG_2) < 0.05 and cross < 1e-9),
    }
    _write_json(out / "manifest.json", payload)
    return 0 if payload["certificates_passed"] else 1


def cmd_sharpness(cfg: dict, out: Path, grid_size: int, seed: int) -> int:
    _check_keys(cfg, {"A", "r", "checked_range"}, "sharpness")
    a_bound = int(cfg.get("A", 1))
    cert = numbertheory.squares_gap_certificate(
        a_bound, checked_range=int(cfg.get("checked_range", 10 ** 4)))
    run_r = int(cfg.get("r", 4))
    p, x = numbertheory.find_nonresidue_run(run_r)
    ok = all(numbertheory.legendre(x + i, p) == -1 for i in range(1, run_r + 1))
    (out / "gap_certificate.json").write_text(cert.to_json() + "\n")
    _write_json(out / "manifest.json", {
        "command": "sharpness", "seed": seed,
        "gap_certificate": json.loads(cert.to_json()),
        "nonresidue_run": {"r": run_r, "p": p, "x": x, "verified": ok},
        "certificates_passed": bool(ok),
    })
    return 0 if ok else 1


COMMANDS = {
    "build-spectrum": cmd_build_spectrum,
    "approximate": cmd_approximate,
    "represent": cmd_represent,
    "riesz": cmd_riesz,
    "sharpness": cmd_sharpness,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparsetrig",
        description="sparse trigonometric spectra and representation engines")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory")
    parser.add_argument("--grid", type=int, default=2 ** 14,
                        help="grid size M (even, >= 8)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    cfg = {}
    if args.config is not None:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            print("config must be a JSON object", file=sys.stderr)
            return 2
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, args.out, args.grid, args.seed)
    except (ConfigError, KeyError, ValueError) as exc:
        report = {"error": str(exc), "command": args.command}
        _write_json(args.out / "failure.json", report)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
