"""idp-lab <simulate|verify|spectra|classify> --config PATH --seed N [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 tolerance or precondition
failure, 4 identity-test failure (including a classification mismatch).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .base_systems import BaseSystemError, WindowSpec
from .config import ConfigError, ExperimentConfig, load
from .ergodic_tests import Budget, BudgetError, classify, jsonable
from .output import csv_text, json_text, matrix_csv, provenance, write_all
from .process import SmallJumpError, SpecError, sample_trajectory
from .spectral import CSV_HEADER, atom_at_zero, autocov_empirical, predict_exp_covariance, levy_sigma
from .verification import process_checks, suspension_checks

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_IDENTITY = 0, 2, 3, 4

COMPARISON_HEADER = ("lambda", "lag", "empirical_real", "empirical_imag", "empirical_se",
                     "predicted_real", "predicted_imag", "predicted_se", "agree", "atom_at_zero")


def _streams(cfg: ExperimentConfig, seed: int):
    children = np.random.SeedSequence(seed).spawn(len(cfg.specs))
    return [np.random.default_rng(c) for c in children]


def _meta(cfg, seed, **extra):
    return provenance(cfg.cal, seed=seed, **extra)


def _estimate_csv(est, meta) -> str:
    body = est.to_csv().splitlines()[1:]
    return csv_text(CSV_HEADER, [line.split(",") for line in body], meta)


def cmd_simulate(cfg: ExperimentConfig, seed: int):
    files = {}
    for (name, spec), rng in zip(cfg.specs, _streams(cfg, seed)):
        batch = sample_trajectory(spec, cfg.n, cfg.threshold, cfg.budget.replicates, rng, cfg.cal.small_jump_tol)
        meta = _meta(cfg, seed, spec=name)
        files[f"{name}_trajectories.csv"] = matrix_csv(batch.windows, "X", meta)
        files[f"{name}_metadata.json"] = json_text({
            **_meta(cfg, seed),
            "name": name,
            "spec": spec.describe(),
            "n": cfg.n,
            "threshold": cfg.threshold,
            "replicates": cfg.budget.replicates,
            "compensation_mode": batch.compensation_mode,
            "small_jump_bound": batch.small_jump_bound,
            "lipschitz_tolerance": batch.lipschitz_tolerance,
        })
    return files, True


def cmd_verify(cfg: ExperimentConfig, seed: int):
    files, ok = {}, True
    w = WindowSpec(cfg.n, cfg.threshold)
    lines = []
    for (name, spec), rng in zip(cfg.specs, _streams(cfg, seed)):
        sections = {}
        for i, lf in enumerate(spec.leaves()):
            checks = suspension_checks(lf.base, w, cfg.budget.draws, rng, cfg.cal)
            sections[f"suspension[{i}] {lf.base.family}"] = checks
        sections["process"] = process_checks(spec, w, cfg.budget.replicates, cfg.budget.K, rng, cfg.cal,
                                             cfg.corrupt_compensator)
        report = {**_meta(cfg, seed), "name": name, "spec": spec.describe(),
                  "window": {"n": cfg.n, "threshold": cfg.threshold},
                  "sections": {k: [c.as_dict() for c in v] for k, v in sections.items()}}
        passed = all(c.passed for v in sections.values() for c in v)
        report["pass"] = passed
        ok &= passed
        files[f"{name}_verify.json"] = json_text(report)
        for sec, checks in sections.items():
            for c in checks:
                lines.append(f"{name:<16} {sec:<28} {c.name:<30} {'pass' if c.passed else 'FAIL'}"
                             f"  empirical={c.empirical.real:.6g}{c.empirical.imag:+.6g}j"
                             f"  exact={c.exact.real:.6g}{c.exact.imag:+.6g}j  se={c.std_error:.3g}")
    files["verify_report.txt"] = "\n".join(lines) + "\n"
    return files, ok


def cmd_spectra(cfg: ExperimentConfig, seed: int):
    files = {}
    K = cfg.budget.K
    w = WindowSpec(cfg.span, cfg.threshold)
    for (name, spec), rng in zip(cfg.specs, _streams(cfg, seed)):
        batch = sample_trajectory(spec, cfg.span, cfg.threshold, cfg.budget.replicates, rng, cfg.cal.small_jump_tol)
        rows, plots = [], []
        for lam in cfg.budget.lambdas:
            tag = f"{name}_lambda{lam:.12g}"
            emp = autocov_empirical(batch, lam, K)
            sigma = levy_sigma(spec, lam, K, w, draws=cfg.budget.draws, rng=rng, by_start=True)
            pred = predict_exp_covariance(spec, lam, sigma, w)
            atom = atom_at_zero(emp, K, cfg.cal.rel_decay, cfg.cal)
            meta = _meta(cfg, seed, spec=name, **{"lambda": lam})
            files[f"{tag}_empirical.csv"] = _estimate_csv(emp, meta)
            files[f"{tag}_levy.csv"] = _estimate_csv(sigma, meta)
            for k in range(K + 1):
                e, p = emp[k], pred[k]
                se_e, se_p = emp.std_error(k), pred.std_error(k)
                agree = abs(e - p) <= cfg.cal.n_se * float(np.hypot(se_e, se_p)) + 1e-12
                rows.append((lam, k, e.real, e.imag, se_e, p.real, p.imag, se_p, int(agree), int(atom.detected)))
            plots.append(f"{tag}_empirical.csv")
        files[f"{name}_comparison.csv"] = csv_text(COMPARISON_HEADER, rows, _meta(cfg, seed, spec=name))
        files[f"{name}_plot.txt"] = _plot_spec(name, plots)
    return files, True


def _plot_spec(name: str, empirical_files) -> str:
    lines = [f"# plot specification for {name}", ""]
    lines += ["[panel covariance]", f"source = {name}_comparison.csv", "x = lag",
              "y = empirical_real, predicted_real", "error = empirical_se", "group = lambda", ""]
    for f in empirical_files:
        lines += [f"[panel {f[:-4]}]", f"source = {f}", "x = lag", "y = real, imag", "error = se_real, se_imag", ""]
    return "\n".join(lines)


def cmd_classify(cfg: ExperimentConfig, seed: int):
    files, ok = {}, True
    b = cfg.budget
    budget = Budget(replicates=b.replicates, length=cfg.span, threshold=cfg.threshold, K=b.K,
                    schedule=tuple(b.schedule), lambdas=tuple(b.lambdas), lam=b.lam)
    budget.check()
    for (name, spec), rng in zip(cfg.specs, _streams(cfg, seed)):
        report = classify(spec, budget, rng, cfg.cal)
        doc = {**_meta(cfg, seed), "name": name, **report.as_dict()}
        files[f"{name}_classification.json"] = json_text(jsonable(doc))
        files[f"{name}_classification.txt"] = f"spec             : {name}\n" + report.to_text()
        ok &= report.matches
    return files, ok


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "spectra": cmd_spectra, "classify": cmd_classify}


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idp-lab", description="Simulate and test stationary ID processes.")
    p.add_argument("--version", action="version", version=f"idp-lab {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--seed", required=True, type=_seed, help="unsigned 64-bit seed")
    p.add_argument("--out", help="output directory (overrides the configuration)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)     # exits with status 2 on usage errors
    try:
        cfg = load(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else (cfg.output_dir or Path("idp-lab-out"))
    try:
        files, ok = COMMANDS[args.command](cfg, args.seed)
    except (SmallJumpError, BudgetError, BaseSystemError) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SpecError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_all(out, files)
    except OSError as exc:
        print(f"config error: cannot write to {out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in sorted(files):
        print(out / f)
    if not ok:
        print(f"{args.command}: one or more checks failed", file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
