"""Experiment configuration: JSON validated against the shipped schema."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import calibration
from .base_systems import system_from_params
from .ergodic_tests import DEFAULT_SCHEDULE, LAMBDA_GRID
from .process import LevyMeasureSpec, alpha_stable_spec, canonical_four, convolve, leaf


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every offending path."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def schema() -> dict:
    text = resources.files("idp_lab").joinpath("schema/config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(raw: dict):
    validator = jsonschema.Draft202012Validator(schema())
    errors = [_deepest(e) for e in validator.iter_errors(raw)]
    errors.sort(key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError([f"/{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in errors])


def _deepest(error):
    """Descend through oneOf failures to the alternative that got furthest."""
    while error.context:
        error = max(error.context, key=lambda e: len(e.absolute_path))
    return error


def build_spec(d: dict) -> LevyMeasureSpec:
    if "base" in d:
        return leaf(system_from_params(d["base"]), d.get("drift", 0.0), d.get("representation", "Truncated"))
    if "convolution" in d:
        return convolve([build_spec(c) for c in d["convolution"]], d.get("labels", ()))
    if "canonical_four" in d:
        slots = d["canonical_four"]
        return canonical_four(*(build_spec(slots[k]) if k in slots else None for k in ("B", "m", "wm", "ne")))
    a = d["alpha_stable"]
    return alpha_stable_spec(a["alpha"], a["pulse"])


@dataclass
class RunBudget:
    replicates: int = 1000
    draws: int = 20_000
    K: int = 10
    lambdas: tuple = LAMBDA_GRID
    lam: float = 1.0
    schedule: tuple = DEFAULT_SCHEDULE


@dataclass
class ExperimentConfig:
    specs: list[tuple[str, LevyMeasureSpec]]
    n: int
    threshold: float
    margin: int = 0
    budget: RunBudget = field(default_factory=RunBudget)
    output_dir: Path | None = None
    cal: calibration.Calibration = calibration.DEFAULT
    corrupt_compensator: float = 0.0
    raw: dict = field(default_factory=dict)

    @property
    def span(self) -> int:
        """Window length for lag-based commands."""
        return self.n + self.margin


def parse(raw: dict) -> ExperimentConfig:
    validate(raw)
    if not raw["specs"]:
        raise ConfigError(["/specs: at least one spec is required"])
    names = [s["name"] for s in raw["specs"]]
    if len(set(names)) != len(names):
        raise ConfigError(["/specs: spec names must be unique"])
    problems, specs = [], []
    for i, s in enumerate(raw["specs"]):
        try:
            specs.append((s["name"], build_spec(s["spec"])))
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"/specs/{i}/spec: {exc}")
    if problems:
        raise ConfigError(problems)
    b = raw.get("budget", {})
    budget = RunBudget(
        replicates=b.get("replicates", RunBudget.replicates),
        draws=b.get("draws", RunBudget.draws),
        K=b.get("K", RunBudget.K),
        lambdas=tuple(b.get("lambdas", LAMBDA_GRID)),
        lam=b.get("lambda", RunBudget.lam),
        schedule=tuple(tuple(p) for p in b.get("schedule", DEFAULT_SCHEDULE)),
    )
    out = raw.get("output", {}).get("directory")
    w = raw["window"]
    return ExperimentConfig(
        specs=specs, n=w["n"], threshold=w["threshold"], margin=w.get("margin", 0), budget=budget,
        output_dir=Path(out) if out else None,
        cal=calibration.DEFAULT.updated(raw.get("calibration")),
        corrupt_compensator=raw.get("test_hooks", {}).get("corrupt_compensator", 0.0),
        raw=raw,
    )


def load(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"]) from exc
    return parse(raw)
