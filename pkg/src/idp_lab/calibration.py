"""Calibration constants shared by every statistical verdict.

All thresholds live in one record so that reports can embed exactly the
values they were judged against.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Calibration:
    n_se: float = 3.0                # width of Monte Carlo agreement bands, in standard errors
    significance: float = 0.01       # two-sample / goodness-of-fit tests
    rel_decay: float = 0.05          # decay threshold relative to the lag-0 value
    rigidity_ratio: float = 5.0      # revival must exceed the Cesaro level by this factor
    rigidity_fraction: float = 0.5   # Q(A & T^-k A) / Q(A) floor at rigidity lags
    birkhoff_rel_band: float = 0.25  # ergodic band for Var(Birkhoff mean) / Var(X_0)
    small_jump_tol: float = 0.1      # max neglected-jump variance per coordinate

    def as_dict(self) -> dict:
        return asdict(self)

    def updated(self, overrides: dict | None) -> "Calibration":
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown calibration keys: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


DEFAULT = Calibration()
