"""Fourier-coefficient estimates of spectral measures.

A spectral measure is only ever handled through finitely many coefficients
sigma(k) = <U^k g, g>, k in [-K, K], with standard errors.  Empirical
coefficients are covariances across independent replicates, averaged over
start positions inside the window; the Levy-measure side is an exact (or
importance-sampled) integral against Q.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import calibration
from .base_systems import WindowSpec
from .process import LevyMeasureSpec, TrajectoryBatch, char_functional

CSV_HEADER = ("lag", "real", "imag", "se_real", "se_imag")


class Provenance(str, Enum):
    EMPIRICAL = "EmpiricalProcess"
    LEVY = "LevyMeasure"
    TRANSFORMED = "Transformed"


@dataclass(frozen=True, eq=False)
class SpectralEstimate:
    """Coefficients for lags 0..K; negative lags follow by Hermitian symmetry."""

    coefficients: np.ndarray          # complex, lags 0..K
    se_real: np.ndarray
    se_imag: np.ndarray
    provenance: Provenance
    replicate_values: np.ndarray | None = None   # (M, K+1) per-replicate terms, if any
    info: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int) -> complex:
        c = self.coefficients[abs(k)]
        return complex(c) if k >= 0 else complex(np.conj(c))

    def std_error(self, k: int) -> float:
        k = abs(k)
        return float(math.hypot(self.se_real[k], self.se_imag[k]))

    def lags(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def full(self) -> np.ndarray:
        """Coefficients on [-K, K]."""
        return np.concatenate([np.conj(self.coefficients[:0:-1]), self.coefficients])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_HEADER) + "\n")
        for k in self.lags():
            c = self[int(k)]
            j = abs(int(k))
            buf.write(",".join(["%d" % k] + ["%.12g" % v for v in
                                             (c.real, c.imag, self.se_real[j], self.se_imag[j])]) + "\n")
        return buf.getvalue()


def _transform(x: np.ndarray, lam):
    return x.astype(complex) if lam is None else np.exp(1j * lam * x)


def autocov_empirical(batch: TrajectoryBatch, lam: float | None = None, K: int = 10,
                      min_replicates: int = 100) -> SpectralEstimate:
    """Across-replicate Cov(g(X_{s+k}), g(X_s)), averaged over start positions s.

    ``lam=None`` is the identity transform, otherwise g(x) = exp(i lam x).
    Each coordinate is centred by its own mean: near the window edges the
    truncated process need not be stationary.
    """
    x = batch.windows
    M, n = x.shape
    if K >= n:
        raise ValueError(f"K = {K} needs a window longer than {n}")
    if M < min_replicates:
        raise ValueError(f"at least {min_replicates} replicates are needed, got {M}")
    g = _transform(x, lam)
    centred = g - g.mean(axis=0)
    per = np.empty((M, K + 1), dtype=complex)
    for k in range(K + 1):
        per[:, k] = (centred[:, k:] * np.conj(centred[:, :n - k])).mean(axis=1)
    coef = per.mean(axis=0)
    coef[0] = coef[0].real
    se_r = per.real.std(axis=0, ddof=1) / math.sqrt(M)
    se_i = per.imag.std(axis=0, ddof=1) / math.sqrt(M)
    prov = Provenance.EMPIRICAL if lam is None else Provenance.TRANSFORMED
    return SpectralEstimate(coef, se_r, se_i, prov, per, {"lambda": lam})


def _pair_integrand(lam):
    def g(x):
        return (np.exp(1j * lam * x[:, 1]) - 1.0) * np.conj(np.exp(1j * lam * x[:, 0]) - 1.0)
    return g


def levy_sigma(spec: LevyMeasureSpec, lam: float, K: int, w: WindowSpec, method: str = "auto",
               draws: int = 50_000, rng=None, by_start: bool = False) -> SpectralEstimate:
    """sigma(k) = int (e^{i lam x_k} - 1) conj(e^{i lam x_0} - 1) dQ over A(w), k = 0..K.

    With ``by_start`` the same integral for every pair (s, s + k) inside the
    window is kept in ``info["by_start"]`` (NaN where s + k leaves the window).
    """
    if K >= w.length:
        raise ValueError(f"window of length {w.length} does not cover lag {K}")
    starts = w.length if by_start else 1
    table = np.full((starts, K + 1), np.nan, dtype=complex)
    var_r, var_i = np.zeros(K + 1), np.zeros(K + 1)
    info = {"lambda": lam}
    if lam == 0:
        for s in range(starts):
            table[s, :min(K + 1, w.length - s)] = 0
    else:
        g = _pair_integrand(lam)
        rng = np.random.default_rng(0) if rng is None else rng
        table[:] = 0
        for lf in spec.leaves():
            _leaf_sigma(lf.base, g, K, w, method, draws, rng, table, var_r, var_i)
        for s in range(starts):
            table[s, w.length - s:] = np.nan
    coef = table[0].copy()
    coef[0] = coef[0].real
    if by_start:
        info["by_start"] = table
    return SpectralEstimate(coef, np.sqrt(var_r), np.sqrt(var_i), Provenance.LEVY, None, info)


def _leaf_sigma(base, g, K, w, method, draws, rng, table, var_r, var_i):
    starts = table.shape[0]
    pairs = [(s, k) for s in range(starts) for k in range(min(K + 1, w.length - s))]
    if method in ("auto", "analytic"):
        try:
            for s, k in pairs:
                table[s, k] += complex(base.integrate(g, (s, s + k), w))
            return
        except NotImplementedError:
            if method == "analytic":
                raise
    hm = base.hit_mass(w)
    block = base.sample_block(w, draws, rng)
    for s, k in pairs:
        vals = g(block.columns([s, s + k]))
        table[s, k] += hm * vals.mean()
        if s == 0:
            var_r[k] += (hm * vals.real.std() / math.sqrt(draws)) ** 2
            var_i[k] += (hm * vals.imag.std() / math.sqrt(draws)) ** 2


def predict_exp_covariance(spec: LevyMeasureSpec, lam: float, sigma: SpectralEstimate,
                    w: WindowSpec) -> SpectralEstimate:
    """Predicted Cov(e^{i lam X_{s+k}}, e^{i lam X_s}) = E_{s+k} conj(E_s) (exp(sigma_s(k)) - 1), averaged over s.

    Uses the per-start table when ``sigma`` carries one; otherwise sigma(k)
    is taken to be the same for every start.
    """
    if sigma.info.get("lambda") != lam:
        raise ValueError(f"sigma was computed at lambda={sigma.info.get('lambda')}, not {lam}")
    K, n = sigma.K, w.length
    E = np.array([char_functional(spec, _unit(n, j, lam), w).value for j in range(n)])
    table = sigma.info.get("by_start")
    coef = np.zeros(K + 1, dtype=complex)
    se_r, se_i = np.zeros(K + 1), np.zeros(K + 1)
    for k in range(K + 1):
        weight = E[k:] * np.conj(E[:n - k])
        sig = table[:n - k, k] if table is not None else np.full(n - k, sigma.coefficients[k])
        coef[k] = np.mean(weight * (np.exp(sig) - 1.0))
        scale = abs(np.mean(weight * np.exp(sig)))
        se_r[k] = scale * sigma.std_error(k)
        se_i[k] = scale * sigma.std_error(k)
    coef[0] = coef[0].real
    return SpectralEstimate(coef, se_r, se_i, Provenance.TRANSFORMED, None, {"lambda": lam})


def _unit(n, j, lam):
    a = np.zeros(n)
    a[j] = lam
    return a


def levy_covariance(spec: LevyMeasureSpec, K: int, w: WindowSpec, average_starts: bool = False) -> np.ndarray:
    """int x_0 x_k dQ over A(w) for k = 0..K, or its average over pairs (s, s + k) in the window."""
    out = np.zeros(K + 1)
    for lf in spec.leaves():
        if not lf.base.square_integrable:
            raise ValueError("covariance identity needs a square-integrable Levy measure")
        for k in range(K + 1):
            starts = range(w.length - k) if average_starts else (0,)
            vals = [float(np.real(lf.base.pair_integral(lambda a, b: a * b, s, s + k, w))) for s in starts]
            out[k] += float(np.mean(vals))
    return out


def covariance_isometry_check(spec: LevyMeasureSpec, batch: TrajectoryBatch, K: int,
                              cal: calibration.Calibration = calibration.DEFAULT) -> dict:
    emp = autocov_empirical(batch, None, K)
    exact = levy_covariance(spec, K, batch.window, average_starts=True)
    rows = []
    for k in range(K + 1):
        diff = abs(emp[k].real - exact[k])
        se = emp.std_error(k)
        rows.append({"lag": k, "empirical": emp[k].real, "exact": exact[k], "se": se,
                     "pass": bool(diff <= cal.n_se * se)})
    return {"rows": rows, "pass": all(r["pass"] for r in rows)}


@dataclass(frozen=True)
class AtomReport:
    estimate: float
    std_error: float
    lower: float
    upper: float
    floor: float
    detected: bool

    def as_dict(self):
        return dict(self.__dict__)


def atom_at_zero(est: SpectralEstimate, K: int | None = None, rel_floor: float = 0.0,
                 cal: calibration.Calibration = calibration.DEFAULT) -> AtomReport:
    """Cesaro mean (1/K) sum_{k=1..K} sigma(k) as an estimate of sigma{0}.

    The atom is flagged when the lower end of the interval exceeds
    ``rel_floor * sigma(0)`` (0 by default).
    """
    K = est.K if K is None else K
    if K < 1 or K > est.K:
        raise ValueError("K must lie in 1..estimate.K")
    value = float(np.mean(est.coefficients[1:K + 1].real))
    if est.replicate_values is not None:
        per = est.replicate_values[:, 1:K + 1].real.mean(axis=1)
        se = float(per.std(ddof=1) / math.sqrt(len(per)))
    else:
        se = float(np.mean([est.std_error(k) for k in range(1, K + 1)]))
    half = cal.n_se * se
    floor = rel_floor * float(est.coefficients[0].real)
    return AtomReport(value, se, value - half, value + half, floor, bool(value - half > floor))


def rajchman_diagnostic(est: SpectralEstimate, cal: calibration.Calibration = calibration.DEFAULT) -> dict:
    """Decay over the last quartile of lags and the Wiener continuity statistic."""
    K = est.K
    s0 = abs(est.coefficients[0])
    start = max(1, int(math.ceil(0.75 * K)))
    tail = range(start, K + 1)
    mags = np.array([abs(est[k]) for k in tail])
    limits = np.array([max(cal.rel_decay * s0, cal.n_se * est.std_error(k)) for k in tail])
    worst = int(np.argmax(mags - limits))
    lags = np.arange(1, K + 1)
    power = np.abs(est.coefficients[1:]) ** 2
    noise = np.array([est.std_error(k) ** 2 for k in lags])
    wiener = float(power.mean())
    wiener_rel = float(max(power.mean() - noise.mean(), 0.0) / s0 ** 2) if s0 > 0 else 0.0
    return {
        "tail_lags": [start, K],
        "tail_max": float(mags.max()),
        "tail_limit": float(limits[worst]),
        "decay_pass": bool(np.all(mags <= limits)),
        "wiener": wiener,
        "wiener_relative": wiener_rel,
        "continuity_pass": bool(wiener_rel <= cal.rel_decay),
    }
