"""Dissipative base: Z x (R \\ {0}) with counting x rho, shift on the offset.

A point is (tau, v) and f(T^i (tau, v)) = v * h(i - tau).  The slice
{tau = 0} is a wandering set whose translates cover the space.
"""
from __future__ import annotations

import numpy as np

from ._core import BaseSystem, DeclaredClass, PointBlock, WindowSpec, ZeroHitMassError
from .amplitudes import DiscreteAmplitude, PowerLawAmplitude


class MovingAverageBase(BaseSystem):
    family = "MovingAverage"
    declared_class = DeclaredClass.DISSIPATIVE

    def __init__(self, pulse, amplitude):
        h = np.atleast_1d(np.asarray(pulse, dtype=float))
        if h.ndim != 1 or h.size == 0 or not np.all(np.isfinite(h)):
            raise ValueError("pulse must be a non-empty finite 1-d sequence")
        if not np.any(h != 0):
            raise ValueError("pulse must have at least one nonzero entry")
        if not isinstance(amplitude, (DiscreteAmplitude, PowerLawAmplitude)):
            raise TypeError("amplitude must be a DiscreteAmplitude or PowerLawAmplitude")
        self.pulse = h
        self.amplitude = amplitude

    def params(self) -> dict:
        return {"pulse": [float(x) for x in self.pulse], "amplitude": self.amplitude.params()}

    @property
    def observable(self) -> str:
        return "f(tau, v) = v * h(-tau)"

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.pulse >= 0)) and self.amplitude.nonnegative

    @property
    def square_integrable(self) -> bool:
        return np.isfinite(self.amplitude.second_moment())

    @property
    def wandering_set(self) -> str:
        return "tau == 0"

    def h(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        out = np.zeros(idx.shape)
        ok = (idx >= 0) & (idx < self.pulse.size)
        out[ok] = self.pulse[idx[ok]]
        return out

    def _offsets(self, w: WindowSpec):
        """Offsets whose pulse reaches the window, with H_tau = max |h| over the window."""
        taus = np.arange(-(self.pulse.size - 1), w.length)
        reach = np.abs(self.h(np.arange(w.length)[None, :] - taus[:, None])).max(axis=1)
        keep = reach > 0
        return taus[keep], reach[keep]

    def _offset_masses(self, w: WindowSpec):
        taus, reach = self._offsets(w)
        masses = np.array([self.amplitude.tail_mass(w.threshold / r) for r in reach])
        return taus, reach, masses

    def hit_mass(self, w: WindowSpec) -> float:
        return float(self._offset_masses(w)[2].sum())

    def _draw_points(self, w, count, rng):
        taus, reach, masses = self._offset_masses(w)
        pick = rng.choice(len(taus), size=count, p=masses / masses.sum()) if count else np.zeros(0, int)
        v = np.empty(count)
        for j in np.unique(pick):
            rows = np.flatnonzero(pick == j)
            v[rows] = self.amplitude.sample_tail(w.threshold / reach[j], rows.size, rng)
        return taus[pick], v

    def _sample_block(self, w, count, rng, lo, hi) -> PointBlock:
        tau, v = self._draw_points(w, count, rng)
        values = v[:, None] * self.h(np.arange(lo, hi)[None, :] - tau[:, None])
        return PointBlock(self, values, lo, {"offset": tau, "amplitude": v})

    def orbit_footprint(self, w: WindowSpec) -> int:
        return int(np.count_nonzero(self.pulse))

    def window_sums(self, w: WindowSpec, counts, rng) -> np.ndarray:
        # each point touches only the taps of its pulse, so skip the dense orbit table
        counts = np.asarray(counts)
        total = int(counts.sum())
        if total and self.hit_mass(w) <= 0:
            raise ZeroHitMassError(f"{self.family}: window {w} has zero hit mass")
        tau, v = self._draw_points(w, total, rng)
        owner = np.repeat(np.arange(len(counts)), counts)
        x = np.zeros((len(counts), w.length))
        for j in np.flatnonzero(self.pulse):
            i = tau + j
            ok = (i >= 0) & (i < w.length)
            np.add.at(x, (owner[ok], i[ok]), self.pulse[j] * v[ok])
        return x

    def orbit_value(self, block, row, i) -> float:
        return float(block.state["amplitude"][row] * self.h(i - block.state["offset"][row]))

    def _shift_state(self, state, k):
        return {"offset": state["offset"] - k, "amplitude": state["amplitude"]}

    def correlation_exact(self, w: WindowSpec, k: int) -> float:
        taus, reach = self._offsets(w)
        lookup = dict(zip(taus.tolist(), reach.tolist()))
        total = 0.0
        for tau, r in lookup.items():
            r2 = lookup.get(tau - k)
            if r2:
                total += self.amplitude.tail_mass(w.threshold / min(r, r2))
        return total

    def small_jump_bound(self, w: WindowSpec) -> np.ndarray:
        taus, reach = self._offsets(w)
        out = np.zeros(w.length)
        for tau, r in zip(taus, reach):
            out += self.h(np.arange(w.length) - tau) ** 2 * self.amplitude.small_second_moment(w.threshold / r)
        return out

    def _coord_offsets(self, coords, w):
        coords = np.asarray(coords, dtype=int)
        taus, reach = self._offsets(w)
        hs = self.h(coords[None, :] - taus[:, None])
        keep = np.any(hs != 0, axis=1)
        return taus[keep], reach[keep], hs[keep]

    def marginal_atoms(self, coords, w):
        if not isinstance(self.amplitude, DiscreteAmplitude):
            raise NotImplementedError("power-law amplitudes have no finite atomic push-forward")
        _, reach, hs = self._coord_offsets(coords, w)
        weights, vectors = [], []
        for r, hv in zip(reach, hs):
            wt, vals = self.amplitude.restricted(w.threshold / r)
            weights.append(wt)
            vectors.append(vals[:, None] * hv[None, :])
        if not weights:
            return np.zeros(0), np.zeros((0, len(coords)))
        return np.concatenate(weights), np.concatenate(vectors)

    def integrate(self, g, coords, w):
        if isinstance(self.amplitude, DiscreteAmplitude):
            return super().integrate(g, coords, w)
        _, reach, hs = self._coord_offsets(coords, w)
        total = 0.0
        for r, hv in zip(reach, hs):
            total = total + self.amplitude.restricted_integral(
                lambda v, hv=hv: g(np.asarray(v)[:, None] * hv[None, :]), w.threshold / r)
        return total

    def exp_integral(self, z, coords, w) -> complex:
        # per offset the exponent is linear in the amplitude: <z, v h> = v <z, h>
        z = np.asarray(z, dtype=complex)
        _, reach, hs = self._coord_offsets(coords, w)
        return complex(sum(self.amplitude.restricted_exp(complex(hv @ z), w.threshold / r)
                           for r, hv in zip(reach, hs)))

    def linear_compensator(self, w: WindowSpec) -> np.ndarray:
        """Per window coordinate: integral of f o T^i over A(w)."""
        taus, reach = self._offsets(w)
        out = np.zeros(w.length)
        for tau, r in zip(taus, reach):
            out += self.h(np.arange(w.length) - tau) * self.amplitude.restricted_linear(w.threshold / r)
        return out

    def truncated_compensator(self, w: WindowSpec) -> np.ndarray:
        """Per window coordinate: integral of c(f o T^i) over A(w)."""
        taus, reach = self._offsets(w)
        out = np.zeros(w.length)
        for i in range(w.length):
            for tau, r in zip(taus, reach):
                a = float(self.h(i - tau))
                if a:
                    out[i] += self.amplitude.restricted_c(a, w.threshold / r)
        return out

    def scaled(self, b: float) -> "MovingAverageBase":
        return MovingAverageBase(self.pulse * b, self.amplitude)

    def with_intensity(self, s: float) -> "MovingAverageBase":
        return MovingAverageBase(self.pulse, self.amplitude.scaled_intensity(s))
