"""Fringe patterns of the screen photon and their Monte Carlo sampling.

Screen positions are parameterized by the accumulated relative phase
``phase`` in ``[0, 2 pi)`` between the two paths. A path state ``rho`` lands
at ``phase`` with density ``<chi|rho|chi> / pi`` where
``chi = (|0> + e^{i phase} |1>) / sqrt(2)``, i.e.
``(1 + V cos(phase + arg rho_01)) / (2 pi)``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO

import numpy as np
from scipy.optimize import minimize_scalar

from .linalg import check_density

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 256
DEFAULT_BINS = 32
MIN_ESTIMATE_SAMPLES = 100
# draws per independently seeded stream; fixed so results do not depend on worker count
CHUNK = 1 << 16


def screen_density(rho_gamma, phase) -> np.ndarray:
    """Detection density of ``rho_gamma`` at ``phase`` (array or scalar)."""
    rho = np.asarray(rho_gamma, dtype=complex)
    phase = np.asarray(phase, dtype=float)
    w = np.exp(1j * phase)
    # <chi|rho|chi> with chi = (1, w)/sqrt(2)
    val = rho[0, 0] + rho[1, 1] + rho[0, 1] * w + rho[1, 0] * np.conj(w)
    return val.real / TWO_PI


@dataclass(frozen=True)
class FringeProfile:
    rho_gamma: np.ndarray
    phase_grid: np.ndarray
    intensity: np.ndarray
    analytic_V: float
    analytic_offset: float

    def density(self, phase) -> np.ndarray:
        return screen_density(self.rho_gamma, phase)

    def extremes(self) -> tuple[float, float]:
        """Maximum and minimum of the density, located by grid scan plus Brent refinement."""
        step = TWO_PI / len(self.phase_grid)
        i_max, i_min = int(np.argmax(self.intensity)), int(np.argmin(self.intensity))
        hi = max(float(self.intensity[i_max]), self._refine(self.phase_grid[i_max], step, -1.0))
        lo = min(float(self.intensity[i_min]), self._refine(self.phase_grid[i_min], step, 1.0))
        return hi, lo

    def _refine(self, centre: float, step: float, sign: float) -> float:
        res = minimize_scalar(
            lambda x: sign * float(self.density(x)),
            bounds=(centre - step, centre + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(self.density(res.x))

    def operational_visibility(self) -> float:
        """``(I_max - I_min) / (I_max + I_min)`` of the profile."""
        hi, lo = self.extremes()
        return (hi - lo) / (hi + lo)

    def integral(self) -> float:
        """Rectangle-rule integral over the periodic grid."""
        return float(self.intensity.sum() * (TWO_PI / len(self.phase_grid)))

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phase", "intensity"])
        for x, y in zip(self.phase_grid, self.intensity):
            writer.writerow([repr(float(x)), repr(float(y))])


def fringe_profile(rho_gamma, points: int = DEFAULT_GRID) -> FringeProfile:
    """Screen profile of a path density matrix on a uniform periodic grid."""
    rho = check_density(np.asarray(rho_gamma, dtype=complex), "rho_gamma")
    if rho.shape != (2, 2):
        raise ValueError("fringe_profile expects a 2x2 density matrix")
    if points < 2:
        raise ValueError("profile grid needs at least 2 points")
    grid = np.arange(points) * (TWO_PI / points)
    rho.setflags(write=False)
    return FringeProfile(
        rho_gamma=rho,
        phase_grid=grid,
        intensity=screen_density(rho, grid),
        analytic_V=2.0 * abs(rho[0, 1]),
        analytic_offset=float(np.angle(rho[0, 1])),
    )


def phase_to_position(phase, fringe_period: float):
    """Map phase to a screen coordinate for plotting, given the fringe period."""
    return np.asarray(phase) * fringe_period / TWO_PI


@dataclass(frozen=True)
class SampleSet:
    n: int
    positions: np.ndarray
    bin_edges: np.ndarray
    histogram: np.ndarray
    estimated_V: float | None = None
    estimated_V_stderr: float | None = None
    estimated_offset: float | None = None
    seed: int = field(default=0)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def write_csv(self, fh: IO[str]) -> None:
        widths = np.diff(self.bin_edges)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_center_phase", "count", "density"])
        for c, k, w in zip(self.bin_centers, self.histogram, widths):
            writer.writerow([repr(float(c)), str(int(k)), repr(float(k / (self.n * w)))])


def _draw_chunk(args) -> np.ndarray:
    rho, bound, size, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = max(64, int(need * 1.2) + 16)
        phi = rng.uniform(0.0, TWO_PI, batch)
        u = rng.uniform(0.0, bound, batch)
        accepted = phi[u < screen_density(rho, phi)][:need]
        out[filled:filled + accepted.size] = accepted
        filled += accepted.size
    return out


def sample(profile: FringeProfile, n: int, seed: int, bins: int = DEFAULT_BINS, workers: int = 1) -> SampleSet:
    """Draw ``n`` screen phases from ``profile`` by rejection sampling.

    Draws are split into fixed-size chunks, each with its own stream spawned
    from ``seed``, so the output is identical for any ``workers`` count.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if bins < 1:
        raise ValueError("bins must be at least 1")
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    bound = (1.0 + profile.analytic_V) / TWO_PI * (1.0 + 1e-12)
    jobs = [(profile.rho_gamma, bound, s, ss) for s, ss in zip(sizes, streams)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_draw_chunk, jobs))
    else:
        parts = [_draw_chunk(j) for j in jobs]
    positions = np.concatenate(parts)
    edges = np.linspace(0.0, TWO_PI, bins + 1)
    counts, _ = np.histogram(positions, bins=edges)
    v_hat = stderr = offset = None
    if n >= MIN_ESTIMATE_SAMPLES:
        v_hat, stderr = _first_harmonic(positions)
        offset = estimate_phase_offset(positions)
    return SampleSet(n, positions, edges, counts, v_hat, stderr, offset, seed)


def _first_harmonic(positions: np.ndarray) -> tuple[float, float]:
    m = np.exp(1j * positions).mean()
    return 2.0 * abs(m), math.sqrt(2.0 / positions.size)


def estimate_visibility(samples: SampleSet | np.ndarray) -> tuple[float, float]:
    """First-harmonic visibility estimate ``2 |<e^{i phase}>|`` and its standard error."""
    positions = samples.positions if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if positions.size < MIN_ESTIMATE_SAMPLES:
        raise ValueError(f"need at least {MIN_ESTIMATE_SAMPLES} samples, got {positions.size}")
    return _first_harmonic(positions)


def estimate_phase_offset(samples: SampleSet | np.ndarray) -> float:
    """Fitted fringe offset ``delta`` of ``1 + V cos(phase + delta)``, in ``(-pi, pi]``."""
    positions = samples.positions if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    return float(-np.angle(np.exp(1j * positions).mean()))


def phase_difference(a: float, b: float) -> float:
    """Absolute difference of two angles folded into ``[0, pi]``."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)
