"""High-level runs behind the command line: metrics, sweeps, screens, checks."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import ContractViolation, UndefinedConditionalError
from .linalg import DERIVED_TOL, partial_trace, projector
from .metrics import TrialityReport, closed_form_triality, evolved_triality
from .model import ApparatusConfig, DetectionOutcome, Detector, click_probabilities, detect_all, evolve, random_config
from .scenario import ScenarioFile
from .screen import FringeProfile, SampleSet, fringe_profile, phase_difference, sample

SWEEP_HEADER = ("swept_value", "P", "V", "C", "D", "p_detector")


@dataclass(frozen=True)
class MetricsResult:
    evolved: TrialityReport
    closed_form: TrialityReport

    @property
    def discrepancy(self) -> float:
        """Largest difference between the two routes over P, V, C, D and probability."""
        a, b = self.evolved, self.closed_form
        return max(
            abs(a.P - b.P), abs(a.V - b.V), abs(a.C - b.C), abs(a.D - b.D), abs(a.probability - b.probability)
        )


def metrics_for_config(
    cfg: ApparatusConfig, detector: Detector | str, outcome: DetectionOutcome | None = None
) -> MetricsResult:
    return MetricsResult(evolved_triality(cfg, detector, outcome), closed_form_triality(cfg, detector))


def run_metrics(scenario: ScenarioFile, detector: Detector | str) -> MetricsResult:
    """Both metric routes for one scenario and detector.

    Raises :class:`UndefinedConditionalError` if the detector cannot click.
    """
    return metrics_for_config(scenario.to_config(), detector)


def identity_violations(result: MetricsResult, q_abs: float, tol: float = DERIVED_TOL) -> list[str]:
    """Names of the identities that ``result`` breaks at tolerance ``tol``."""
    bad = []
    for rep in (result.evolved, result.closed_form):
        if abs(rep.residual_triality) > tol:
            bad.append(f"{rep.route}: P^2+V^2+C^2-1 = {rep.residual_triality:.3e}")
        if abs(rep.residual_duality_purity) > tol:
            bad.append(f"{rep.route}: P^2+V^2-(2 purity-1) = {rep.residual_duality_purity:.3e}")
        if abs(rep.residual_distinguishability) > tol:
            bad.append(f"{rep.route}: D^2-(P^2+C^2) = {rep.residual_distinguishability:.3e}")
        if rep.V > q_abs + tol:
            bad.append(f"{rep.route}: V = {rep.V!r} exceeds |q| = {q_abs!r}")
    if result.discrepancy > tol:
        bad.append(f"route discrepancy {result.discrepancy:.3e}")
    return bad


@dataclass(frozen=True)
class SweepRow:
    swept_value: float
    P: float
    V: float
    C: float
    D: float
    p_detector: float

    @property
    def defined(self) -> bool:
        return not math.isnan(self.P)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.swept_value, self.P, self.V, self.C, self.D, self.p_detector)


def _sweep_point(args) -> SweepRow:
    scenario, detector, value = args
    cfg = scenario.with_swept(value).to_config()
    try:
        result = metrics_for_config(cfg, detector)
    except UndefinedConditionalError:
        nan = float("nan")
        return SweepRow(value, nan, nan, nan, nan, 0.0)
    bad = identity_violations(result, abs(cfg.q))
    if bad:
        raise ContractViolation(f"sweep point {scenario.sweep.parameter}={value!r}: " + "; ".join(bad))
    r = result.evolved
    return SweepRow(value, r.P, r.V, r.C, r.D, r.probability)


def run_sweep(scenario: ScenarioFile, detector: Detector | str, workers: int = 1) -> list[SweepRow]:
    """Evaluate the detector's metrics on every point of the scenario's sweep grid.

    Rows come back in grid order. A point where the detector cannot click is
    kept, with ``nan`` metrics and ``p_detector = 0``.
    """
    detector = Detector(detector)
    jobs = [(scenario, detector, v) for v in scenario.sweep.grid()]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def _num(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(rows: Iterable[SweepRow], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([_num(x) for x in row.as_tuple()])


def unconditioned_rho_gamma(cfg: ApparatusConfig) -> np.ndarray:
    """Path state averaged over all detector outcomes."""
    return partial_trace(projector(evolve(cfg)), (2, 4, 2), keep=0)


@dataclass(frozen=True)
class ScreenResult:
    detector: Detector | None
    probability: float
    profile: FringeProfile
    samples: SampleSet

    @property
    def analytic_V(self) -> float:
        return self.profile.analytic_V

    @property
    def agrees(self) -> bool:
        """Estimated visibility within three standard errors of the analytic value."""
        return abs(self.samples.estimated_V - self.analytic_V) <= 3.0 * self.samples.estimated_V_stderr

    def summary(self) -> str:
        s = self.samples
        label = self.detector.value if self.detector else "unconditioned"
        verdict = "agree" if self.agrees else "DISAGREE"
        return (
            f"branch {label}: p = {self.probability:.6g}, n = {s.n}, seed = {s.seed}\n"
            f"analytic V = {self.analytic_V:.6f}, offset = {self.profile.analytic_offset:.6f} rad\n"
            f"estimated V = {s.estimated_V:.6f} +/- {s.estimated_V_stderr:.6f}, "
            f"offset = {s.estimated_offset:.6f} rad\n"
            f"verdict at 3 sigma: {verdict}"
        )


def run_screen(
    scenario: ScenarioFile,
    detector: Detector | str | None,
    *,
    samples: int | None = None,
    seed: int | None = None,
    bins: int | None = None,
    workers: int = 1,
) -> ScreenResult:
    """Simulate the screen pattern for one detector branch, or for all outcomes if ``detector`` is None."""
    cfg = scenario.to_config()
    if detector is None:
        rho, p = unconditioned_rho_gamma(cfg), 1.0
    else:
        outcome = detect_all(cfg)[Detector(detector)].require()
        rho, p = outcome.conditional_rho_gamma, outcome.probability
    profile = fringe_profile(rho)
    sc = scenario.screen
    draws = sample(
        profile,
        samples if samples is not None else sc.samples,
        seed if seed is not None else sc.seed,
        bins=bins if bins is not None else sc.bins,
        workers=workers,
    )
    return ScreenResult(Detector(detector) if detector else None, p, profile, draws)


def fringe_offset_gap(a: ScreenResult, b: ScreenResult) -> float:
    return phase_difference(a.samples.estimated_offset, b.samples.estimated_offset)


@dataclass
class CheckSummary:
    n_configs: int
    n_branches: int = 0
    max_triality: float = 0.0
    max_duality_purity: float = 0.0
    max_distinguishability: float = 0.0
    max_route_gap: float = 0.0
    max_probability_closure: float = 0.0
    max_probability_gap: float = 0.0
    max_visibility_excess: float = -math.inf

    def worst(self) -> dict[str, float]:
        return {
            "triality": self.max_triality,
            "duality_purity": self.max_duality_purity,
            "distinguishability": self.max_distinguishability,
            "route_agreement": self.max_route_gap,
            "probability_closure": self.max_probability_closure,
            "probability_closed_form": self.max_probability_gap,
            "visibility_bound": max(0.0, self.max_visibility_excess),
        }

    def failures(self, tol: float) -> list[str]:
        return [k for k, v in self.worst().items() if v > tol]


def run_check(n: int, seed: int, tol: float = DERIVED_TOL, min_probability: float = 1e-6) -> CheckSummary:
    """Evaluate every identity on ``n`` seeded random configurations (D1 and D2 branches)."""
    rng = np.random.default_rng(seed)
    summary = CheckSummary(n)
    for _ in range(n):
        cfg = random_config(rng)
        outcomes = detect_all(cfg)
        closed = click_probabilities(cfg)
        total = sum(o.probability for o in outcomes.values())
        summary.max_probability_closure = max(summary.max_probability_closure, abs(total - 1.0))
        for d, o in outcomes.items():
            summary.max_probability_gap = max(summary.max_probability_gap, abs(o.probability - closed[d]))
        for d in (Detector.D1, Detector.D2):
            if outcomes[d].probability <= min_probability:
                continue
            res = metrics_for_config(cfg, d, outcomes[d])
            summary.n_branches += 1
            for rep in (res.evolved, res.closed_form):
                summary.max_triality = max(summary.max_triality, abs(rep.residual_triality))
                summary.max_duality_purity = max(summary.max_duality_purity, abs(rep.residual_duality_purity))
                summary.max_distinguishability = max(
                    summary.max_distinguishability, abs(rep.residual_distinguishability)
                )
                summary.max_visibility_excess = max(summary.max_visibility_excess, rep.V - abs(cfg.q))
            summary.max_route_gap = max(summary.max_route_gap, res.discrepancy)
    return summary
