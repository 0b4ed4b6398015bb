"""Wave, particle and entanglement measures of a post-selected path qubit.

Every quantity is available along two independent routes:

* ``evolved``: read off the state produced by :mod:`qeraser.model`
  (reduced density matrix, pure-state concurrence, trace distance of the
  polarization partners);
* ``closed_form``: evaluated from the apparatus parameters alone.

Reports carry identity residuals instead of pass/fail flags so callers pick
their own tolerance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ContractViolation, DimensionError
from .linalg import (
    DERIVED_TOL,
    check_density,
    herm_eigvals,
    partial_trace,
    prod_spectrum_sqrt,
    projector,
    spin_flip,
)
from .model import (
    ApparatusConfig,
    DetectionOutcome,
    Detector,
    click_probabilities,
    closed_form_rho_gamma,
    detect,
    evolve,
    normalized_branches,
)

EVOLVED = "evolved"
CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class TrialityReport:
    P: float
    V: float
    C: float
    D: float
    purity: float
    residual_triality: float
    residual_duality_purity: float
    residual_distinguishability: float
    route: str
    detector: Detector | None = None
    probability: float | None = None

    @classmethod
    def build(cls, P, V, C, D, purity, route, detector=None, probability=None) -> "TrialityReport":
        return cls(
            P=float(P),
            V=float(V),
            C=float(C),
            D=float(D),
            purity=float(purity),
            residual_triality=P * P + V * V + C * C - 1.0,
            residual_duality_purity=P * P + V * V - (2.0 * purity - 1.0),
            residual_distinguishability=D * D - (P * P + C * C),
            route=route,
            detector=detector,
            probability=probability,
        )

    @property
    def max_abs_residual(self) -> float:
        return max(
            abs(self.residual_triality),
            abs(self.residual_duality_purity),
            abs(self.residual_distinguishability),
        )

    def as_dict(self) -> dict:
        out = asdict(self)
        out["detector"] = self.detector.value if self.detector is not None else None
        return out


def _qubit_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError("expected a 2x2 path density matrix")
    return check_density(rho, "rho_gamma")


def predictability(rho_gamma) -> float:
    """Which-path predictability ``|p0 - p1| / (p0 + p1)`` of a path qubit."""
    rho = _qubit_density(rho_gamma)
    p0, p1 = rho[0, 0].real, rho[1, 1].real
    return abs(p0 - p1) / (p0 + p1)


def visibility(rho_gamma) -> float:
    """Fringe visibility ``2 |rho_01|``."""
    rho = _qubit_density(rho_gamma)
    return 2.0 * abs(rho[0, 1])


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.einsum("ij,ji->", rho, rho).real)


def concurrence_pure(psi) -> float:
    """Concurrence ``2 |ad - bc|`` of a normalized two-qubit pure state.

    Equal to ``sqrt(2 (1 - Tr rho_A^2))`` but free of the cancellation that
    formula suffers near product states.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise DimensionError("concurrence_pure expects a 4-component state")
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-12:
        raise ContractViolation("concurrence_pure expects a normalized state")
    a, b, c, d = psi
    return min(1.0, 2.0 * abs(a * d - b * c))


def concurrence_mixed(rho) -> float:
    """Wootters concurrence ``max(0, l0 - l1 - l2 - l3)`` of a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError("concurrence_mixed expects a 4x4 density matrix")
    rho = check_density(rho)
    lam = prod_spectrum_sqrt(rho, spin_flip(rho))
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def distinguishability(P: float, C: float) -> float:
    """``sqrt(P^2 + C^2)``."""
    total = P * P + C * C
    if P < -DERIVED_TOL or C < -DERIVED_TOL or total > 1.0 + DERIVED_TOL:
        raise ContractViolation(f"P={P!r}, C={C!r} violate P^2 + C^2 <= 1")
    return math.sqrt(min(1.0, total))


def distinguishability_from_branches(p_site1: float, p_site2: float, q_abs: float) -> float:
    """``sqrt(1 - 4 p1 p2 |q|^2)`` from the two branch weights of a click."""
    return math.sqrt(max(0.0, 1.0 - 4.0 * p_site1 * p_site2 * q_abs * q_abs))


def _distinguishability_stable(p_site1: float, p_site2: float, q_abs: float) -> float:
    # same value as distinguishability_from_branches when p1 + p2 = 1, without
    # the cancellation that costs ~1e-8 absolute accuracy as D -> 0
    return math.sqrt((p_site1 - p_site2) ** 2 + 4.0 * p_site1 * p_site2 * (1.0 - q_abs * q_abs))


def which_path_distinguishability(psi) -> float:
    """Trace distance between the weighted polarization partners of the two paths.

    For ``psi = a |0>|u> + b |1>|v>`` this is ``|| |a u><a u| - |b v><b v| ||_1``,
    the best success bias for guessing the path from the tag photon.
    """
    psi = np.asarray(psi, dtype=complex).reshape(2, -1)
    delta = projector(psi[0]) - projector(psi[1])
    return float(np.abs(herm_eigvals(delta)).sum())


def closed_form_triality(cfg: ApparatusConfig, detector: Detector | str) -> TrialityReport:
    """Metrics evaluated from the apparatus parameters only."""
    detector = Detector(detector)
    a, b = normalized_branches(cfg, detector)
    wa, wb = abs(a) ** 2, abs(b) ** 2
    q_abs = abs(cfg.q)
    cross = 2.0 * abs(a) * abs(b)
    P = abs(wa - wb)
    V = cross * q_abs
    C = cross * math.sqrt(max(0.0, 1.0 - q_abs * q_abs))
    D = _distinguishability_stable(wa, wb, q_abs)
    pur = purity(closed_form_rho_gamma(cfg, detector))
    return TrialityReport.build(P, V, C, D, pur, CLOSED_FORM, detector, click_probabilities(cfg)[detector])


def evolved_triality(
    cfg: ApparatusConfig, detector: Detector | str, outcome: DetectionOutcome | None = None
) -> TrialityReport:
    """Metrics read off the post-selected state of the simulated apparatus.

    Pass ``outcome`` to reuse a detection already computed for ``cfg``.
    """
    if outcome is None:
        outcome = detect(evolve(cfg), detector)
    outcome = outcome.require()
    rho = outcome.conditional_rho_gamma
    psi = outcome.conditional_state
    return TrialityReport.build(
        predictability(rho),
        visibility(rho),
        concurrence_pure(psi),
        which_path_distinguishability(psi),
        purity(rho),
        EVOLVED,
        outcome.detector,
        outcome.probability,
    )


def report_for_state(psi, route: str = EVOLVED) -> TrialityReport:
    """Metrics of an arbitrary normalized path x partner pure state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    rho = partial_trace(projector(psi), (2, 2), keep=0)
    return TrialityReport.build(
        predictability(rho),
        visibility(rho),
        concurrence_pure(psi),
        which_path_distinguishability(psi),
        purity(rho),
        route,
    )
