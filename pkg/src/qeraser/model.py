"""State model of the generalized quantum-eraser interferometer.

The full state lives on three registers, in tensor order:

* ``gamma`` (2): path of the screen photon; index 0 is the site-1 path
  ``|10>``, index 1 the site-2 path ``|01>``.
* ``phi`` (4): one-hot mode of the tag photon. Before the beam splitters
  the site-1 photon enters B1 on mode ``a`` and the site-2 photon enters B2
  on mode ``d``. After B3 the four slots hold, in order, the ports of
  D3, D2, D1 and D4.
* ``pol`` (2): orthonormal basis ``e0, e1`` in which the two polarizer
  states are embedded as ``S1 = e0`` and ``S2 = q e0 + sqrt(1-|q|^2) e1``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UndefinedConditionalError
from .linalg import STRUCT_TOL, basis, partial_trace, projector, tensor, unit_scale

GAMMA_DIM, PHI_DIM, POL_DIM = 2, 4, 2
DIMS = (GAMMA_DIM, PHI_DIM, POL_DIM)
TOTAL_DIM = GAMMA_DIM * PHI_DIM * POL_DIM

SITE1, SITE2 = 0, 1
MODE_A, MODE_B, MODE_C, MODE_D = 0, 1, 2, 3
# tag photon input modes before B1/B2
UPPER, LOWER = MODE_A, MODE_D
# dual-rail slots of the tag photon used by the 4x4 gamma-phi density matrix
DUAL_RAIL_MODES = (UPPER, LOWER)


class Detector(str, enum.Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"

    @property
    def port(self) -> int:
        """phi slot read by this detector after B3."""
        return _PORTS[self]


_PORTS = {Detector.D3: MODE_A, Detector.D2: MODE_B, Detector.D1: MODE_C, Detector.D4: MODE_D}


@dataclass(frozen=True)
class ApparatusConfig:
    """Free parameters of the apparatus.

    ``c1, c2`` are the source amplitudes, ``(r_i, t_i)`` the reflection and
    transmission amplitudes of beam splitter ``B_i`` and ``q`` the overlap
    ``<S1|S2>`` of the two polarizer states. All are complex.
    """

    c1: complex
    c2: complex
    r1: complex
    t1: complex
    r2: complex
    t2: complex
    r3: complex
    t3: complex
    q: complex = 1.0

    def __post_init__(self):
        for name in ("c1", "c2", "r1", "t1", "r2", "t2", "r3", "t3", "q"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ConfigError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if abs(abs(self.c1) ** 2 + abs(self.c2) ** 2 - 1.0) > STRUCT_TOL:
            raise ConfigError("|c1|^2 + |c2|^2 must equal 1")
        for i in (1, 2, 3):
            r, t = getattr(self, f"r{i}"), getattr(self, f"t{i}")
            if abs(abs(r) ** 2 + abs(t) ** 2 - 1.0) > STRUCT_TOL:
                raise ConfigError(f"|r{i}|^2 + |t{i}|^2 must equal 1")
        if abs(self.q) > 1.0 + STRUCT_TOL:
            raise ConfigError("|q| must not exceed 1")

    @classmethod
    def from_moduli(
        cls,
        c1_sq: float,
        r1_sq: float,
        r2_sq: float,
        r3_sq: float,
        q_abs: float,
        *,
        c1_phase: float = 0.0,
        c2_phase: float = 0.0,
        r_phases: tuple[float, float, float] = (0.0, 0.0, 0.0),
        t_phases: tuple[float, float, float] = (0.0, 0.0, 0.0),
        q_phase: float = 0.0,
    ) -> "ApparatusConfig":
        """Build a config from squared moduli (``|q|`` for the overlap) and phases."""
        for name, v in (("c1_sq", c1_sq), ("r1_sq", r1_sq), ("r2_sq", r2_sq), ("r3_sq", r3_sq), ("q_abs", q_abs)):
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")

        def amp(mod_sq, phase):
            return math.sqrt(mod_sq) * cmath.exp(1j * phase)

        rs = [amp(s, p) for s, p in zip((r1_sq, r2_sq, r3_sq), r_phases)]
        ts = [amp(1.0 - s, p) for s, p in zip((r1_sq, r2_sq, r3_sq), t_phases)]
        return cls(
            c1=amp(c1_sq, c1_phase),
            c2=amp(1.0 - c1_sq, c2_phase),
            r1=rs[0], t1=ts[0],
            r2=rs[1], t2=ts[1],
            r3=rs[2], t3=ts[2],
            q=q_abs * cmath.exp(1j * q_phase),
        )

    def replace(self, **changes) -> "ApparatusConfig":
        fields = {k: getattr(self, k) for k in ("c1", "c2", "r1", "t1", "r2", "t2", "r3", "t3", "q")}
        fields.update(changes)
        return ApparatusConfig(**fields)


@dataclass(frozen=True)
class DetectionOutcome:
    """Result of post-selecting on one detector click.

    ``conditional_state`` is the normalized gamma x pol vector left behind by
    the click, ``conditional_rho_gamma`` its reduced path state. Both are
    ``None`` when the click has zero probability.
    """

    detector: Detector
    probability: float
    conditional_state: np.ndarray | None
    conditional_rho_gamma: np.ndarray | None

    @property
    def defined(self) -> bool:
        return self.conditional_state is not None

    def require(self) -> "DetectionOutcome":
        if not self.defined:
            raise UndefinedConditionalError(f"detector {self.detector.value} never clicks for this configuration")
        return self


def polarization_states(q: complex) -> tuple[np.ndarray, np.ndarray]:
    """Embed ``|S1>, |S2>`` with ``<S1|S2> = q`` in the orthonormal pol basis."""
    q = complex(q)
    s1 = np.array([1.0, 0.0], dtype=complex)
    s2 = np.array([q, math.sqrt(max(0.0, 1.0 - abs(q) ** 2))], dtype=complex)
    return s1, s2


def source_state(cfg: ApparatusConfig) -> np.ndarray:
    """Source pair after the polarizers, on gamma x phi x pol."""
    s1, s2 = polarization_states(cfg.q)
    state = np.zeros(DIMS, dtype=complex)
    state[SITE1, UPPER, :] = cfg.c1 * s1
    state[SITE2, LOWER, :] = cfg.c2 * s2
    return state.reshape(-1)


def b1_b2_operator(cfg: ApparatusConfig) -> np.ndarray:
    """phi-register action of B1 (on a, b) and B2 (on d, c).

    Only the first column of each 2x2 block is populated by the source;
    the second completes the block to a unitary.
    """
    m = np.zeros((PHI_DIM, PHI_DIM), dtype=complex)
    m[MODE_A, MODE_A], m[MODE_B, MODE_A] = cfg.t1, cfg.r1
    m[MODE_A, MODE_B], m[MODE_B, MODE_B] = -np.conj(cfg.r1), np.conj(cfg.t1)
    m[MODE_D, MODE_D], m[MODE_C, MODE_D] = cfg.t2, cfg.r2
    m[MODE_D, MODE_C], m[MODE_C, MODE_C] = -np.conj(cfg.r2), np.conj(cfg.t2)
    return m


def b3_operator(cfg: ApparatusConfig) -> np.ndarray:
    """phi-register action of B3: b -> r3 D1 + t3 D2, c -> t3 D1 - r3 D2.

    The block is unitary whenever ``conj(r3) * t3`` is real. For other
    phases it still preserves the norm of every state whose b and c
    branches carry orthogonal gamma x pol partners, which the source
    guarantees (the branches come from different sites).
    """
    m = np.eye(PHI_DIM, dtype=complex)
    d1, d2 = Detector.D1.port, Detector.D2.port
    m[:, MODE_B] = 0.0
    m[:, MODE_C] = 0.0
    m[d1, MODE_B], m[d2, MODE_B] = cfg.r3, cfg.t3
    m[d1, MODE_C], m[d2, MODE_C] = cfg.t3, -cfg.r3
    return m


def _on_phi(op: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Apply a phi-register operator, leaving gamma and pol untouched."""
    t = np.asarray(state, dtype=complex).reshape(DIMS)
    return np.einsum("ij,gjp->gip", op, t).reshape(-1)


def apply_b1_b2(state: np.ndarray, cfg: ApparatusConfig) -> np.ndarray:
    return _on_phi(b1_b2_operator(cfg), state)


def apply_b3(state: np.ndarray, cfg: ApparatusConfig) -> np.ndarray:
    return _on_phi(b3_operator(cfg), state)


def evolve(cfg: ApparatusConfig) -> np.ndarray:
    """Full state just before the detectors."""
    return apply_b3(apply_b1_b2(source_state(cfg), cfg), cfg)


def detect(state: np.ndarray, detector: Detector | str) -> DetectionOutcome:
    """Post-select the evolved state on a click at ``detector``."""
    detector = Detector(detector)
    amp = np.asarray(state, dtype=complex).reshape(DIMS)[:, detector.port, :].reshape(-1)
    # rescale first so tiny amplitudes do not underflow when squared
    unit, e = unit_scale(amp)
    norm_sq = np.vdot(unit, unit).real
    if norm_sq == 0.0:
        return DetectionOutcome(detector, 0.0, None, None)
    psi = unit / math.sqrt(norm_sq)
    rho_gamma = partial_trace(projector(psi), (GAMMA_DIM, POL_DIM), keep=0)
    return DetectionOutcome(detector, math.ldexp(norm_sq, 2 * e), psi, rho_gamma)


def detect_all(cfg: ApparatusConfig) -> dict[Detector, DetectionOutcome]:
    state = evolve(cfg)
    return {d: detect(state, d) for d in Detector}


def reduced_gamma_phi(cfg: ApparatusConfig) -> np.ndarray:
    """gamma x phi density matrix of the source with polarization traced out.

    Returned in the 4x4 dual-rail basis ``(site, tag mode)`` with tag modes
    ordered (upper, lower).
    """
    rho = partial_trace(projector(source_state(cfg)), DIMS, keep=(0, 1))
    return dual_rail_restrict(rho)


def dual_rail_restrict(rho_gamma_phi: np.ndarray) -> np.ndarray:
    """Restrict an 8x8 gamma x phi(one-hot) matrix to the two input modes."""
    idx = [g * PHI_DIM + m for g in range(GAMMA_DIM) for m in DUAL_RAIL_MODES]
    return np.asarray(rho_gamma_phi)[np.ix_(idx, idx)]


def dual_rail_embed(rho4: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dual_rail_restrict` (zero outside the input modes)."""
    idx = [g * PHI_DIM + m for g in range(GAMMA_DIM) for m in DUAL_RAIL_MODES]
    out = np.zeros((GAMMA_DIM * PHI_DIM,) * 2, dtype=complex)
    out[np.ix_(idx, idx)] = rho4
    return out


def evolve_gamma_phi(rho8: np.ndarray, cfg: ApparatusConfig) -> np.ndarray:
    """Apply B1/B2 then B3 to a gamma x phi density matrix."""
    u = tensor(np.eye(GAMMA_DIM), b3_operator(cfg) @ b1_b2_operator(cfg))
    return u @ rho8 @ u.conj().T


def branch_amplitudes(cfg: ApparatusConfig, detector: Detector | str) -> tuple[complex, complex]:
    """Unnormalized (site-1, site-2) amplitudes reaching ``detector``.

    Read directly off the closed-form evolved state: the site-1 term carries
    ``|S1>`` and the site-2 term ``|S2>``.
    """
    d = Detector(detector)
    if d is Detector.D1:
        return cfg.c1 * cfg.r1 * cfg.r3, cfg.c2 * cfg.r2 * cfg.t3
    if d is Detector.D2:
        return cfg.c1 * cfg.r1 * cfg.t3, -cfg.c2 * cfg.r2 * cfg.r3
    if d is Detector.D3:
        return cfg.c1 * cfg.t1, 0j
    return 0j, cfg.c2 * cfg.t2


def click_probabilities(cfg: ApparatusConfig) -> dict[Detector, float]:
    """Closed-form click probability of every detector."""
    return {
        Detector.D1: abs(cfg.c1 * cfg.r1 * cfg.r3) ** 2 + abs(cfg.c2 * cfg.r2 * cfg.t3) ** 2,
        Detector.D2: abs(cfg.c1 * cfg.r1 * cfg.t3) ** 2 + abs(cfg.c2 * cfg.r2 * cfg.r3) ** 2,
        Detector.D3: abs(cfg.c1 * cfg.t1) ** 2,
        Detector.D4: abs(cfg.c2 * cfg.t2) ** 2,
    }


def normalized_branches(cfg: ApparatusConfig, detector: Detector | str) -> tuple[complex, complex]:
    """Branch amplitudes of ``detector`` scaled to unit total weight.

    Raises :class:`UndefinedConditionalError` if both vanish.
    """
    (a, b), _ = unit_scale(branch_amplitudes(cfg, detector))
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm == 0.0:
        raise UndefinedConditionalError(f"detector {Detector(detector).value} never clicks for this configuration")
    return complex(a / norm), complex(b / norm)


def closed_form_conditional(cfg: ApparatusConfig, detector: Detector | str) -> np.ndarray:
    """Normalized post-click gamma x pol state written from the branch amplitudes."""
    a, b = normalized_branches(cfg, detector)
    s1, s2 = polarization_states(cfg.q)
    return a * tensor(basis(2, SITE1), s1) + b * tensor(basis(2, SITE2), s2)


def closed_form_rho_gamma(cfg: ApparatusConfig, detector: Detector | str) -> np.ndarray:
    """Post-click path density matrix with entries written out explicitly."""
    a, b = normalized_branches(cfg, detector)
    coherence = a * np.conj(b) * np.conj(cfg.q)
    return np.array([[abs(a) ** 2, coherence], [np.conj(coherence), abs(b) ** 2]], dtype=complex)


def random_config(rng: np.random.Generator, edge_fraction: float = 0.0) -> ApparatusConfig:
    """Draw a valid configuration with uniform moduli and phases.

    With probability ``edge_fraction`` each modulus is snapped to 0 or 1 so
    mirrors, removed splitters and single-site sources get exercised.
    """

    def modulus():
        if edge_fraction and rng.random() < edge_fraction:
            return float(rng.integers(0, 2))
        return float(rng.random())

    def phase():
        return float(rng.uniform(0.0, 2.0 * math.pi))

    return ApparatusConfig.from_moduli(
        modulus(), modulus(), modulus(), modulus(), modulus(),
        c1_phase=phase(), c2_phase=phase(),
        r_phases=(phase(), phase(), phase()),
        t_phases=(phase(), phase(), phase()),
        q_phase=phase(),
    )
