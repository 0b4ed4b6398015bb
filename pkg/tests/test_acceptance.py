"""Acceptance criteria, one marker per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary ends
with one PASS/FAIL line per criterion (see ``conftest.py``).
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings

from qeraser.linalg import partial_trace, projector
from qeraser.metrics import (
    closed_form_triality,
    concurrence_mixed,
    distinguishability,
    distinguishability_from_branches,
    evolved_triality,
)
from qeraser.model import ApparatusConfig, Detector, click_probabilities, normalized_branches, random_config
from qeraser.pipeline import fringe_offset_gap, run_check, run_screen, run_sweep
from qeraser.scenario import (
    PRESETS,
    ScenarioError,
    format_diagnostics,
    load_preset,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)

from conftest import haar_state
from test_scenario import scenarios

N_CONFIGS = 10_000
ENSEMBLE_SEED = 2024
MIN_P = 1e-6
DERIVED = 1e-10
EXACT = 1e-12


@pytest.fixture(scope="module")
def ensemble():
    start = time.perf_counter()
    summary = run_check(N_CONFIGS, ENSEMBLE_SEED, DERIVED, MIN_P)
    return summary, time.perf_counter() - start


def _ensemble_branches():
    """Same configurations as ``run_check`` draws, with their usable D1/D2 branches."""
    rng = np.random.default_rng(ENSEMBLE_SEED)
    for _ in range(N_CONFIGS):
        cfg = random_config(rng)
        probs = click_probabilities(cfg)
        yield cfg, [d for d in (Detector.D1, Detector.D2) if probs[d] > MIN_P]


@pytest.mark.acceptance(1)
def test_triality_on_both_routes(ensemble, record_property):
    summary, elapsed = ensemble
    record_property("max_residual", summary.max_triality)
    record_property("seconds", elapsed)
    assert summary.n_configs >= 10_000
    assert summary.n_branches > 0
    assert summary.max_triality <= DERIVED
    assert elapsed < 10.0


@pytest.mark.acceptance(2)
def test_routes_agree(ensemble, record_property):
    summary, _ = ensemble
    record_property("max_gap", summary.max_route_gap)
    assert summary.max_route_gap <= DERIVED


@pytest.mark.acceptance(3)
def test_purity_relation(ensemble, record_property):
    summary, _ = ensemble
    record_property("max_residual", summary.max_duality_purity)
    assert summary.max_duality_purity <= DERIVED


@pytest.mark.acceptance(4)
def test_concurrence_oracle(record_property):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        psi = haar_state(rng)
        rho = projector(psi)
        rho_a = partial_trace(rho, (2, 2), keep=0)
        expected = math.sqrt(max(0.0, 2.0 * (1.0 - np.trace(rho_a @ rho_a).real)))
        worst = max(worst, abs(concurrence_mixed(rho) - expected))
    record_property("max_gap", worst)
    assert worst <= 1e-9


def _pvc(cfg, detector):
    reports = [evolved_triality(cfg, detector), closed_form_triality(cfg, detector)]
    return [(r.P, r.V, r.C) for r in reports]


@pytest.mark.acceptance(5)
def test_conventional_eraser():
    cfg = ApparatusConfig.from_moduli(0.5, 1.0, 1.0, 0.5, 1.0)
    for got in _pvc(cfg, Detector.D1):
        assert got == pytest.approx((0.0, 1.0, 0.0), abs=EXACT)


@pytest.mark.acceptance(5)
@pytest.mark.parametrize("detector", [Detector.D3, Detector.D4])
def test_removed_splitters_give_full_path_information(detector):
    cfg = ApparatusConfig.from_moduli(0.5, 0.0, 0.0, 0.5, 1.0)
    for got in _pvc(cfg, detector):
        assert got == pytest.approx((1.0, 0.0, 0.0), abs=EXACT)


@pytest.mark.acceptance(6)
def test_spot_value():
    cfg = ApparatusConfig.from_moduli(0.5, 1.0, 1.0, 0.1, 0.6)
    for rep in (evolved_triality(cfg, "D1"), closed_form_triality(cfg, "D1")):
        assert rep.P == pytest.approx(0.8, abs=DERIVED)
        assert rep.V == pytest.approx(0.36, abs=DERIVED)
        assert rep.C == pytest.approx(0.48, abs=DERIVED)
        assert rep.D == pytest.approx(math.sqrt(0.8704), abs=DERIVED)
        assert rep.probability == pytest.approx(0.5, abs=DERIVED)


@pytest.mark.acceptance(7)
def test_probability_closure(ensemble, record_property):
    summary, _ = ensemble
    record_property("max_closure", summary.max_probability_closure)
    record_property("max_closed_form_gap", summary.max_probability_gap)
    assert summary.max_probability_closure <= EXACT
    assert summary.max_probability_gap <= EXACT


@pytest.mark.acceptance(8)
def test_distinguishability_identities(ensemble, record_property):
    summary, _ = ensemble
    assert summary.max_distinguishability <= DERIVED
    assert summary.max_visibility_excess <= 0.0

    # branch-weight form, checked against the evolved state's trace distance
    worst_branch, worst_pc = 0.0, 0.0
    for cfg, detectors in _ensemble_branches():
        for d in detectors:
            rep = evolved_triality(cfg, d)
            a, b = normalized_branches(cfg, d)
            literal = distinguishability_from_branches(abs(a) ** 2, abs(b) ** 2, abs(cfg.q))
            worst_branch = max(worst_branch, abs(literal - rep.D))
            worst_pc = max(worst_pc, abs(distinguishability(rep.P, rep.C) - rep.D))
    record_property("max_branch_form_gap", worst_branch)
    record_property("max_pc_form_gap", worst_pc)
    assert worst_branch <= DERIVED
    assert worst_pc <= DERIVED


def _sweep(name):
    return run_sweep(load_preset(name), Detector.D1)


@pytest.mark.acceptance(9)
def test_fig4a_endpoints():
    rows = _sweep("fig4a")
    assert rows[0].swept_value == 0.0 and rows[-1].swept_value == 1.0
    assert rows[0].V == pytest.approx(0.0, abs=DERIVED)
    assert rows[-1].C == pytest.approx(0.0, abs=DERIVED)


@pytest.mark.acceptance(9)
def test_fig4b_endpoints():
    rows = _sweep("fig4b")
    assert rows[0].P == pytest.approx(1.0, abs=DERIVED)
    assert rows[-1].P == pytest.approx(1.0, abs=DERIVED)


@pytest.mark.acceptance(9)
def test_fig4c_maximum_at_mirror():
    rows = [r for r in _sweep("fig4c") if r.defined]
    assert rows[-1].swept_value == 1.0
    assert max(r.V for r in rows) - rows[-1].V <= DERIVED
    assert max(r.C for r in rows) - rows[-1].C <= DERIVED


@pytest.mark.acceptance(9)
def test_fig4d_endpoints():
    rows = _sweep("fig4d")
    assert rows[0].P == pytest.approx(1.0, abs=DERIVED)
    assert rows[-1].P == pytest.approx(1.0, abs=DERIVED)


SCREEN_N = 100_000
SCREEN_SEED = 11


@pytest.fixture(scope="module")
def screens():
    conventional = load_preset("conventional")
    start = time.perf_counter()
    runs = {
        "V=1": run_screen(conventional, "D1", samples=SCREEN_N, seed=SCREEN_SEED),
        "D2": run_screen(conventional, "D2", samples=SCREEN_N, seed=SCREEN_SEED + 1),
        "V=0.36": run_screen(load_preset("fig4a"), "D1", samples=SCREEN_N, seed=SCREEN_SEED + 2),
        "V=0": run_screen(load_preset("which-path"), "D3", samples=SCREEN_N, seed=SCREEN_SEED + 3),
        "mixture": run_screen(conventional, None, samples=SCREEN_N, seed=SCREEN_SEED + 4),
    }
    return runs, time.perf_counter() - start


@pytest.mark.acceptance(10)
@pytest.mark.parametrize("key, expected", [("V=1", 1.0), ("V=0.36", 0.36), ("V=0", 0.0)])
def test_screen_visibility(screens, key, expected, record_property):
    run = screens[0][key]
    s = run.samples
    record_property(f"{key} estimate", s.estimated_V)
    record_property(f"{key} stderr", s.estimated_V_stderr)
    assert s.n == SCREEN_N
    assert run.analytic_V == pytest.approx(expected, abs=DERIVED)
    assert abs(s.estimated_V - expected) <= 3.0 * s.estimated_V_stderr


@pytest.mark.acceptance(10)
def test_screen_anti_phase(screens, record_property):
    runs = screens[0]
    gap = fringe_offset_gap(runs["V=1"], runs["D2"])
    record_property("offset_gap", gap)
    assert abs(gap - math.pi) <= 0.05


@pytest.mark.acceptance(10)
def test_screen_mixture_flat(screens):
    s = screens[0]["mixture"].samples
    assert screens[0]["mixture"].analytic_V == pytest.approx(0.0, abs=DERIVED)
    assert s.estimated_V <= 3.0 * s.estimated_V_stderr


@pytest.mark.acceptance(10)
def test_screen_runtime(screens, record_property):
    record_property("seconds", screens[1])
    assert screens[1] < 5.0


GOLDEN = Path(__file__).parent / "data" / "scenarios"
DIAGNOSTIC_CLASSES = {
    "syntax", "unknown-section", "duplicate-section", "unknown-key", "duplicate-key",
    "invalid-value", "out-of-range", "missing-section", "missing-key", "key-outside-section", "encoding",
}


def _render(path: Path) -> bytes:
    try:
        text = serialize_scenario(load_scenario(path))
    except ScenarioError as exc:
        text = format_diagnostics(exc.diagnostics)
    return text.encode("utf-8")


@pytest.mark.acceptance(11)
def test_golden_suite():
    files = sorted(GOLDEN.glob("*.scn"))
    assert len(files) >= 10
    seen_codes, valid = set(), 0
    for path in files:
        expected = path.with_suffix(".expected").read_bytes()
        assert _render(path) == expected, path.name
        if expected.startswith(b"["):
            valid += 1
        for line in expected.decode("utf-8").splitlines():
            parts = line.split(": ")
            if len(parts) >= 3 and parts[0].count(":") == 1:
                seen_codes.add(parts[1])
    assert valid >= 1
    assert seen_codes >= DIAGNOSTIC_CLASSES


@pytest.mark.acceptance(11)
@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip(name):
    sc = load_preset(name)
    assert parse_scenario(serialize_scenario(sc)) == sc


@pytest.mark.acceptance(11)
@settings(max_examples=200, deadline=None)
@given(scenarios())
def test_round_trip_property(sc):
    assert parse_scenario(serialize_scenario(sc)) == sc
