import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qeraser.model import ApparatusConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def conventional():
    """Symmetric source, mirrors at B1/B2, 50:50 B3, identical polarizers."""
    return ApparatusConfig.from_moduli(0.5, 1.0, 1.0, 0.5, 1.0)


@pytest.fixture
def which_path():
    """B1 and B2 removed."""
    return ApparatusConfig.from_moduli(0.5, 0.0, 0.0, 0.5, 1.0)


@pytest.fixture
def spot():
    """|c1|^2 = 0.5, mirrors at B1/B2, |r3|^2 = 0.1, q = 0.6."""
    return ApparatusConfig.from_moduli(0.5, 1.0, 1.0, 0.1, 0.6)


def haar_state(rng, dim=4):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


_unit = st.floats(0.0, 1.0, allow_nan=False)
_phase = st.floats(0.0, 2 * math.pi, allow_nan=False)


@st.composite
def configs(draw):
    """Any valid apparatus configuration, edge moduli included."""
    return ApparatusConfig.from_moduli(
        draw(_unit), draw(_unit), draw(_unit), draw(_unit), draw(_unit),
        c1_phase=draw(_phase), c2_phase=draw(_phase),
        r_phases=(draw(_phase), draw(_phase), draw(_phase)),
        t_phases=(draw(_phase), draw(_phase), draw(_phase)),
        q_phase=draw(_phase),
    )


# Per-criterion PASS/FAIL summary for tests marked ``acceptance(n)``.
_criteria: dict[int, list[tuple[str, str, list]]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker:
            item.user_properties.append(("acceptance", marker.args[0]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    criterion = props.pop("acceptance", None)
    if criterion is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(criterion, []).append((report.nodeid, report.outcome, sorted(props.items())))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_criteria):
        results = _criteria[criterion]
        ok = all(outcome == "passed" for _, outcome, _ in results)
        details = {k: v for _, _, props in results for k, v in props}
        extra = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in details.items())
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'} ({len(results)} test(s))"
        terminalreporter.write_line(line + (f"  {extra}" if extra else ""))
