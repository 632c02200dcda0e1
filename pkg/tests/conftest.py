import re

import numpy as np
import pytest

from cqec.qstate import projector

_CRITERIA: dict[int, list[str]] = {}


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def plus_rho():
    return projector(np.array([1.0, 1.0]) / np.sqrt(2))


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    idx = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if hasattr(report, "wasxfail"):
            outcome = "FAIL (known gap, xfail)" if report.skipped else "PASS (unexpected)"
        else:
            outcome = report.outcome.upper().replace("PASSED", "PASS").replace("FAILED", "FAIL")
        _CRITERIA.setdefault(idx, []).append(f"{outcome}: {report.nodeid.split('::')[-1]}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for idx in sorted(_CRITERIA):
        parts = _CRITERIA[idx]
        verdict = "PASS" if all(p.startswith("PASS") for p in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {idx:2d}: {verdict}")
        for p in parts:
            terminalreporter.write_line(f"    {p}")
