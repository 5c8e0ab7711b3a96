from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from qwalk.walkmodel import validate_coin_pair

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


# -- random coin pairs -------------------------------------------------------


def random_unitary(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_tp_pair(rng: np.random.Generator):
    """(L, R) stacked as the two halves of a random 4x2 isometry."""
    z = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    v, _ = np.linalg.qr(z)
    return validate_coin_pair(v[:2], v[2:], name="random-tp")


def random_unitary_pair(rng: np.random.Generator):
    """L = P C, R = (I - P) C with P a random rank-one projector."""
    c = random_unitary(rng)
    u = random_unitary(rng)[:, 0]
    p = np.outer(u, u.conj())
    return validate_coin_pair(p @ c, (np.eye(2) - p) @ c, name="random-unitary")


def random_normal_pair(rng: np.random.Generator):
    """Simultaneously diagonalizable pair with L^*L + R^*R = I."""
    u = random_unitary(rng)
    a = rng.uniform(0.05, 0.95, size=2)
    ph = np.exp(2j * np.pi * rng.uniform(size=4))
    L = u @ np.diag(np.sqrt(a) * ph[:2]) @ u.conj().T
    R = u @ np.diag(np.sqrt(1 - a) * ph[2:]) @ u.conj().T
    return validate_coin_pair(L, R, name="random-normal")


def random_spinor(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


def random_density(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary ------------------------------------------------------

_acceptance: dict[int, dict] = defaultdict(lambda: {"title": "", "outcomes": []})


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("acceptance", m.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "acceptance" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        n, title = props["acceptance"]
        entry = _acceptance[n]
        entry["title"] = title
        entry["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        entry = _acceptance[n]
        ok = all(o == "passed" for o in entry["outcomes"])
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {n:>2}: {status}  {entry['title']} ({len(entry['outcomes'])} checks)"
        )
