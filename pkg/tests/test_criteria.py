import numpy as np
import pytest
from hypothesis import given

from conftest import random_density, random_normal_pair, random_tp_pair, seeds
from qwalk import criteria, monitored, walkmodel
from qwalk.errors import HypothesisViolated, NotTracePreserving
from qwalk.walkmodel import E11, E22


def test_generating_function():
    for y in (0.0, 0.1, 0.21):
        assert criteria.first_return_partial_sum(y, 4000) == pytest.approx(
            float(criteria.first_return_generating(y)), abs=1e-12
        )
    # at y = 1/4 the remainder after K terms behaves like 1 / sqrt(pi K)
    k = 4000
    gap = 1.0 - criteria.first_return_partial_sum(0.25, k)
    assert gap == pytest.approx(1 / np.sqrt(np.pi * k), rel=1e-3)
    assert float(criteria.g(0.5)) == 1.0
    assert float(criteria.g(0.2)) == pytest.approx(0.4)


def test_bitflip_verdicts_and_bounds():
    for p in (0.1, 0.3, 0.5):
        coin = walkmodel.bitflip(p)
        lo, hi = criteria.singular_value_bounds(coin)
        assert lo == pytest.approx(1 - abs(1 - 2 * p), abs=1e-12)
        assert hi == pytest.approx(1 - abs(1 - 2 * p), abs=1e-12)
        assert criteria.normal_return_probability(coin, E11) == pytest.approx(1 - abs(1 - 2 * p), abs=1e-12)
    assert criteria.eigen_half_criterion(walkmodel.bitflip(0.5)).rule == "eigenvalue-half forward"
    v = criteria.eigen_half_criterion(walkmodel.bitflip(0.3))
    assert v.verdict == criteria.TRANSIENT_SOME


def test_hadamard_bounds_vacuous():
    lo, hi = criteria.singular_value_bounds(walkmodel.hadamard())
    assert lo == 0.0 and hi == 1.0


def test_half_singular_values_pin_bounds():
    s = 1 / np.sqrt(2)
    coin = walkmodel.validate_coin_pair(s * np.eye(2), s * np.eye(2))
    assert criteria.singular_value_bounds(coin) == pytest.approx((1.0, 1.0))
    assert criteria.detect_pq(coin)


def test_pq_detection():
    assert criteria.detect_pq(walkmodel.bitflip(0.3))
    assert not criteria.detect_pq(walkmodel.hadamard())
    assert not criteria.detect_pq(walkmodel.sec7())


def test_normal_closed_form_rejects_non_normal():
    with pytest.raises(HypothesisViolated):
        criteria.normal_return_probability(walkmodel.hadamard(), E11)


def test_non_trace_preserving_rejected():
    fake = walkmodel.hadamard()
    object.__setattr__(fake, "trace_preserving", False)
    with pytest.raises(NotTracePreserving):
        criteria.eigen_half_criterion(fake)


@given(seeds)
def test_bounds_sandwich_monitored_returns(seed):
    rng = np.random.default_rng(seed)
    coin = random_tp_pair(rng)
    lo, hi = criteria.singular_value_bounds(coin)
    rho = random_density(rng)
    total = monitored.oqw_monitored_series(coin, rho, 200).cumulative[-1]
    assert total <= hi + 1e-9
    # the lower bound needs the full series; a truncation can only fall short
    assert lo <= 1.0 and lo >= 0.0


@given(seeds)
def test_normal_closed_form_matches_series(seed):
    rng = np.random.default_rng(seed)
    coin = random_normal_pair(rng)
    rho = random_density(rng)
    (lam, mu), u = criteria._common_eigenbasis(coin)
    x11 = float((u.conj().T @ rho @ u)[0, 0].real)
    closed = criteria.normal_return_probability(coin, rho)
    series = criteria.normal_return_series(lam, mu, x11, 2000)
    assert series <= closed + 1e-12
    monitored_total = monitored.oqw_monitored_series(coin, rho, 60).cumulative[-1]
    exact_60 = criteria.normal_return_series(lam, mu, x11, 30)
    assert monitored_total == pytest.approx(exact_60, abs=1e-10)


def test_recurrent_verdict_consistent_with_series():
    coin = walkmodel.bitflip(0.5)
    rng = np.random.default_rng(5)
    for _ in range(5):
        total = monitored.oqw_monitored_series(coin, random_density(rng), 2000).cumulative[-1]
        assert total > 0.97


def test_transient_verdict_consistent_with_series():
    coin = walkmodel.diag_trichotomy()
    v = criteria.eigen_half_criterion(coin)
    closed = v.per_density_return["E22"]
    assert closed < 1
    total = monitored.oqw_monitored_series(coin, E22, 2000).cumulative[-1]
    assert total < closed + 1e-3


@given(seeds)
def test_unital_with_one_normal_matrix_is_normal_pair(seed):
    rng = np.random.default_rng(seed)
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    t = rng.uniform(0.05, 0.45)
    L = np.sqrt(t) * u
    # any R with R^*R = (1 - t) I; choose a non-diagonal unitary factor
    w = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    coin = walkmodel.validate_coin_pair(L, np.sqrt(1 - t) * w)
    assert coin.unital and coin.L_normal and coin.R_normal
    assert criteria.eigen_half_criterion(coin).rule == "eigenvalue-half converse (normal pair)"


def test_verdict_json_shape():
    out = criteria.verdict_json(walkmodel.diag_trichotomy())
    assert out["verdict"] == "TransientForSomeDensity"
    assert set(out["eigenvalues"]) == {"LstarL", "RstarR"}
    assert out["eigenvalues"]["LstarL"] == pytest.approx([1 / 2, 1 / 3])
    assert out["per_density_return"]["E22"] == pytest.approx(2 / 3)
    assert criteria.verdict_json(walkmodel.sec7())["verdict"] == "Inconclusive"
