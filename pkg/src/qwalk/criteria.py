"""Closed-form recurrence verdicts for nearest neighbour open walks.

Everything here rests on the generating function of first-return path
counts,

    sum_{k>=1} C(2k, k) / (2k - 1) * y^k = 1 - sqrt(1 - 4y),   0 <= y <= 1/4,

evaluated at y = x(1 - x), where it equals 1 - |1 - 2x| and reaches 1 only at
x = 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import HypothesisViolated, NotTracePreserving
from .matkernel import adjoint, hermitian_eigenvalues, is_normal, singular_values
from .walkmodel import CoinPair, as_density

HALF_TOL = 1e-10
NORMAL_TOL = 1e-10

RECURRENT = "Recurrent"
TRANSIENT_SOME = "TransientForSomeDensity"
INCONCLUSIVE = "Inconclusive"


def first_return_generating(y):
    """1 - sqrt(1 - 4y), clamped to the convergence disc y <= 1/4."""
    y = np.asarray(y, dtype=float)
    return 1.0 - np.sqrt(np.clip(1.0 - 4.0 * y, 0.0, None))


def first_return_partial_sum(y: float, k_max: int) -> float:
    """Direct summation of the path-count series up to k_max.

    Uses the term ratio t_{k+1} / t_k = 2y(2k - 1) / (k + 1) so large k
    never overflows.
    """
    term = 2.0 * y
    total = term
    for k in range(1, k_max):
        term *= y * 2.0 * (2 * k - 1) / (k + 1)
        total += term
    return total


def g(x):
    """1 - sqrt(1 - 4x(1 - x)) = 1 - |1 - 2x|."""
    x = np.asarray(x, dtype=float)
    return first_return_generating(x * (1.0 - x))


@dataclass
class RecurrenceVerdict:
    verdict: str
    rule: str
    certificate: dict = field(default_factory=dict)
    per_density_return: Optional[dict] = None


def _gram_eigenvalues(coin: CoinPair):
    ll = adjoint(coin.L) @ coin.L
    rr = adjoint(coin.R) @ coin.R
    return (
        hermitian_eigenvalues(0.5 * (ll + adjoint(ll))),
        hermitian_eigenvalues(0.5 * (rr + adjoint(rr))),
    )


def detect_pq(coin: CoinPair, tol: float = 1e-12) -> bool:
    """Each matrix diagonal or antidiagonal (the dimension-2 PQ shapes)."""

    def ok(a):
        return abs(a[0, 1]) + abs(a[1, 0]) <= tol or abs(a[0, 0]) + abs(a[1, 1]) <= tol

    return ok(coin.L) and ok(coin.R)


def _require_tp(coin: CoinPair) -> None:
    if not coin.trace_preserving:
        raise NotTracePreserving("criteria need L^*L + R^*R = I")


def _common_eigenbasis(coin: CoinPair):
    ll = adjoint(coin.L) @ coin.L
    ll = 0.5 * (ll + adjoint(ll))
    lam, u = np.linalg.eigh(ll)
    # largest first, matching hermitian_eigenvalues
    return lam[::-1].real, u[:, ::-1]


def normal_return_probability(coin: CoinPair, rho) -> float:
    """Exact monitored return probability when L and R are normal.

    With L^*L = U diag(lam, mu) U^* and x11 = (U^* rho U)_{11}, the answer is
    (1 - |1 - 2 lam|) x11 + (1 - |1 - 2 mu|) (1 - x11).
    """
    _require_tp(coin)
    if not (is_normal(coin.L, NORMAL_TOL) and is_normal(coin.R, NORMAL_TOL)):
        raise HypothesisViolated("closed form needs both L and R normal")
    ll = adjoint(coin.L) @ coin.L
    rr = adjoint(coin.R) @ coin.R
    if np.max(np.abs(ll @ rr - rr @ ll)) > NORMAL_TOL:
        raise HypothesisViolated("L^*L and R^*R do not commute")
    (lam, mu), u = _common_eigenbasis(coin)
    rho = as_density(rho)
    x11 = float((adjoint(u) @ rho @ u)[0, 0].real) / float(np.trace(rho).real)
    return float(g(lam) * x11 + g(mu) * (1.0 - x11))


def normal_return_series(lam: float, mu: float, x11: float, k_max: int) -> float:
    """Truncated path-count series for the normal case."""
    return x11 * first_return_partial_sum(lam * (1 - lam), k_max) + (
        1 - x11
    ) * first_return_partial_sum(mu * (1 - mu), k_max)


def singular_value_bounds(coin: CoinPair) -> tuple[float, float]:
    """Bounds on the monitored return probability valid for every density."""
    _require_tp(coin)
    lmax, lmin = singular_values(coin.L)
    rmax, rmin = singular_values(coin.R)
    y_min = (lmin * rmin) ** 2
    y_max = (lmax * rmax) ** 2
    lower = float(first_return_generating(min(y_min, 0.25)))
    upper = 1.0 if y_max > 0.25 else float(min(1.0, first_return_generating(y_max)))
    return lower, upper


def eigenbasis_densities(coin: CoinPair) -> dict[str, np.ndarray]:
    _, u = _common_eigenbasis(coin)
    return {
        "E11": np.outer(u[:, 0], u[:, 0].conj()),
        "E22": np.outer(u[:, 1], u[:, 1].conj()),
    }


def eigen_half_criterion(coin: CoinPair) -> RecurrenceVerdict:
    """Verdict from the eigenvalues of L^*L and R^*R.

    All four equal to 1/2 forces recurrence. For normal pairs anything else
    leaves some density transient. Otherwise the rule is silent.
    """
    _require_tp(coin)
    ll, rr = _gram_eigenvalues(coin)
    normal_l = is_normal(coin.L, NORMAL_TOL)
    normal_r = is_normal(coin.R, NORMAL_TOL)
    cert = {
        "eigenvalues": {"LstarL": list(ll), "RstarR": list(rr)},
        "L_normal": normal_l,
        "R_normal": normal_r,
        "unital": coin.unital,
        "singular_bounds": list(singular_value_bounds(coin)),
        "pq": detect_pq(coin),
    }
    all_half = max(abs(v - 0.5) for v in ll + rr) <= HALF_TOL

    per_density = None
    if normal_l and normal_r:
        per_density = {
            label: normal_return_probability(coin, rho)
            for label, rho in eigenbasis_densities(coin).items()
        }

    if all_half:
        return RecurrenceVerdict(RECURRENT, "eigenvalue-half forward", cert, per_density)
    if normal_l and normal_r:
        return RecurrenceVerdict(
            TRANSIENT_SOME, "eigenvalue-half converse (normal pair)", cert, per_density
        )
    # A unital pair with one normal matrix has R^*R = I - L^*L = I - LL^* = RR^*,
    # so the other matrix is normal too and the normal branch above covers it.
    return RecurrenceVerdict(INCONCLUSIVE, "eigenvalue-half not applicable", cert, None)


def verdict_json(coin: CoinPair, verdict: Optional[RecurrenceVerdict] = None) -> dict:
    verdict = verdict or eigen_half_criterion(coin)
    cert = verdict.certificate
    out = {
        "verdict": verdict.verdict,
        "rule": verdict.rule,
        "eigenvalues": cert["eigenvalues"],
        "singular_bounds": cert["singular_bounds"],
        "pq": cert["pq"],
    }
    if verdict.per_density_return is not None:
        out["per_density_return"] = verdict.per_density_return
    return out
