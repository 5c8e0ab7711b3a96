"""Exact first-return path sums on the integer line.

Every path that leaves the origin and first comes back at step 2k is
enumerated, and its transition product ``M = B_{2k} ... B_1`` (left step -> L,
right step -> R, latest step on the left) is formed explicitly. Cost grows
like the path count ``C(2k, k) / (2k - 1)``, so this module is an oracle for
the polynomial-time taboo evolution in :mod:`qwalk.monitored`, not a workhorse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .errors import CostGuardExceeded, ValidationError
from .walkmodel import CoinPair, as_density, require_walk_unitary

MAX_PATH_LENGTH = 30

SERIES_KINDS = ("oqw-monitored", "uqw-monitored", "unmonitored-p0")


@dataclass(frozen=True)
class ReturnSeries:
    """Per-step return probabilities for steps ``1..N``.

    For the monitored kinds ``terms[n-1]`` is the first-return probability at
    step n; for ``unmonitored-p0`` it is the probability of sitting at the
    origin at step n without monitoring.
    """

    kind: str
    terms: np.ndarray
    survival: Optional[np.ndarray] = None
    arrivals: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ValidationError(f"unknown series kind {self.kind!r}")
        t = np.asarray(self.terms, dtype=float)
        object.__setattr__(self, "terms", t)
        if t.size and (t.min() < -1e-12 or t.max() > 1 + 1e-12):
            raise ValidationError("return probabilities must lie in [0, 1]")
        if self.kind != "unmonitored-p0" and t.sum() > 1 + 1e-10:
            raise ValidationError("monitored return mass exceeds 1")

    @property
    def horizon(self) -> int:
        return len(self.terms)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, len(self.terms) + 1)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.terms)

    @property
    def polya_partial(self) -> np.ndarray:
        if self.kind != "unmonitored-p0":
            raise ValidationError("Polya partial products need an unmonitored series")
        return 1.0 - np.cumprod(1.0 - np.clip(self.terms, 0.0, 1.0))

    def term(self, n: int) -> float:
        return float(self.terms[n - 1]) if 1 <= n <= len(self.terms) else 0.0


def first_return_path_count(k: int) -> int:
    """Number of +-1 paths of length 2k whose first return to 0 is at 2k."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return comb(2 * k, k) // (2 * k - 1)


def _check_k(k: int) -> None:
    if k < 1:
        raise ValidationError("k must be >= 1")
    if 2 * k > MAX_PATH_LENGTH:
        raise CostGuardExceeded(
            f"path length {2 * k} exceeds the enumeration guard {MAX_PATH_LENGTH}; "
            "use qwalk.monitored instead"
        )


def _expand(k: int, payload, step_fn):
    """Grow all admissible prefixes level by level.

    Children of prefix i land at 2i (right step) and 2i + 1 (left step)
    before filtering, so output order is lexicographic with +1 before -1.
    """
    n = 2 * k
    pos = np.zeros(1, dtype=np.int64)
    for t in range(n):
        remaining = n - t - 1
        new_pos = np.stack([pos + 1, pos - 1], axis=1).reshape(-1)
        keep = np.abs(new_pos) <= remaining
        if remaining:
            keep &= new_pos != 0
        payload = step_fn(payload, keep)
        pos = new_pos[keep]
    return payload


def enumerate_first_return_paths(k: int) -> list[tuple[int, ...]]:
    _check_k(k)

    def grow(steps, keep):
        m = len(steps)
        width = steps.shape[1]
        out = np.empty((m, 2, width + 1), dtype=np.int8)
        out[:, :, :width] = steps[:, None, :]
        out[:, 0, width] = 1
        out[:, 1, width] = -1
        return out.reshape(2 * m, width + 1)[keep]

    steps = _expand(k, np.zeros((1, 0), dtype=np.int8), grow)
    return [tuple(int(s) for s in row) for row in steps]


def path_products(coin: CoinPair, k: int) -> np.ndarray:
    """Transition products of all first-return paths of length 2k.

    Returned in the order of :func:`enumerate_first_return_paths`.
    """
    _check_k(k)
    L, R = coin.L, coin.R

    def grow(prods, keep):
        out = np.stack([R @ prods, L @ prods], axis=1)
        return out.reshape(-1, 2, 2)[keep]

    return _expand(k, np.eye(2, dtype=complex)[None], grow)


def oqw_first_return_term(coin: CoinPair, rho, k: int) -> float:
    rho = as_density(rho)
    m = path_products(coin, k)
    # tr(M rho M^*) for every path
    return float(np.einsum("nij,jk,nik->", m, rho, m.conj()).real)


def uqw_path_amplitudes(coin: CoinPair, psi, k: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(2)
    return path_products(coin, k) @ psi


def uqw_first_return_term(coin: CoinPair, psi, k: int) -> float:
    require_walk_unitary(coin)
    amp = uqw_path_amplitudes(coin, psi, k).sum(axis=0)
    return float(np.vdot(amp, amp).real)


def interference_term(coin: CoinPair, psi, k: int) -> float:
    """UQW first-return term minus the OQW term for the pure density of psi."""
    require_walk_unitary(coin)
    return uqw_first_return_term(coin, psi, k) - oqw_first_return_term(coin, psi, k)


def interference_cross_sum(coin: CoinPair, psi, k: int) -> float:
    """2 * sum over unordered path pairs C != D of Re<C psi, D psi>."""
    require_walk_unitary(coin)
    v = uqw_path_amplitudes(coin, psi, k)
    gram = v.conj() @ v.T
    return float(2.0 * np.triu(gram, 1).real.sum())


@dataclass(frozen=True)
class FirstReturnTable:
    """First-return terms at steps 2, 4, ..., 2k_max for one coin and state."""

    steps: np.ndarray
    oqw: np.ndarray
    uqw: Optional[np.ndarray] = None

    @property
    def interference(self) -> Optional[np.ndarray]:
        return None if self.uqw is None else self.uqw - self.oqw

    @property
    def oqw_cumulative(self) -> np.ndarray:
        return np.cumsum(self.oqw)

    @property
    def uqw_cumulative(self) -> Optional[np.ndarray]:
        return None if self.uqw is None else np.cumsum(self.uqw)

    @property
    def interference_cumulative(self) -> Optional[np.ndarray]:
        return None if self.uqw is None else np.cumsum(self.interference)

    def rows(self) -> list[dict]:
        out = []
        for i, s in enumerate(self.steps):
            row = {
                "steps": int(s),
                "oqw_term": float(self.oqw[i]),
                "uqw_term": None,
                "interference": None,
                "oqw_cumulative": float(self.oqw_cumulative[i]),
                "uqw_cumulative": None,
            }
            if self.uqw is not None:
                row["uqw_term"] = float(self.uqw[i])
                row["interference"] = float(self.interference[i])
                row["uqw_cumulative"] = float(self.uqw_cumulative[i])
            out.append(row)
        return out


def _is_spinor(state) -> bool:
    return np.asarray(state).shape == (2,)


def cumulative_return(coin: CoinPair, state, max_k: int) -> FirstReturnTable:
    """Path-sum first-return table up to step 2 * max_k.

    A spinor gives both walks (when the coin induces a unitary walk); a
    density gives only the open walk.
    """
    _check_k(max_k)
    ks = range(1, max_k + 1)
    oqw = np.array([oqw_first_return_term(coin, state, k) for k in ks])
    uqw = None
    if _is_spinor(state) and coin.walk_unitary:
        uqw = np.array([uqw_first_return_term(coin, state, k) for k in ks])
    return FirstReturnTable(np.arange(2, 2 * max_k + 1, 2), oqw, uqw)
