"""Coin pairs, lattice states and one-step dynamics on the integer line.

A coin pair (L, R) drives two walks. The open walk (OQW) conjugates the
density block at each site::

    eta_i = R rho_{i-1} R^* + L rho_{i+1} L^*

and the coined unitary walk (UQW) moves spinor amplitudes::

    psi'_i = R psi_{i-1} + L psi_{i+1}

R always moves one site to the right, L one site to the left.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    CoinNotUnitarySum,
    DegenerateStep,
    NotTracePreserving,
    ValidationError,
)
from .matkernel import adjoint, as_matrix, is_normal

FLAG_TOL = 1e-12

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)
BALANCED = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)
E11 = np.diag([1.0, 0.0]).astype(complex)
E22 = np.diag([0.0, 1.0]).astype(complex)


def _max_dev(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def _pattern_ok(a: np.ndarray, tol: float) -> bool:
    """True if a 2x2 matrix is diagonal or antidiagonal."""
    diag_off = abs(a[0, 1]) + abs(a[1, 0])
    anti_off = abs(a[0, 0]) + abs(a[1, 1])
    return diag_off <= tol or anti_off <= tol


@dataclass(frozen=True)
class CoinPair:
    L: np.ndarray
    R: np.ndarray
    trace_preserving: bool
    unital: bool
    unitary_sum: bool
    orthogonal_ranges: bool
    L_normal: bool
    R_normal: bool
    is_pq: bool
    name: str = "custom"

    @property
    def walk_unitary(self) -> bool:
        """L + R unitary and R^* L = 0, so the coined walk preserves norm."""
        return self.unitary_sum and self.orthogonal_ranges

    @property
    def normal(self) -> bool:
        return self.L_normal and self.R_normal

    def flags(self) -> dict:
        return {
            "trace_preserving": self.trace_preserving,
            "unital": self.unital,
            "unitary_sum": self.unitary_sum,
            "orthogonal_ranges": self.orthogonal_ranges,
            "L_normal": self.L_normal,
            "R_normal": self.R_normal,
            "is_pq": self.is_pq,
        }


def validate_coin_pair(L, R, name: str = "custom") -> CoinPair:
    L = as_matrix(L)
    R = as_matrix(R)
    if L.shape != (2, 2) or R.shape != (2, 2):
        raise ValidationError("coin matrices must be 2x2")
    eye = np.eye(2)
    tp = _max_dev(adjoint(L) @ L + adjoint(R) @ R - eye) < FLAG_TOL
    if not tp:
        raise NotTracePreserving(
            "L^*L + R^*R != I; the pair does not define an open quantum walk"
        )
    c = L + R
    return CoinPair(
        L=L,
        R=R,
        trace_preserving=tp,
        unital=_max_dev(L @ adjoint(L) + R @ adjoint(R) - eye) < FLAG_TOL,
        unitary_sum=_max_dev(adjoint(c) @ c - eye) < FLAG_TOL,
        orthogonal_ranges=_max_dev(adjoint(R) @ L) < FLAG_TOL,
        L_normal=is_normal(L, FLAG_TOL),
        R_normal=is_normal(R, FLAG_TOL),
        is_pq=_pattern_ok(L, FLAG_TOL) and _pattern_ok(R, FLAG_TOL),
        name=name,
    )


def require_walk_unitary(coin: CoinPair) -> None:
    if not coin.walk_unitary:
        raise CoinNotUnitarySum(
            f"coin '{coin.name}' does not induce a unitary walk "
            "(need L + R unitary and R^* L = 0)"
        )


# -- presets -----------------------------------------------------------------


def hadamard() -> CoinPair:
    s = 1.0 / np.sqrt(2.0)
    R = s * np.array([[1, 1], [0, 0]], dtype=complex)
    L = s * np.array([[0, 0], [1, -1]], dtype=complex)
    return validate_coin_pair(L, R, name="hadamard")


def bitflip(p: float = 0.5) -> CoinPair:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"bit-flip parameter must lie in [0, 1], got {p}")
    L = np.sqrt(p) * np.eye(2, dtype=complex)
    R = np.sqrt(1.0 - p) * np.array([[0, 1], [1, 0]], dtype=complex)
    return validate_coin_pair(L, R, name=f"bitflip({p:g})")


def sec7() -> CoinPair:
    """Non-normal, non-PQ pair with entries 1/sqrt(3)."""
    c = 1.0 / np.sqrt(3.0)
    L = c * np.array([[1, 1], [0, 1]], dtype=complex)
    R = c * np.array([[1, 0], [-1, 1]], dtype=complex)
    return validate_coin_pair(L, R, name="sec7")


def diag_trichotomy() -> CoinPair:
    L = np.diag([1 / np.sqrt(2.0), 1 / np.sqrt(3.0)]).astype(complex)
    R = np.diag([1 / np.sqrt(2.0), np.sqrt(2.0) / np.sqrt(3.0)]).astype(complex)
    return validate_coin_pair(L, R, name="diag-trichotomy")


PRESETS: dict[str, Callable[..., CoinPair]] = {
    "hadamard": hadamard,
    "bitflip": bitflip,
    "sec7": sec7,
    "diag-trichotomy": diag_trichotomy,
}


def preset(name: str, **params) -> CoinPair:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)} "
            "(the barrier walk lives in qwalk.kac)"
        ) from None
    return factory(**params)


# -- lattice states ----------------------------------------------------------


@dataclass(frozen=True)
class LatticeDensity:
    """Block-diagonal OQW state; ``blocks[j]`` sits at site ``start + j``."""

    start: int
    blocks: np.ndarray

    @classmethod
    def point(cls, rho, site: int = 0) -> "LatticeDensity":
        rho = as_matrix(rho)
        return cls(site, rho[None, :, :].copy())

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.blocks))

    def block(self, site: int) -> np.ndarray:
        j = site - self.start
        if 0 <= j < len(self.blocks):
            return self.blocks[j]
        return np.zeros((2, 2), dtype=complex)

    def traces(self) -> np.ndarray:
        return np.einsum("nii->n", self.blocks).real

    def total_trace(self) -> float:
        return float(self.traces().sum())

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.blocks + np.conj(np.swapaxes(self.blocks, 1, 2)))
        return float(np.linalg.eigvalsh(herm).min()) if len(herm) else 0.0


@dataclass(frozen=True)
class SpinorField:
    """UQW state; ``amplitudes[j]`` sits at site ``start + j``."""

    start: int
    amplitudes: np.ndarray

    @classmethod
    def point(cls, psi, site: int = 0) -> "SpinorField":
        psi = np.asarray(psi, dtype=complex).reshape(2)
        return cls(site, psi[None, :].copy())

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.amplitudes))

    def amplitude(self, site: int) -> np.ndarray:
        j = site - self.start
        if 0 <= j < len(self.amplitudes):
            return self.amplitudes[j]
        return np.zeros(2, dtype=complex)

    def probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def norm2(self) -> float:
        return float(self.probabilities().sum())


def push_blocks(blocks: np.ndarray, L: np.ndarray, R: np.ndarray) -> np.ndarray:
    """One OQW step on a block array; the result is two sites wider."""
    n = len(blocks)
    out = np.zeros((n + 2, 4), dtype=complex)
    if n:
        flat = blocks.reshape(n, 4)
        # rows of flat are row-major vecs, so B X B^* becomes flat @ kron(B, conj B)^T
        out[2:] += flat @ np.kron(R, R.conj()).T
        out[:n] += flat @ np.kron(L, L.conj()).T
    return out.reshape(n + 2, 2, 2)


def push_amplitudes(amps: np.ndarray, L: np.ndarray, R: np.ndarray) -> np.ndarray:
    """One UQW step on an amplitude array; the result is two sites wider."""
    n = len(amps)
    out = np.zeros((n + 2, 2), dtype=complex)
    if n:
        out[2:] += amps @ R.T
        out[:n] += amps @ L.T
    return out


def oqw_step(state: LatticeDensity, coin: CoinPair) -> LatticeDensity:
    return LatticeDensity(state.start - 1, push_blocks(state.blocks, coin.L, coin.R))


def uqw_step(state: SpinorField, coin: CoinPair) -> SpinorField:
    require_walk_unitary(coin)
    return SpinorField(
        state.start - 1, push_amplitudes(state.amplitudes, coin.L, coin.R)
    )


State = Union[LatticeDensity, SpinorField, np.ndarray]


def as_density(state) -> np.ndarray:
    """2-vector -> projector, 2x2 -> itself."""
    a = np.asarray(state, dtype=complex)
    if a.shape == (2,):
        return np.outer(a, a.conj())
    return as_matrix(a)


def evolve(state, coin: CoinPair, n: int, walk: str = "oqw"):
    if walk == "oqw":
        if not isinstance(state, LatticeDensity):
            state = LatticeDensity.point(as_density(state))
        blocks = state.blocks
        for _ in range(n):
            blocks = push_blocks(blocks, coin.L, coin.R)
        return LatticeDensity(state.start - n, blocks)
    if walk == "uqw":
        require_walk_unitary(coin)
        if not isinstance(state, SpinorField):
            state = SpinorField.point(state)
        amps = state.amplitudes
        for _ in range(n):
            amps = push_amplitudes(amps, coin.L, coin.R)
        return SpinorField(state.start - n, amps)
    raise ValidationError(f"walk must be 'oqw' or 'uqw', got {walk!r}")


def site_distribution(state, n: int, coin: CoinPair, walk: str = "oqw") -> dict[int, float]:
    """Site probabilities after ``n`` unmonitored steps (every window site)."""
    if n < 0:
        raise ValidationError("time must be non-negative")
    out = evolve(state, coin, n, walk)
    probs = out.traces() if walk == "oqw" else out.probabilities()
    return {int(s): float(p) for s, p in zip(out.sites, probs)}


# -- quantum trajectories ----------------------------------------------------


@dataclass(frozen=True)
class TrajectorySample:
    seed: int
    positions: np.ndarray
    densities: np.ndarray
    first_return_step: Optional[int] = None

    @property
    def horizon(self) -> int:
        return len(self.positions) - 1


def _moves(walk, site: int):
    if isinstance(walk, CoinPair):
        return [(site - 1, walk.L), (site + 1, walk.R)]
    return walk.outgoing(site)


def sample_trajectory(walk, rho0, start: int = 0, horizon: int = 100, seed: int = 0) -> TrajectorySample:
    """Unravel an OQW into one quantum trajectory.

    ``walk`` is a :class:`CoinPair` or a finite site walk exposing
    ``outgoing(site) -> [(destination, B), ...]``. Uses numpy's PCG64 via
    ``default_rng(seed)``.
    """
    if isinstance(walk, CoinPair) and not walk.trace_preserving:
        raise NotTracePreserving("trajectory sampling needs a trace-preserving pair")
    rng = np.random.default_rng(seed)
    rho = as_density(rho0)
    rho = rho / np.trace(rho).real
    positions = np.empty(horizon + 1, dtype=np.int64)
    densities = np.empty((horizon + 1,) + rho.shape, dtype=complex)
    positions[0] = start
    densities[0] = rho
    site = start
    first = None
    for t in range(1, horizon + 1):
        moves = _moves(walk, site)
        images = [b @ rho @ adjoint(b) for _, b in moves]
        probs = np.array([np.trace(m).real for m in images])
        total = probs.sum()
        if np.all(probs < 1e-15):
            raise DegenerateStep(f"all transition probabilities vanish at step {t}")
        u = rng.random() * total
        pick = int(np.searchsorted(np.cumsum(probs), u, side="right"))
        pick = min(pick, len(moves) - 1)
        site = moves[pick][0]
        rho = images[pick] / probs[pick]
        positions[t] = site
        densities[t] = rho
        if first is None and site == start:
            first = t
    return TrajectorySample(seed, positions, densities, first)


def _first_returns_chunk(coin: CoinPair, rho0: np.ndarray, horizon: int, count: int, seed_seq) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    L, R = coin.L, coin.R
    Lh, Rh = adjoint(L), adjoint(R)
    rho = np.broadcast_to(rho0, (count, 2, 2)).copy()
    pos = np.zeros(count, dtype=np.int64)
    first = np.zeros(count, dtype=np.int64)
    for t in range(1, horizon + 1):
        a = L @ rho @ Lh
        b = R @ rho @ Rh
        pl = np.einsum("nii->n", a).real
        pr = np.einsum("nii->n", b).real
        go_left = rng.random(count) * (pl + pr) < pl
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(
                go_left[:, None, None],
                a / np.where(pl > 0, pl, 1.0)[:, None, None],
                b / np.where(pr > 0, pr, 1.0)[:, None, None],
            )
        pos += np.where(go_left, -1, 1)
        hit = (pos == 0) & (first == 0)
        first[hit] = t
    return first


def first_return_times(
    coin: CoinPair,
    rho0,
    horizon: int,
    n_trajectories: int,
    seed: int = 0,
    chunk_size: int = 16384,
    threads: Optional[int] = None,
) -> np.ndarray:
    """First-return step of each sampled trajectory (0 = no return by horizon).

    Trajectories are split into fixed-size chunks seeded by
    ``SeedSequence(seed).spawn``; output does not depend on ``threads``.
    """
    rho0 = as_density(rho0)
    rho0 = rho0 / np.trace(rho0).real
    if threads is None:
        threads = int(os.environ.get("QWALK_THREADS", "1") or 1)
    sizes = [chunk_size] * (n_trajectories // chunk_size)
    if n_trajectories % chunk_size:
        sizes.append(n_trajectories % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(
            pool.map(
                lambda job: _first_returns_chunk(coin, rho0, horizon, job[0], job[1]),
                zip(sizes, seeds),
            )
        )
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
