"""Open walks on finite graphs: stationary states, first passage, Kac's identity.

A walk on k sites is given by matrices B(src -> dst) with
sum_dst B^* B = I for every source. The expected return time to x from the
density rho_x is the total trace of

    rho_st(j) = sum_{n>=1} S^n(j),

where S^n(j) collects all n-step paths from x to j that avoid x in between
(for j = x: paths that first return at step n). For a positive recurrent site
with a unique stationary state pi, rho_st = E_R * pi and E_R = 1 / tr(pi(x)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ColumnNotNormalized,
    KacNotApplicable,
    NonUnique,
    NotConverged,
    TailTooLarge,
    ValidationError,
)
from .matkernel import adjoint, as_matrix
from .walkmodel import CoinPair, as_density

NORMALIZATION_TOL = 1e-12
EIGEN_ONE_TOL = 1e-8
ACCESS_TOL = 1e-12


@dataclass(frozen=True)
class SiteWalkSpec:
    n_sites: int
    dim: int
    transitions: dict = field(repr=False)  # (src, dst) -> dim x dim matrix

    def outgoing(self, site: int):
        return [(dst, b) for (src, dst), b in self.transitions.items() if src == site]

    def channel_matrix(self) -> np.ndarray:
        """Matrix of the walk on block-diagonal states, row-major vec per site."""
        d2 = self.dim * self.dim
        big = np.zeros((self.n_sites * d2, self.n_sites * d2), dtype=complex)
        for (src, dst), b in self.transitions.items():
            big[dst * d2:(dst + 1) * d2, src * d2:(src + 1) * d2] += np.kron(b, b.conj())
        return big


def validate_site_walk(n_sites: int, dim: int, transitions: dict) -> SiteWalkSpec:
    if n_sites < 1 or dim < 1:
        raise ValidationError("a site walk needs at least one site and dim >= 1")
    clean = {}
    for (src, dst), b in transitions.items():
        if not (0 <= src < n_sites and 0 <= dst < n_sites):
            raise ValidationError(f"transition {src}->{dst} leaves the {n_sites} sites")
        b = as_matrix(b)
        if b.shape != (dim, dim):
            raise ValidationError(f"transition {src}->{dst} has shape {b.shape}")
        clean[(int(src), int(dst))] = b
    eye = np.eye(dim)
    for j in range(n_sites):
        total = np.zeros((dim, dim), dtype=complex)
        for (src, _), b in clean.items():
            if src == j:
                total += adjoint(b) @ b
        dev = float(np.max(np.abs(total - eye)))
        if dev >= NORMALIZATION_TOL:
            raise ColumnNotNormalized(j, dev)
    return SiteWalkSpec(n_sites, dim, clean)


def general_oqw_step(spec: SiteWalkSpec, blocks: np.ndarray) -> np.ndarray:
    out = np.zeros_like(blocks, dtype=complex)
    for (src, dst), b in spec.transitions.items():
        out[dst] += b @ blocks[src] @ adjoint(b)
    return out


# -- presets -----------------------------------------------------------------


def barrier_walk(p11: float, p22: Optional[float] = None, m: int = 60, variant: str = "retaining") -> SiteWalkSpec:
    """Two decoupled left-biased walks on {0, ..., m}.

    In the bulk, site i moves right with diag(sqrt p11, sqrt p22) and left with
    diag(sqrt q11, sqrt q22), q = 1 - p. Site m reflects with the identity.

    ``variant="retaining"`` (default): site 0 stays put with diag(sqrt q) and
    moves right with diag(sqrt p); stationary traces are alpha^j (1 - alpha)
    with alpha = p11 / q11.
    ``variant="literal"``: site 0 always moves to site 1 with the identity.
    """
    p22 = p11 if p22 is None else p22
    if not (0 <= p11 < 0.5 and 0 <= p22 < 0.5):
        raise ValidationError("the barrier walk needs p11, p22 < 1/2 (left bias)")
    if m < 2:
        raise ValidationError("truncation site must be >= 2")
    right = np.diag([np.sqrt(p11), np.sqrt(p22)]).astype(complex)
    left = np.diag([np.sqrt(1 - p11), np.sqrt(1 - p22)]).astype(complex)
    eye = np.eye(2, dtype=complex)
    t = {}
    if variant == "retaining":
        t[(0, 0)] = left
        t[(0, 1)] = right
    elif variant == "literal":
        t[(0, 1)] = eye
    else:
        raise ValidationError(f"unknown barrier variant {variant!r}")
    for i in range(1, m):
        t[(i, i - 1)] = left
        t[(i, i + 1)] = right
    t[(m, m - 1)] = eye
    return validate_site_walk(m + 1, 2, t)


def two_site_swap(dim: int = 1) -> SiteWalkSpec:
    eye = np.eye(dim, dtype=complex)
    return validate_site_walk(2, dim, {(0, 1): eye, (1, 0): eye})


def classical_walk(p: np.ndarray) -> SiteWalkSpec:
    """Scalar (dim 1) walk from a row-stochastic matrix P[src, dst]."""
    p = np.asarray(p, dtype=float)
    t = {
        (i, j): np.array([[np.sqrt(p[i, j])]], dtype=complex)
        for i in range(p.shape[0])
        for j in range(p.shape[1])
        if p[i, j] > 0
    }
    return validate_site_walk(p.shape[0], 1, t)


# -- stationary states -------------------------------------------------------


@dataclass(frozen=True)
class StationaryState:
    blocks: np.ndarray
    residual: float
    unique: bool
    multiplicity: int
    iterations: int

    def traces(self) -> np.ndarray:
        return np.einsum("nii->n", self.blocks).real


def eigenvalue_one_multiplicity(spec: SiteWalkSpec, seed: Optional[np.ndarray] = None) -> int:
    """Eigenvalues within 1e-8 of 1, globally or on the cyclic subspace of ``seed``.

    ``seed`` is a block array; its cyclic subspace span{v, Mv, M^2 v, ...} is
    invariant, so restricting the channel to it counts the stationary states
    reachable from that state's sector.
    """
    big = spec.channel_matrix()
    if seed is None:
        lam = np.linalg.eigvals(big)
    else:
        q = _krylov_basis(big, np.asarray(seed, dtype=complex).reshape(-1))
        lam = np.linalg.eigvals(adjoint(q) @ big @ q)
    return int(np.sum(np.abs(lam - 1.0) < EIGEN_ONE_TOL))


def _krylov_basis(a: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    basis = [v / np.linalg.norm(v)]
    for _ in range(a.shape[0]):
        w = a @ basis[-1]
        norm0 = np.linalg.norm(w)
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        nw = np.linalg.norm(w)
        if nw <= tol * max(norm0, 1.0):
            break
        basis.append(w / nw)
    return np.stack(basis, axis=1)


def stationary_state(
    spec: SiteWalkSpec,
    tol: float = 1e-12,
    max_iterations: int = 200_000,
    start: Optional[np.ndarray] = None,
    require_unique: bool = True,
) -> StationaryState:
    """Fixed point of the walk by lazy power iteration.

    Iterates x <- (x + Phi(x)) / 2 from the maximally mixed block state (or
    ``start``); the lazy map has the same fixed points but no eigenvalue -1,
    so periodic walks converge too. Uniqueness is judged on the cyclic
    subspace of ``start`` when given, otherwise on the whole channel.
    """
    d = spec.dim
    if start is None:
        x = np.broadcast_to(np.eye(d, dtype=complex) / (d * spec.n_sites), (spec.n_sites, d, d)).copy()
    else:
        x = np.asarray(start, dtype=complex).copy()
        x /= np.einsum("nii->", x).real
    big = spec.channel_matrix()
    shape = x.shape
    v = x.reshape(-1)
    residual = np.inf
    it = 0
    for it in range(1, max_iterations + 1):
        fv = big @ v
        residual = float(np.max(np.abs(fv - v)))
        v = 0.5 * (v + fv)
        if residual < tol:
            break
    x = v.reshape(shape)
    fx = general_oqw_step(spec, x)
    residual = float(np.max(np.abs(fx - x)))
    if residual >= max(tol, 1e-9):
        raise NotConverged(f"power iteration stopped at residual {residual:.3e}", residual)
    mult = eigenvalue_one_multiplicity(spec, start)
    if require_unique and mult != 1:
        raise NonUnique(f"eigenvalue 1 has multiplicity {mult}", mult)
    return StationaryState(x, residual, mult == 1, mult, it)


# -- first passage -----------------------------------------------------------


@dataclass(frozen=True)
class FirstPassageAccumulator:
    origin: int
    rho: np.ndarray
    horizon: int
    sums: np.ndarray  # (n_sites, d, d): sum_{n<=N} S^n(j)
    return_terms: np.ndarray  # first-return probability at each step
    tail_mass: float

    def traces(self) -> np.ndarray:
        return np.einsum("nii->n", self.sums).real

    @property
    def return_probability(self) -> float:
        return float(np.trace(self.sums[self.origin]).real)


def _require_finite(spec) -> None:
    if isinstance(spec, CoinPair):
        raise KacNotApplicable(
            "homogeneous walks on the integers have no invariant state; "
            "Kac analysis needs a finite SiteWalkSpec"
        )
    if not isinstance(spec, SiteWalkSpec):
        raise ValidationError("expected a SiteWalkSpec")


def first_passage_accumulate(spec: SiteWalkSpec, rho_x, x: int, horizon: int) -> FirstPassageAccumulator:
    """Taboo evolution from rho_x at x, absorbing mass on return to x."""
    _require_finite(spec)
    rho_x = as_density(rho_x) if spec.dim == 2 else as_matrix(rho_x)
    rho_x = rho_x / np.trace(rho_x).real
    blocks = np.zeros((spec.n_sites, spec.dim, spec.dim), dtype=complex)
    blocks[x] = rho_x
    sums = np.zeros_like(blocks)
    terms = np.zeros(horizon)
    big = spec.channel_matrix()
    shape = blocks.shape
    for n in range(1, horizon + 1):
        blocks = (big @ blocks.reshape(-1)).reshape(shape)
        sums += blocks
        terms[n - 1] = float(np.trace(blocks[x]).real)
        blocks[x] = 0.0
    tail = float(np.einsum("nii->", blocks).real)
    return FirstPassageAccumulator(x, rho_x, horizon, sums, terms, tail)


def expected_return_time(acc: FirstPassageAccumulator, tail_epsilon: float = 1e-9) -> float:
    if acc.tail_mass > tail_epsilon:
        raise TailTooLarge(
            f"un-returned mass {acc.tail_mass:.3e} after {acc.horizon} steps", acc.tail_mass
        )
    return float(acc.traces().sum())


@dataclass(frozen=True)
class KacReport:
    expected_return_time: float
    stationary_trace: float
    inverse_stationary_trace: float
    relative_gap: float
    tail_mass: float
    return_density_error: float  # max |rho_st(x) - rho_x|
    stationarity_error: float  # max |Phi(rho_st / E_R) - rho_st / E_R|
    sector_unique: bool
    global_multiplicity: int

    def to_json(self) -> dict:
        return {
            "E_R": self.expected_return_time,
            "tr_pi_x": self.stationary_trace,
            "inverse_tr_pi_x": self.inverse_stationary_trace,
            "gap": self.relative_gap,
            "tail_mass": self.tail_mass,
            "return_density_error": self.return_density_error,
            "stationarity_error": self.stationarity_error,
            "sector_unique": self.sector_unique,
            "global_multiplicity": self.global_multiplicity,
        }


def kac_identity_check(spec: SiteWalkSpec, rho_x, x: int, horizon: int, tail_epsilon: float = 1e-9) -> KacReport:
    """Compare E_R(rho_x) from first passage with 1 / tr(pi(x)).

    pi is the stationary state of the sector generated by rho_x at x; it must
    be unique there.
    """
    _require_finite(spec)
    acc = first_passage_accumulate(spec, rho_x, x, horizon)
    e_r = expected_return_time(acc, tail_epsilon)
    seed = np.zeros((spec.n_sites, spec.dim, spec.dim), dtype=complex)
    seed[x] = acc.rho
    pi = stationary_state(spec, start=seed, require_unique=True)
    tr_pi = float(np.trace(pi.blocks[x]).real)
    inv = 1.0 / tr_pi
    scaled = acc.sums / e_r
    return KacReport(
        expected_return_time=e_r,
        stationary_trace=tr_pi,
        inverse_stationary_trace=inv,
        relative_gap=abs(e_r - inv) / inv,
        tail_mass=acc.tail_mass,
        return_density_error=float(np.max(np.abs(acc.sums[x] - acc.rho))),
        stationarity_error=float(np.max(np.abs(general_oqw_step(spec, scaled) - scaled))),
        sector_unique=pi.unique,
        global_multiplicity=eigenvalue_one_multiplicity(spec),
    )


def accessible(spec: SiteWalkSpec, src: int, dst: int, max_steps: Optional[int] = None) -> bool:
    """dst reachable from src for every density at src (trace > 1e-12)."""
    d = spec.dim
    steps = max_steps or spec.n_sites
    for basis in np.eye(d, dtype=complex):
        blocks = np.zeros((spec.n_sites, d, d), dtype=complex)
        blocks[src] = np.outer(basis, basis.conj())
        reached = False
        for _ in range(steps):
            blocks = general_oqw_step(spec, blocks)
            if np.trace(blocks[dst]).real > ACCESS_TOL:
                reached = True
                break
        if not reached:
            return False
    return True


# -- JSON --------------------------------------------------------------------


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def site_walk_from_json(text_or_obj) -> SiteWalkSpec:
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    try:
        transitions = {
            (int(t["from"]), int(t["to"])): _matrix_from_json(t["matrix"])
            for t in obj["transitions"]
        }
        return validate_site_walk(int(obj["sites"]), int(obj["dim"]), transitions)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed site walk JSON: {exc}") from exc


def site_walk_to_json(spec: SiteWalkSpec) -> dict:
    return {
        "sites": spec.n_sites,
        "dim": spec.dim,
        "transitions": [
            {"from": s, "to": d, "matrix": _matrix_to_json(b)}
            for (s, d), b in sorted(spec.transitions.items())
        ],
    }
