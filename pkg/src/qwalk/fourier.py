"""Momentum-space analysis of nearest neighbour open walks.

With rho_hat(k) = sum_x exp(-ikx) rho_x, one step acts on rho_hat(k) through
the 4x4 symbol ``exp(ik)[L] + exp(-ik)[R]`` where ``[B] = B (x) conj(B)``.
Return probabilities are averages of ``tr(unvec(symbol(k)^n vec(rho0)))``
over a uniform grid; the integrand is a trigonometric polynomial of degree n,
so the periodic trapezoid rule is exact once the grid has more than n nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .errors import EigenConvergenceError, InsufficientData, NodesTooFew, ValidationError
from .matkernel import conjugation_matrix, eigenvalues_4x4, vec
from .walkmodel import CoinPair, as_density, sec7

SLOPE_THRESHOLD = -1.0 + 0.05


def grid(m: int) -> np.ndarray:
    """m uniform nodes on (-pi, pi]; k = 0 is a node when m is even."""
    if m < 1:
        raise ValidationError("grid needs at least one node")
    return -np.pi + 2.0 * np.pi * np.arange(1, m + 1) / m


def symbol(coin: CoinPair, k):
    """exp(ik)[L] + exp(-ik)[R]; vectorized over an array of k."""
    cl = conjugation_matrix(coin.L)
    cr = conjugation_matrix(coin.R)
    k = np.asarray(k, dtype=float)
    e = np.exp(1j * k)[..., None, None]
    return e * cl + np.conj(e) * cr


def _check_nodes(n: int, m: int) -> None:
    if n < 0:
        raise ValidationError("n must be non-negative")
    if m <= n:
        raise NodesTooFew(f"{m} nodes alias a degree-{n} integrand; need more than {n}")


def p0_by_quadrature(coin: CoinPair, rho0, n: int, m: Optional[int] = None) -> float:
    """Return probability at step n from the symbol's matrix powers."""
    m = n + 2 if m is None else m
    _check_nodes(n, m)
    rho0 = as_density(rho0)
    sym = symbol(coin, grid(m))
    v = np.broadcast_to(vec(rho0), (m, 4)).copy()
    for _ in range(n):
        v = np.einsum("mij,mj->mi", sym, v)
    # trace of a row-major 2x2 vec is entries 0 and 3
    return float(np.mean(v[:, 0] + v[:, 3]).real)


def konno_dual_p0(coin: CoinPair, rho0, n: int, m: Optional[int] = None) -> float:
    """Same probability through the adjoint symbol iterated on the identity.

    Y_0 = I and Y_{j+1}(k) = exp(ik) L^* Y_j L + exp(-ik) R^* Y_j R.
    """
    m = n + 2 if m is None else m
    _check_nodes(n, m)
    rho0 = as_density(rho0)
    k = grid(m)
    e = np.exp(1j * k)[:, None, None]
    L, R = coin.L, coin.R
    Lh, Rh = L.conj().T, R.conj().T
    y = np.broadcast_to(np.eye(2, dtype=complex), (m, 2, 2)).copy()
    for _ in range(n):
        y = e * (Lh @ y @ L) + np.conj(e) * (Rh @ y @ R)
    return float(np.mean(np.einsum("ij,mji->m", rho0, y)).real)


@dataclass(frozen=True)
class SpectralData:
    k: np.ndarray
    branches: np.ndarray  # (len(k), 4), matched by nearest continuation

    @property
    def spectral_radius(self) -> np.ndarray:
        return np.abs(self.branches).max(axis=1)

    def rows(self) -> list[dict]:
        out = []
        for i, kk in enumerate(self.k):
            row = {"k": float(kk)}
            for j in range(4):
                row[f"re_lambda_{j + 1}"] = float(self.branches[i, j].real)
            for j in range(4):
                row[f"im_lambda_{j + 1}"] = float(self.branches[i, j].imag)
            out.append(row)
        return out


_PERMS = [list(p) for p in permutations(range(4))]


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    best = min(_PERMS, key=lambda p: float(np.sum(np.abs(cur[p] - prev))))
    return cur[best]


def spectral_curves(coin: CoinPair, grid_size: int = 512) -> SpectralData:
    k = grid(grid_size)
    sym = symbol(coin, k)
    out = np.empty((grid_size, 4), dtype=complex)
    for i in range(grid_size):
        try:
            lam = eigenvalues_4x4(sym[i])
        except EigenConvergenceError as exc:
            raise EigenConvergenceError(f"at k = {k[i]:.6f}: {exc}") from exc
        if i == 0:
            lam = lam[np.lexsort((lam.imag, -lam.real))]
        else:
            lam = _match(out[i - 1], lam)
        out[i] = lam
    return SpectralData(k, out)


# -- closed forms for the sec7 pair -------------------------------------------


def sec7_xi(k):
    u = np.cos(np.asarray(k, dtype=float))
    return np.cbrt(2.0 * u + np.sqrt(4.0 * u * u + 1.0))


def sec7_lambda1(k):
    """Leading eigenvalue branch of the sec7 symbol: s(s^2 + 5) / 6, s = xi - 1/xi."""
    xi = sec7_xi(k)
    s = xi - 1.0 / xi
    return s * (s * s + 5.0) / 6.0


def sec7_other_eigenvalues(k):
    """The remaining three closed-form branches (lambda_0, lambda_2, lambda_3)."""
    k = np.asarray(k, dtype=float)
    xi = sec7_xi(k)
    base = 2.0 * np.cos(k) / 3.0
    lam2 = base + ((-1 + 1j * np.sqrt(3.0)) * xi + (1 + 1j * np.sqrt(3.0)) / xi) / 6.0
    return base, lam2, np.conj(lam2)


def sec7_alpha_integral(n: int, m: int = 4096) -> float:
    """Trapezoid rule for the integral of lambda_1(k)^n over [-pi/2, pi/2]."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    k = np.linspace(-np.pi / 2, np.pi / 2, m + 1)
    f = sec7_lambda1(k) ** n
    h = np.pi / m
    return float(h * (f.sum() - 0.5 * (f[0] + f[-1])))


def sec7_return_ratio(n2: int, m: int = 8192) -> float:
    """p0(n2) from lattice evolution over the alpha integral, for even n2."""
    from .monitored import unmonitored_p0_series
    from .walkmodel import E11

    if n2 % 2:
        raise ValidationError("the ratio is taken at even times")
    p0 = unmonitored_p0_series(sec7(), E11, n2).term(n2)
    return p0 / sec7_alpha_integral(n2, m)


def power_comparison_rows(grid_size: int = 512, power: int = 100) -> list[dict]:
    k = grid(grid_size)
    lam = sec7_lambda1(k)
    c = np.cos(k)
    return [
        {
            "k": float(k[i]),
            "lambda1": float(lam[i]),
            "cos_k": float(c[i]),
            "lambda1_pow": float(lam[i] ** power),
            "cos_pow": float(c[i] ** power),
        }
        for i in range(grid_size)
    ]


# -- divergence heuristic ----------------------------------------------------


def divergence_diagnostic(even_terms, window: Optional[int] = None):
    """Log-log slope of p0(2n) against n over the trailing window.

    A slope of at least -0.95 hints that sum p0(n) diverges. This is
    evidence, never a verdict.
    """
    t = np.asarray(even_terms, dtype=float)
    n = np.arange(1, len(t) + 1)
    mask = t > 0
    if mask.sum() < 20:
        raise InsufficientData("need at least 20 nonzero even-step terms")
    n, t = n[mask], t[mask]
    if window is None:
        window = max(20, len(t) // 2)
    n, t = n[-window:], t[-window:]
    slope = float(np.polyfit(np.log(n), np.log(t), 1)[0])
    return slope, slope >= SLOPE_THRESHOLD


def power_gram_sum(coin: CoinPair, n: int) -> np.ndarray:
    """L^*^n L^n + R^*^n R^n; for sec7 this is ((n^2 + 2) / 3^n) I."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    ln = np.linalg.matrix_power(coin.L, n)
    rn = np.linalg.matrix_power(coin.R, n)
    return ln.conj().T @ ln + rn.conj().T @ rn
