"""Monitored (taboo) evolution and unmonitored return series.

Monitored return is computed by evolving the full lattice state and, after
every step, recording and then deleting whatever sits at the origin. The
surviving state is exactly the sum over paths that have not yet returned, so
N steps cost O(N^2) block operations instead of an exponential path sum.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import InsufficientData, TermOutOfRange, ValidationError
from .firstreturn import FirstReturnTable, ReturnSeries
from .walkmodel import (
    CoinPair,
    as_density,
    push_amplitudes,
    push_blocks,
    require_walk_unitary,
)


def _unit_spinor(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(2)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"spinor must have unit norm, got {norm}")
    return psi


def _density(rho) -> np.ndarray:
    rho = as_density(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValidationError("initial density must have unit trace")
    return rho


def uqw_monitored_series(coin: CoinPair, psi, horizon: int) -> ReturnSeries:
    """term(n) = ||a_n psi||^2 with the origin projected out between steps.

    The walk is translation invariant, so the origin is taken to be site 0.
    """
    require_walk_unitary(coin)
    amps = _unit_spinor(psi)[None, :].copy()
    terms = np.zeros(horizon)
    survival = np.zeros(horizon)
    for n in range(1, horizon + 1):
        amps = push_amplitudes(amps, coin.L, coin.R)
        # site 0 sits at index n after n steps
        terms[n - 1] = float(np.vdot(amps[n], amps[n]).real)
        amps[n] = 0.0
        survival[n - 1] = float(np.sum(np.abs(amps) ** 2))
    return ReturnSeries("uqw-monitored", terms, survival)


def oqw_monitored_series(coin: CoinPair, rho, horizon: int, keep_arrivals: bool = False) -> ReturnSeries:
    """term(n) = trace arriving at an absorbing origin at step n."""
    blocks = _density(rho)[None, :, :].copy()
    terms = np.zeros(horizon)
    survival = np.zeros(horizon)
    arrivals = np.zeros((horizon, 2, 2), dtype=complex) if keep_arrivals else None
    for n in range(1, horizon + 1):
        blocks = push_blocks(blocks, coin.L, coin.R)
        arrived = blocks[n]
        terms[n - 1] = float(np.trace(arrived).real)
        if arrivals is not None:
            arrivals[n - 1] = arrived
        blocks[n] = 0.0
        survival[n - 1] = float(np.einsum("nii->", blocks).real)
    return ReturnSeries("oqw-monitored", terms, survival, arrivals)


def unmonitored_p0_series(coin: CoinPair, state, horizon: int, walk: str = "oqw") -> ReturnSeries:
    """Probability at the origin at each step of the free evolution."""
    terms = np.zeros(horizon)
    if walk == "oqw":
        blocks = _density(state)[None, :, :].copy()
        for n in range(1, horizon + 1):
            blocks = push_blocks(blocks, coin.L, coin.R)
            terms[n - 1] = float(np.trace(blocks[n]).real)
    elif walk == "uqw":
        require_walk_unitary(coin)
        amps = _unit_spinor(state)[None, :].copy()
        for n in range(1, horizon + 1):
            amps = push_amplitudes(amps, coin.L, coin.R)
            terms[n - 1] = float(np.vdot(amps[n], amps[n]).real)
    else:
        raise ValidationError(f"walk must be 'oqw' or 'uqw', got {walk!r}")
    return ReturnSeries("unmonitored-p0", np.clip(terms, 0.0, None))


def even_terms(series: ReturnSeries) -> np.ndarray:
    """Terms at steps 2, 4, 6, ..."""
    return series.terms[1::2]


def polya_number(series: ReturnSeries, horizon: Optional[int] = None):
    """Partial Polya number 1 - prod_{n<=N}(1 - p0(n)) and a divergence hint.

    The hint is ``None`` when the series is too short for the slope test.
    """
    from .fourier import divergence_diagnostic

    if series.kind != "unmonitored-p0":
        raise ValidationError("Polya numbers are defined for unmonitored series")
    terms = series.terms if horizon is None else series.terms[:horizon]
    if terms.size and (terms.min() < 0.0 or terms.max() > 1.0):
        raise TermOutOfRange("p0(n) outside [0, 1]")
    partial = float(1.0 - np.prod(1.0 - terms))
    try:
        _, hint = divergence_diagnostic(terms[1::2])
    except InsufficientData:
        hint = None
    return partial, hint


def monitored_table(coin: CoinPair, state, max_steps: int) -> FirstReturnTable:
    """First-return table at even steps up to ``max_steps`` via taboo evolution."""
    k_max = max_steps // 2
    spinor = np.asarray(state).shape == (2,)
    oqw = even_terms(oqw_monitored_series(coin, state, 2 * k_max))
    uqw = None
    if spinor and coin.walk_unitary:
        uqw = even_terms(uqw_monitored_series(coin, state, 2 * k_max))
    return FirstReturnTable(np.arange(2, 2 * k_max + 1, 2), oqw, uqw)


def series_rows(series: ReturnSeries) -> list[dict]:
    cum = series.cumulative
    surv = series.survival
    return [
        {
            "n": int(n),
            "term": float(series.terms[n - 1]),
            "cumulative": float(cum[n - 1]),
            "survival": None if surv is None else float(surv[n - 1]),
        }
        for n in series.steps
    ]


def series_summary(series: ReturnSeries) -> dict:
    from .fourier import divergence_diagnostic

    out = {
        "kind": series.kind,
        "N": series.horizon,
        "cumulative": float(series.cumulative[-1]) if series.horizon else 0.0,
        "polya_partial": None,
        "slope": None,
    }
    if series.kind == "unmonitored-p0":
        out["polya_partial"] = float(series.polya_partial[-1]) if series.horizon else 0.0
    try:
        out["slope"], _ = divergence_diagnostic(series.terms[1::2])
    except InsufficientData:
        pass
    return out
