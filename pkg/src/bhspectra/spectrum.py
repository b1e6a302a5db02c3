"""Non-thermal radiation spectra from black-hole entropy differences.

The emission log-weight is the single expression

    log w(e) = S(M - omega, Q - q, J - j) - S(M, Q, J)

with S the (optionally log-corrected) horizon entropy. For alpha != 0 this
one difference automatically reproduces both the exponential factor and the
(R'/R)^(2 alpha) prefactor of the corrected spectrum, because the alpha*ln
term collapses the prefactor into the entropy difference.

Everything is kept in log-space: e^(-8 pi omega M) underflows already for
modest masses, so weights are stored and combined in nats and exponentiated
only at output. Grid evaluation is vectorized and chunked, and unit-sum
normalization goes through a stable log-sum-exp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .blackholes import (
    BlackHoleState,
    Emission,
    Family,
    _entropy_ld,
    _remnant_hairs,
    apply_emission,
    bh_entropy,
    entropy_drop_uncharged,
    entropy_grid,
    hairs_valid,
    hawking_temperature,
)
from .errors import DomainError, RemnantInvalid, UsageError
from .grids import GridSpec, Normalization, SpectrumGrid
from .typicality import EntropyFunction, MacroState

_CHUNK = 1 << 20
_PI_LD = np.longdouble(np.pi)


_4PI_LD = np.longdouble(4.0) * np.longdouble(np.pi)


def emission_log_weight(state: BlackHoleState, e: Emission) -> float:
    """log weight of one emission: corrected-entropy difference in nats.

    The remnant hairs are formed in extended precision: dS/dM ~ 8 pi M would
    otherwise amplify the float64 rounding of M - omega far above the
    accuracy the entropy difference itself carries.
    """
    q2f, j2f = _remnant_hairs(state, e)[1:]  # validity gate
    ml = np.longdouble(state.m)
    m2 = ml - np.longdouble(e.omega)
    if q2f == 0.0 and j2f == 0.0 and state.q == 0.0 and state.j == 0.0 and state.alpha == 0.0:
        # Uncharged, uncorrected: S' - S = 4 pi (m'^2 - m^2), fused.
        return float(_4PI_LD * (m2 * m2 - ml * ml))
    q2 = np.longdouble(state.q) - np.longdouble(e.q)
    j2 = np.longdouble(state.j) - np.longdouble(e.j)
    s2 = _entropy_ld(state.family, m2, q2, j2, state.alpha)
    if not np.isfinite(s2):
        raise RemnantInvalid("remnant entropy undefined (zero horizon area with alpha != 0)")
    s1 = _entropy_ld(state.family, state.m, state.q, state.j, state.alpha)
    return float(s2 - s1)


def emission_log_weights(
    state: BlackHoleState, omega, q=0.0, j=0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized emission log-weights over arrays of emission hairs.

    Returns (log_weight, valid); closed channels have valid False and
    log_weight nan. Bit-consistent with the scalar emission_log_weight.
    """
    omega = np.asarray(omega, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    omega, q, j = np.broadcast_arrays(omega, q, j)
    m2 = state.m - omega
    q2 = state.q - q
    j2 = state.j - j
    valid = hairs_valid(state.family, m2, q2, j2, state.alpha) & (omega >= 0.0)
    if (
        state.alpha == 0.0
        and state.q == 0.0
        and state.j == 0.0
        and not (q.any() or j.any())
    ):
        logw = np.where(valid, entropy_drop_uncharged(state.m, omega), np.nan)
        return logw, valid
    s1 = _entropy_ld(state.family, state.m, state.q, state.j, state.alpha)
    logw = np.full(omega.shape, np.nan)
    flat_m2, flat_q2, flat_j2 = m2.ravel(), q2.ravel(), j2.ravel()
    flat_valid = valid.ravel()
    flat_logw = logw.ravel()
    for start in range(0, flat_m2.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        s2 = entropy_grid(state.family, flat_m2[sl], flat_q2[sl], flat_j2[sl], state.alpha)
        chunk = np.asarray(s2 - s1, dtype=np.float64)
        chunk[~flat_valid[sl]] = np.nan
        flat_logw[sl] = chunk
    return logw, valid


def emission_log_weights_bulk(
    family: Family, m, q, j, alpha: float, omega, q_e=0.0, j_e=0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Emission log-weights vectorized over *both* state and emission hairs.

    Elementwise equivalent of emission_log_weight over parallel arrays of
    states (m, q, j) sharing one family and alpha, for ensemble-scale scans.
    Entries with an invalid state or a closed channel come back nan/False.
    """
    m = np.asarray(m, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    q_e = np.asarray(q_e, dtype=np.float64)
    j_e = np.asarray(j_e, dtype=np.float64)
    m, q, j, omega, q_e, j_e = np.broadcast_arrays(m, q, j, omega, q_e, j_e)
    m2 = m - omega
    q2 = q - q_e
    j2 = j - j_e
    valid = (
        hairs_valid(family, m, q, j, alpha)
        & hairs_valid(family, m2, q2, j2, alpha)
        & (omega >= 0.0)
    )
    if alpha == 0.0 and not (q.any() or j.any() or q_e.any() or j_e.any()):
        logw = np.where(valid, entropy_drop_uncharged(m, omega), np.nan)
        return logw, valid
    logw = np.full(m.shape, np.nan)
    flat = [x.ravel() for x in (m, q, j, m2, q2, j2)]
    flat_valid = valid.ravel()
    flat_logw = logw.ravel()
    for start in range(0, flat[0].size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        s1 = entropy_grid(family, flat[0][sl], flat[1][sl], flat[2][sl], alpha)
        s2 = entropy_grid(family, flat[3][sl], flat[4][sl], flat[5][sl], alpha)
        chunk = np.asarray(s2 - s1, dtype=np.float64)
        chunk[~flat_valid[sl]] = np.nan
        flat_logw[sl] = chunk
    return logw, valid


def thermal_log_weight(state: BlackHoleState, omega: float) -> float:
    """Boltzmann baseline -omega / T_H; -8 pi M omega for Schwarzschild."""
    if omega < 0.0:
        raise DomainError("emitted energy must be non-negative")
    if state.q == 0.0 and state.j == 0.0:
        if state.m == 0.0:
            raise DomainError("extremal state has zero temperature")
        return float(-8.0 * _PI_LD * np.longdouble(state.m) * np.longdouble(omega))
    return float(-np.longdouble(omega) / np.longdouble(hawking_temperature(state)))


def _grid_axes(state: BlackHoleState, spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if spec.n_q > 1 and state.family is Family.SCHWARZSCHILD:
        raise UsageError("charge axis requires a charged family")
    if spec.n_j > 1 and state.family is not Family.KERR_NEWMAN:
        raise UsageError("angular-momentum axis requires Kerr-Newman")
    if spec.omega_max > state.m:
        raise UsageError(f"omega_max={spec.omega_max} exceeds the hole mass {state.m}")
    w = spec.omega_nodes()
    qv = spec.q_values()
    jv = spec.j_values()
    omega = np.repeat(w, spec.n_q * spec.n_j)
    q = np.tile(np.repeat(qv, spec.n_j), spec.n_omega)
    j = np.tile(jv, spec.n_omega * spec.n_q)
    return omega, q, j


def _normalize(logw: np.ndarray, valid: np.ndarray, normalization: Normalization):
    if normalization is Normalization.RAW:
        return logw, None
    log_norm = float(logsumexp(logw[valid]))
    out = logw.copy()
    out[valid] -= log_norm
    return out, log_norm


def build_spectrum(
    state: BlackHoleState,
    spec: GridSpec,
    normalization: Normalization = Normalization.RAW,
) -> SpectrumGrid:
    """Evaluate the emission spectrum on a rectangular grid.

    Bins whose emission leaves no valid remnant are flagged invalid (the grid
    stays rectangular). Raises DomainError when every bin is invalid.
    """
    omega, q, j = _grid_axes(state, spec)
    logw, valid = emission_log_weights(state, omega, q, j)
    if not valid.any():
        raise DomainError("every grid bin is a closed emission channel")
    logw, log_norm = _normalize(logw, valid, normalization)
    return SpectrumGrid(
        omega=omega,
        q=q,
        j=j,
        log_weight=logw,
        valid=valid,
        normalization=normalization,
        source_state=state,
        grid_spec=spec,
        log_norm=log_norm,
    )


def build_thermal_spectrum(
    state: BlackHoleState,
    spec: GridSpec,
    normalization: Normalization = Normalization.RAW,
) -> SpectrumGrid:
    """Boltzmann-baseline spectrum -omega/T_H on the same grid layout.

    The baseline has no remnant bookkeeping, so every bin is valid; it exists
    to quantify how far the entropy-difference spectrum departs from thermal.
    """
    omega, q, j = _grid_axes(state, spec)
    if state.q == 0.0 and state.j == 0.0:
        if state.m == 0.0:
            raise DomainError("extremal state has zero temperature")
        logw = np.asarray(
            -8.0 * _PI_LD * np.longdouble(state.m) * omega.astype(np.longdouble),
            dtype=np.float64,
        )
    else:
        temp = hawking_temperature(state)
        logw = np.asarray(-omega.astype(np.longdouble) / np.longdouble(temp), dtype=np.float64)
    valid = np.ones(omega.shape, dtype=bool)
    logw, log_norm = _normalize(logw, valid, normalization)
    return SpectrumGrid(
        omega=omega,
        q=q,
        j=j,
        log_weight=logw,
        valid=valid,
        normalization=normalization,
        source_state=state,
        grid_spec=spec,
        log_norm=log_norm,
    )


@dataclass(frozen=True)
class SpectrumComparison:
    """Deviation metrics between two spectra on the same grid (nats).

    kl_divergence is None unless both spectra carry unit-sum weights.
    Metrics are computed over the bins valid in both spectra.
    """

    kl_divergence: float | None
    max_abs_log_ratio: float
    mean_abs_log_ratio: float
    n_common: int


def compare_thermal(nonthermal: SpectrumGrid, thermal: SpectrumGrid) -> SpectrumComparison:
    """KL(nonthermal || thermal) and log-ratio extremes over common bins."""
    if nonthermal.grid_spec != thermal.grid_spec or nonthermal.grid_spec is None:
        raise UsageError("spectra must share an identical grid_spec")
    common = nonthermal.valid & thermal.valid
    if not common.any():
        raise UsageError("no bins are valid in both spectra")
    dlog = nonthermal.log_weight[common] - thermal.log_weight[common]
    kl = None
    if (
        nonthermal.normalization is Normalization.UNIT_SUM
        and thermal.normalization is Normalization.UNIT_SUM
    ):
        with np.errstate(under="ignore"):
            p = np.exp(nonthermal.log_weight[common])
        kl = float(np.sum(np.where(p > 0.0, p * dlog, 0.0)))
    return SpectrumComparison(
        kl_divergence=kl,
        max_abs_log_ratio=float(np.max(np.abs(dlog))),
        mean_abs_log_ratio=float(np.mean(np.abs(dlog))),
        n_common=int(np.count_nonzero(common)),
    )


def entropy_function_for(state: BlackHoleState) -> EntropyFunction:
    """Bridge a black hole into the generic spectrum-from-entropy layer.

    MacroState maps (energy, charge, spin) -> hairs (M, Q, J) at the state's
    family and alpha.
    """

    def to_state(ms: MacroState) -> BlackHoleState:
        return BlackHoleState(state.family, ms.energy, ms.charge, ms.spin, state.alpha)

    def evaluate(ms: MacroState) -> float:
        return bh_entropy(to_state(ms))

    def valid(ms: MacroState) -> bool:
        return bool(
            hairs_valid(state.family, ms.energy, ms.charge, ms.spin, state.alpha).item()
        )

    return EntropyFunction(evaluate=evaluate, valid=valid)


__all__ = [
    "SpectrumComparison",
    "apply_emission",
    "build_spectrum",
    "build_thermal_spectrum",
    "compare_thermal",
    "emission_log_weight",
    "emission_log_weights",
    "entropy_function_for",
    "thermal_log_weight",
]
