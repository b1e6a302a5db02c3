"""Canonical-typicality lab: random pure universe states, partial traces,
microcanonical weights, and the generic entropy-difference spectrum builder.

The universe U = B (system) + O (environment) lives on the energy shell
E_b + E_o = E_U. A random pure state on the shell has i.i.d. complex standard
normal coefficients, globally normalized. Tracing out O then concentrates the
reduced state of B onto the microcanonical weights

    w(b)  proportional to  Omega_O(E_U - E_b) * g_b

and the fluctuations around that limit are what the tests measure. The
conventional unnormalized coefficients (mean |C|^2 = 1) are recoverable by
scaling the stored unit-norm coefficients with sqrt(dim_U).

Sampling works with explicit integer degeneracies so that huge environment
state counts cost nothing where only weights are needed; the full-coefficient
path is capped at a configurable total dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .blackholes import Emission
from .errors import DomainError, UsageError
from .grids import Normalization, SpectrumGrid

DEFAULT_DIM_CAP = 1 << 16


@dataclass(frozen=True)
class EnergyLedger:
    """Degeneracy bookkeeping for the universe energy shell.

    levels_b lists (E_b, g_b) for the system; levels_o maps environment
    energies E_O to state counts Omega_O(E_O). Every system level must have a
    sector entry at E_U - E_b (possibly 0, meaning that sector is empty).
    Energies are matched exactly, so use exactly-representable values.
    """

    levels_b: tuple[tuple[float, int], ...]
    levels_o: dict[float, int]
    e_u: float

    def __post_init__(self) -> None:
        if not self.levels_b:
            raise DomainError("ledger needs at least one system level")
        object.__setattr__(self, "levels_b", tuple((float(e), int(g)) for e, g in self.levels_b))
        for e_b, g in self.levels_b:
            if g < 1:
                raise DomainError(f"system degeneracy must be >= 1, got {g} at E_b={e_b}")
            if e_b > self.e_u:
                raise DomainError(f"E_U={self.e_u} must be >= every E_b, got E_b={e_b}")
            if (self.e_u - e_b) not in self.levels_o:
                raise DomainError(f"no environment sector at E_O = E_U - E_b = {self.e_u - e_b}")
        for e_o, n in self.levels_o.items():
            if n < 0:
                raise DomainError(f"environment state count must be >= 0, got {n} at E_O={e_o}")

    def sector_sizes(self) -> tuple[int, ...]:
        """Omega_O(E_U - E_b) per system level, in levels_b order."""
        return tuple(int(self.levels_o[self.e_u - e_b]) for e_b, _ in self.levels_b)

    @property
    def n_levels(self) -> int:
        return len(self.levels_b)

    @property
    def dim_b(self) -> int:
        return sum(g for _, g in self.levels_b)

    @property
    def dim_u(self) -> int:
        return sum(g * n for (_, g), n in zip(self.levels_b, self.sector_sizes()))


@dataclass(frozen=True, eq=False)
class PureStateSample:
    """Random pure universe state on the shell, globally normalized.

    coefficients[i] has shape (g_b, Omega_O(E_U - E_b)) for level i.
    raw_mean_sq records the pre-normalization mean |C|^2 (its concentration
    around 1 is itself a typicality measurement).
    """

    coefficients: tuple[np.ndarray, ...]
    ledger: EnergyLedger
    seed: int
    raw_mean_sq: float

    def __post_init__(self) -> None:
        total = sum(float(np.sum(np.abs(block) ** 2)) for block in self.coefficients)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"sample is not normalized: sum |c|^2 = {total}")


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    """Reduced density matrix of the system after tracing out the environment."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.dim, self.dim):
            raise DomainError("reduced density matrix shape mismatch")
        tr = float(np.trace(self.matrix).real)
        if abs(tr - 1.0) > 1e-10:
            raise DomainError(f"reduced density trace {tr} != 1")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-12, rtol=0.0):
            raise DomainError("reduced density matrix is not Hermitian")


def sample_universe_state(
    ledger: EnergyLedger, seed: int, max_dim: int = DEFAULT_DIM_CAP
) -> PureStateSample:
    """Draw a random pure universe state: i.i.d. complex standard normal
    coefficients over the shell basis, then one global normalization.

    Deterministic for fixed (ledger, seed).
    """
    if seed < 0:
        raise UsageError("seed must be a non-negative integer")
    dim_u = ledger.dim_u
    if dim_u == 0:
        raise DomainError("ledger has an empty shell: all sectors have zero states")
    if dim_u > max_dim:
        raise UsageError(f"full-coefficient path capped at dim_U <= {max_dim}, got {dim_u}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    raw = (rng.standard_normal(dim_u) + 1j * rng.standard_normal(dim_u)) / math.sqrt(2.0)
    raw_mean_sq = float(np.mean(np.abs(raw) ** 2))
    raw /= np.linalg.norm(raw)
    blocks = []
    offset = 0
    for (_, g), n in zip(ledger.levels_b, ledger.sector_sizes()):
        blocks.append(raw[offset : offset + g * n].reshape(g, n))
        offset += g * n
    return PureStateSample(tuple(blocks), ledger, int(seed), raw_mean_sq)


def reduce_to_system(sample: PureStateSample) -> ReducedDensity:
    """Exact partial trace over the environment; the full system matrix is
    retained, including the off-diagonal blocks the typicality tests bound.

    Levels at different energies occupy orthogonal environment sectors, so
    their cross blocks vanish identically; fluctuating off-diagonals live
    inside degenerate levels.
    """
    dim = sample.ledger.dim_b
    rho = np.zeros((dim, dim), dtype=np.complex128)
    offset = 0
    for block in sample.coefficients:
        g = block.shape[0]
        rho[offset : offset + g, offset : offset + g] = block @ block.conj().T
        offset += g
    return ReducedDensity(rho, dim)


def microcanonical_weights(ledger: EnergyLedger) -> np.ndarray:
    """Shell weights per system level: w(b) = Omega_O(E_U - E_b) g_b / total."""
    counts = [g * n for (_, g), n in zip(ledger.levels_b, ledger.sector_sizes())]
    total = sum(counts)
    if total == 0:
        raise DomainError("all microcanonical weights are zero (empty shell)")
    return np.array([c / total for c in counts], dtype=np.float64)


def level_diagonal(ledger: EnergyLedger, rho: ReducedDensity) -> np.ndarray:
    """Diagonal of rho aggregated per system level (sums degenerate copies)."""
    diag = np.real(np.diag(rho.matrix))
    out = np.empty(ledger.n_levels)
    offset = 0
    for i, (_, g) in enumerate(ledger.levels_b):
        out[i] = float(np.sum(diag[offset : offset + g]))
        offset += g
    return out


def offdiagonal_rms(rho: ReducedDensity) -> float:
    """Root-mean-square magnitude of the off-diagonal entries."""
    d = rho.dim
    if d < 2:
        return 0.0
    mask = ~np.eye(d, dtype=bool)
    return float(np.sqrt(np.mean(np.abs(rho.matrix[mask]) ** 2)))


# ---------------------------------------------------------------------------
# Generic spectrum-from-entropy construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MacroState:
    """Minimal macro-state record: energy plus optional conserved charges."""

    energy: float
    charge: float = 0.0
    spin: float = 0.0

    def __sub__(self, other: "MacroState") -> "MacroState":
        return MacroState(
            self.energy - other.energy, self.charge - other.charge, self.spin - other.spin
        )


@dataclass(frozen=True)
class EntropyFunction:
    """Abstract entropy evaluator with a declared validity domain.

    evaluate must be deterministic (same input, bit-identical output); valid
    says whether a macro-state lies in the evaluator's domain.
    """

    evaluate: Callable[[MacroState], float]
    valid: Callable[[MacroState], bool] = field(default=lambda _: True)


def spectrum_from_entropy(
    fn: EntropyFunction, total: MacroState, deltas: Sequence[MacroState]
) -> SpectrumGrid:
    """Weights exp[S(total - r) - S(total)] for each subtracted macro-delta r.

    Log-weights only; no normalization at this layer. Deltas whose remainder
    leaves the validity domain come back as flagged-invalid bins, never
    silently dropped.
    """
    if not deltas:
        raise UsageError("spectrum_from_entropy needs at least one grid point")
    if not fn.valid(total):
        raise DomainError("total macro-state lies outside the entropy function's domain")
    s0 = fn.evaluate(total)
    n = len(deltas)
    omega = np.empty(n)
    q = np.empty(n)
    j = np.empty(n)
    logw = np.full(n, np.nan)
    valid = np.zeros(n, dtype=bool)
    for i, delta in enumerate(deltas):
        omega[i], q[i], j[i] = delta.energy, delta.charge, delta.spin
        rest = total - delta
        if fn.valid(rest):
            valid[i] = True
            logw[i] = fn.evaluate(rest) - s0
    if not valid.any():
        raise DomainError("every grid point leaves the entropy function's domain")
    return SpectrumGrid(
        omega=omega,
        q=q,
        j=j,
        log_weight=logw,
        valid=valid,
        normalization=Normalization.RAW,
        source_state=total,
        grid_spec=None,
        log_norm=None,
    )


def emission_delta(e: Emission) -> MacroState:
    """View an emission as a subtractable macro-delta."""
    return MacroState(e.omega, e.q, e.j)


# ---------------------------------------------------------------------------
# Standard typicality lab configuration
# ---------------------------------------------------------------------------


def lab_ledger(dim_b: int, dim_o: int) -> EnergyLedger:
    """Standard lab shell with dim_b system basis states.

    System levels are degenerate pairs (so off-diagonals of rho_B fluctuate
    instead of vanishing identically), with an extra singlet when dim_b is
    odd. Environment sector sizes halve per level, dim_o, dim_o/2, ..., which
    makes the microcanonical weights nontrivial. dim_o must be divisible by
    2^(levels - 1).
    """
    if dim_b < 1:
        raise DomainError("dim_b must be >= 1")
    gs = [2] * (dim_b // 2) + ([1] if dim_b % 2 else [])
    n_levels = len(gs)
    if dim_o < 1 or (n_levels > 1 and dim_o % (1 << (n_levels - 1)) != 0):
        raise UsageError(f"dim_o must be a positive multiple of 2^{n_levels - 1}")
    levels_b = tuple((float(i), g) for i, g in enumerate(gs))
    levels_o = {float(n_levels - i): dim_o >> i for i in range(n_levels)}
    return EnergyLedger(levels_b, levels_o, float(n_levels))


@dataclass(frozen=True)
class TypicalityLabReport:
    """Seed-averaged measurements of the typicality lab."""

    dim_b: int
    dim_o: int
    scale_factor: int
    n_seeds: int
    seed: int
    mean_l1_weights: float
    mean_l1_weights_scaled: float
    offdiag_rms: float
    offdiag_rms_scaled: float
    rms_ratio: float
    mean_raw_sq: float

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def typicality_lab(
    dim_b: int,
    dim_o: int,
    n_seeds: int = 100,
    seed: int = 0,
    scale_factor: int = 4,
) -> TypicalityLabReport:
    """Measure diag-weight convergence and off-diagonal decay on the lab shell.

    Runs n_seeds samples at dim_o and at scale_factor * dim_o; reports the
    seed-averaged L1 distance of the per-level diagonal from the
    microcanonical weights and the off-diagonal RMS at both sizes.
    """
    if n_seeds < 1:
        raise UsageError("n_seeds must be >= 1")

    def run(dim_o_run: int) -> tuple[float, float, float]:
        ledger = lab_ledger(dim_b, dim_o_run)
        weights = microcanonical_weights(ledger)
        l1 = np.empty(n_seeds)
        rms = np.empty(n_seeds)
        raw = np.empty(n_seeds)
        for i in range(n_seeds):
            s = int(np.random.SeedSequence((seed, i)).generate_state(1, np.uint64)[0])
            sample = sample_universe_state(ledger, s, max_dim=max(DEFAULT_DIM_CAP, 8 * dim_o_run))
            rho = reduce_to_system(sample)
            l1[i] = float(np.sum(np.abs(level_diagonal(ledger, rho) - weights)))
            rms[i] = offdiagonal_rms(rho)
            raw[i] = sample.raw_mean_sq
        return float(np.mean(l1)), float(np.mean(rms)), float(np.mean(raw))

    l1_base, rms_base, raw_base = run(dim_o)
    l1_scaled, rms_scaled, _ = run(scale_factor * dim_o)
    return TypicalityLabReport(
        dim_b=dim_b,
        dim_o=dim_o,
        scale_factor=scale_factor,
        n_seeds=n_seeds,
        seed=seed,
        mean_l1_weights=l1_base,
        mean_l1_weights_scaled=l1_scaled,
        offdiag_rms=rms_base,
        offdiag_rms_scaled=rms_scaled,
        rms_ratio=rms_scaled / rms_base if rms_base > 0 else float("nan"),
        mean_raw_sq=raw_base,
    )
