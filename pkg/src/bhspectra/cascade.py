"""Monte Carlo evaporation cascades with exact probability bookkeeping.

A cascade repeatedly draws one emission from the per-step distribution
obtained by unit-sum-normalizing the entropy-difference weights over all
currently open channels, until the hole reaches the stop mass (or fully
evaporates when stop_mass = 0). Both numbers are carried for every step and
never conflated:

    step_log_weight     raw entropy difference S(after) - S(before)
    step_log_prob       the same weight normalized over that step's channels

Raw weights telescope: their sum along any chain equals
S(final) - S(initial) no matter the path, which is the load-bearing
conservation identity everything downstream checks.

Quantization: energy (and optional charge / angular momentum) moves are
integer multiples of user-set quanta. All bookkeeping runs on integer
remaining-quantum counts, and every intermediate state's hairs are derived
directly from the initial state plus those integers, so masses never drift
however long the chain is, and conservation is exact at the quantum level.
Use binary-representable quanta (0.25, 0.0625, ...) when bitwise float
conservation matters as well.

Randomness: each sample owns a generator derived by mixing (seed,
sample_index), so ensembles are reproducible and order-independent under
parallel execution. The batch sampler used for very large energy-only
ensembles draws from one (seed, n_samples)-deterministic stream instead;
both are exact samplers of the same per-step distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .blackholes import (
    BlackHoleState,
    Emission,
    _entropy_ld,
    entropy_grid,
    hairs_valid,
)
from .errors import UsageError


class SamplingScheme(str, Enum):
    UNIT_SUM_PER_STEP = "unitsum-per-step"


class Termination(str, Enum):
    EXHAUSTED = "exhausted"    # fully evaporated (stop_mass = 0 reached)
    STOP_MASS = "stop-mass"    # reached a positive stop mass, or stuck at a floor
    MAX_STEPS = "max-steps"


@dataclass(frozen=True)
class CascadePolicy:
    """Discretization and stopping rules for a cascade.

    stop_mass must be > 0 whenever the state carries alpha != 0: the
    log-corrected entropy diverges as the horizon area goes to zero, so a
    corrected cascade needs a floor. Setting charge_quantum / spin_quantum
    opens charge / angular-momentum channels.
    """

    energy_quantum: float
    stop_mass: float = 0.0
    max_steps: int | None = None
    charge_quantum: float | None = None
    spin_quantum: float | None = None
    sampling: SamplingScheme = SamplingScheme.UNIT_SUM_PER_STEP

    def __post_init__(self) -> None:
        if not (math.isfinite(self.energy_quantum) and self.energy_quantum > 0.0):
            raise UsageError("energy_quantum must be a positive finite number")
        if not (math.isfinite(self.stop_mass) and self.stop_mass >= 0.0):
            raise UsageError("stop_mass must be >= 0")
        if self.max_steps is not None and self.max_steps < 1:
            raise UsageError("max_steps must be >= 1 when given")
        for name in ("charge_quantum", "spin_quantum"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v != 0.0):
                raise UsageError(f"{name} must be a nonzero finite number when given")

    @property
    def energy_only(self) -> bool:
        return self.charge_quantum is None and self.spin_quantum is None

    def to_record(self) -> dict:
        return {
            "energy_quantum": self.energy_quantum,
            "stop_mass": self.stop_mass,
            "max_steps": self.max_steps,
            "charge_quantum": self.charge_quantum,
            "spin_quantum": self.spin_quantum,
            "sampling": self.sampling.value,
        }


@dataclass(frozen=True)
class CascadeStep:
    emission: Emission
    state_after: BlackHoleState
    log_weight: float   # raw entropy difference for this step
    log_prob: float     # unit-sum-normalized over the step's open channels


@dataclass(frozen=True)
class EmissionChain:
    """Ordered cascade of emissions with per-step probability bookkeeping."""

    initial: BlackHoleState
    steps: tuple[CascadeStep, ...]
    terminated: Termination
    stuck: bool = False

    @property
    def final_state(self) -> BlackHoleState:
        return self.steps[-1].state_after if self.steps else self.initial

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def is_complete(self) -> bool:
        return self.terminated is not Termination.MAX_STEPS and not self.stuck

    def total_emission(self) -> Emission:
        total = Emission(0.0)
        for step in self.steps:
            total = total + step.emission
        return total


def chain_log_probability(chain: EmissionChain) -> tuple[float, float]:
    """(raw, normalized) chain log-probability: sums of the per-step values."""
    raw = sum(step.log_weight for step in chain.steps)
    norm = sum(step.log_prob for step in chain.steps)
    return float(raw), float(norm)


def _count_quanta(value: float, quantum: float, what: str) -> int:
    ratio = value / quantum
    k = round(ratio)
    if abs(ratio - k) > 1e-9 * max(1.0, abs(ratio)):
        raise UsageError(f"{what} ({value}) is not an integer multiple of the quantum {quantum}")
    return int(k)


@dataclass(frozen=True)
class _Plan:
    """Integer ledger of a cascade: total quanta of each conserved hair."""

    n_quanta: int
    n_charge: int   # signed
    n_spin: int     # signed
    max_steps: int


def _plan(state: BlackHoleState, policy: CascadePolicy) -> _Plan:
    if state.alpha != 0.0 and policy.stop_mass <= 0.0:
        raise UsageError("alpha != 0 requires stop_mass > 0 (entropy diverges at zero area)")
    if policy.stop_mass > state.m:
        raise UsageError("stop_mass exceeds the initial mass")
    n = _count_quanta(state.m - policy.stop_mass, policy.energy_quantum, "M - stop_mass")
    nq = _count_quanta(state.q, policy.charge_quantum, "Q") if policy.charge_quantum else 0
    nj = _count_quanta(state.j, policy.spin_quantum, "J") if policy.spin_quantum else 0
    max_steps = policy.max_steps if policy.max_steps is not None else max(n, 1)
    if max_steps < n:
        raise UsageError(f"max_steps={max_steps} < {n} = (M - stop_mass)/energy_quantum")
    return _Plan(n, nq, nj, max_steps)


def _hairs_at(state, policy, plan, r, cq_left, cj_left):
    """Canonical hairs at integer remaining counts, anchored at the initial
    state (single product each, so no cumulative drift along a chain). The
    endpoints are pinned exactly: r = 0 is the stop mass, a fully shed charge
    or spin is exactly zero. A disabled channel leaves its hair untouched."""
    m = policy.stop_mass if r == 0 else state.m - (plan.n_quanta - r) * policy.energy_quantum
    if policy.charge_quantum is None:
        q = state.q
    else:
        q = 0.0 if cq_left == 0 else state.q - (plan.n_charge - cq_left) * policy.charge_quantum
    if policy.spin_quantum is None:
        j = state.j
    else:
        j = 0.0 if cj_left == 0 else state.j - (plan.n_spin - cj_left) * policy.spin_quantum
    return m, q, j


def _logsumexp(a: np.ndarray) -> float:
    hi = float(np.max(a))
    return hi + float(np.log(np.sum(np.exp(a - hi))))


def _sign_range(left: int) -> np.ndarray:
    """Move counts 0..|left| carrying the sign of the remaining quanta."""
    return np.arange(0, abs(left) + 1) * (1 if left >= 0 else -1)


def _step_channels(state, policy, plan, r: int, cq_left: int, cj_left: int):
    """Open emission channels with r energy quanta (and cq_left / cj_left
    charge / spin quanta) remaining.

    Returns the candidate remaining-count arrays (r2, cq2, cj2), the raw
    log-weights, and the step's log-sum-exp total, all filtered to channels
    whose remnant is a valid macro-state. Empty arrays mean the cascade is
    stuck.
    """
    ks = np.arange(1, r + 1)
    if cq_left == 0 and cj_left == 0:
        r2 = r - ks
        cq2 = np.zeros(r, dtype=np.int64)
        cj2 = np.zeros(r, dtype=np.int64)
    else:
        mq = _sign_range(cq_left)
        mj = _sign_range(cj_left)
        k, cq, cj = (x.ravel() for x in np.meshgrid(ks, mq, mj, indexing="ij"))
        r2, cq2, cj2 = r - k, cq_left - cq, cj_left - cj
    eps = policy.energy_quantum
    m2 = np.where(r2 == 0, policy.stop_mass, state.m - (plan.n_quanta - r2) * eps)
    if policy.charge_quantum is None:
        q2 = np.full(r2.shape, state.q)
    else:
        q2 = np.where(cq2 == 0, 0.0, state.q - (plan.n_charge - cq2) * policy.charge_quantum)
    if policy.spin_quantum is None:
        j2 = np.full(r2.shape, state.j)
    else:
        j2 = np.where(cj2 == 0, 0.0, state.j - (plan.n_spin - cj2) * policy.spin_quantum)
    ok = hairs_valid(state.family, m2, q2, j2, state.alpha)
    if not ok.all():
        r2, cq2, cj2, m2, q2, j2 = (x[ok] for x in (r2, cq2, cj2, m2, q2, j2))
    if r2.size == 0:
        return r2, cq2, cj2, m2, q2, j2, np.empty(0), float("nan")
    m1, q1, j1 = _hairs_at(state, policy, plan, r, cq_left, cj_left)
    s1 = _entropy_ld(state.family, m1, q1, j1, state.alpha)
    logw = np.asarray(entropy_grid(state.family, m2, q2, j2, state.alpha) - s1, dtype=np.float64)
    return r2, cq2, cj2, m2, q2, j2, logw, _logsumexp(logw)


def sample_cascade(
    state: BlackHoleState, policy: CascadePolicy, seed: int, sample_index: int = 0
) -> EmissionChain:
    """Sample one complete evaporation chain.

    Deterministic for fixed (seed, sample_index); the per-sample generator is
    derived by mixing the two, so ensembles can fan out across workers.
    """
    if sample_index < 0 or seed < 0:
        raise UsageError("seed and sample_index must be non-negative")
    plan = _plan(state, policy)
    rng = np.random.default_rng(np.random.SeedSequence((seed, sample_index)))
    steps: list[CascadeStep] = []
    current = state
    r, cql, cjl = plan.n_quanta, plan.n_charge, plan.n_spin
    stuck = False
    while r > 0:
        if len(steps) >= plan.max_steps:
            return EmissionChain(state, tuple(steps), Termination.MAX_STEPS)
        r2, cq2, cj2, m2, q2, j2, logw, log_z = _step_channels(state, policy, plan, r, cql, cjl)
        if r2.size == 0:
            stuck = True
            break
        cum = np.cumsum(np.exp(logw - log_z))
        cum[-1] = 1.0
        pick = min(int(np.searchsorted(cum, rng.random(), side="right")), r2.size - 1)
        after = BlackHoleState(
            state.family, float(m2[pick]), float(q2[pick]), float(j2[pick]), state.alpha
        )
        emission = Emission(
            current.m - after.m, current.q - after.q, current.j - after.j
        )
        steps.append(CascadeStep(emission, after, float(logw[pick]), float(logw[pick] - log_z)))
        current = after
        r, cql, cjl = int(r2[pick]), int(cq2[pick]), int(cj2[pick])
    if stuck:
        terminated = Termination.STOP_MASS
    else:
        terminated = Termination.EXHAUSTED if policy.stop_mass == 0.0 else Termination.STOP_MASS
    return EmissionChain(state, tuple(steps), terminated, stuck)


def chain_identity(chain: EmissionChain, policy: CascadePolicy) -> tuple:
    """Hashable chain identity: the per-step integer moves."""
    ident = []
    for step in chain.steps:
        k = round(step.emission.omega / policy.energy_quantum)
        cq = round(step.emission.q / policy.charge_quantum) if policy.charge_quantum else 0
        cj = round(step.emission.j / policy.spin_quantum) if policy.spin_quantum else 0
        ident.append((k, cq, cj) if not policy.energy_only else k)
    return tuple(ident)


# ---------------------------------------------------------------------------
# Exhaustive enumeration (brute-force oracle)
# ---------------------------------------------------------------------------


def enumerate_chains(
    state: BlackHoleState, policy: CascadePolicy
) -> list[tuple[EmissionChain, float, float]]:
    """Enumerate every energy-only chain with its (raw, normalized) log-prob.

    Exhaustive over ordered compositions of the quantum count n, so it is
    capped at n <= 20 (2^(n-1) chains for a fully open channel set). Charge
    and spin moves are not enumerated.
    """
    if not policy.energy_only:
        raise UsageError("enumeration covers energy-only cascades")
    plan = _plan(state, policy)
    n = plan.n_quanta
    if n > 20:
        raise UsageError(f"enumeration capped at 20 quanta, got {n}")
    if n == 0:
        return [(EmissionChain(state, (), _terminal(policy)), 0.0, 0.0)]

    # Channel data only depends on the remaining quantum count.
    table: dict[int, tuple] = {}

    def channels(r: int):
        if r not in table:
            out = _step_channels(state, policy, plan, r, 0, 0)
            table[r] = (out[0], out[3], out[6], out[7])  # r2, m2, logw, log_z
        return table[r]

    results: list[tuple[EmissionChain, float, float]] = []

    def walk(current: BlackHoleState, r: int, steps: list[CascadeStep], raw: float, norm: float):
        if r == 0:
            results.append((EmissionChain(state, tuple(steps), _terminal(policy)), raw, norm))
            return
        r2, m2, logw, log_z = channels(r)
        for i in range(r2.size):
            after = BlackHoleState(state.family, float(m2[i]), current.q, current.j, state.alpha)
            emission = Emission(current.m - after.m)
            step = CascadeStep(emission, after, float(logw[i]), float(logw[i] - log_z))
            steps.append(step)
            walk(after, int(r2[i]), steps, raw + step.log_weight, norm + step.log_prob)
            steps.pop()

    walk(state, n, [], 0.0, 0.0)
    return results


def _terminal(policy: CascadePolicy) -> Termination:
    return Termination.EXHAUSTED if policy.stop_mass == 0.0 else Termination.STOP_MASS


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CascadeEnsembleStats:
    """Summary of a sampled cascade ensemble."""

    n_samples: int
    seed: int
    method: str
    lengths: np.ndarray
    first_emission_counts: dict[int, int]
    identity_counts: dict[tuple, int] | None
    identity_entropy: float | None
    mean_raw_log_prob: float
    mean_norm_log_prob: float
    n_stuck: int
    terminated_counts: dict[str, int]

    def length_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.lengths, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def to_json_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "method": self.method,
            "mean_length": float(np.mean(self.lengths)) if self.lengths.size else 0.0,
            "length_counts": {str(k): v for k, v in sorted(self.length_counts().items())},
            "first_emission_counts": {
                str(k): v for k, v in sorted(self.first_emission_counts.items())
            },
            "identity_entropy": self.identity_entropy,
            "n_distinct_identities": (
                len(self.identity_counts) if self.identity_counts is not None else None
            ),
            "mean_raw_log_prob": self.mean_raw_log_prob,
            "mean_norm_log_prob": self.mean_norm_log_prob,
            "n_stuck": self.n_stuck,
            "terminated_counts": dict(sorted(self.terminated_counts.items())),
        }


def _batch_energy_sample(state: BlackHoleState, policy: CascadePolicy, n_samples: int, seed: int):
    """Vectorized energy-only sampler. One stream, deterministic per
    (seed, n_samples); identical per-step distributions to sample_cascade."""
    plan = _plan(state, policy)
    n = plan.n_quanta
    cums: dict[int, np.ndarray] = {}
    logws: dict[int, np.ndarray] = {}
    logzs: dict[int, float] = {}
    kmaps: dict[int, np.ndarray] = {}
    for r in range(n, 0, -1):
        r2, _, _, _, _, _, logw, log_z = _step_channels(state, policy, plan, r, 0, 0)
        if r2.size == 0:
            cums[r] = np.empty(0)
        else:
            c = np.cumsum(np.exp(logw - log_z))
            c[-1] = 1.0
            cums[r] = c
        kmaps[r] = r - r2  # quanta carried by each channel
        logws[r] = logw
        logzs[r] = log_z

    rng = np.random.default_rng(np.random.SeedSequence((seed, n_samples)))
    remaining = np.full(n_samples, n, dtype=np.int64)
    stuck = np.zeros(n_samples, dtype=bool)
    lengths = np.zeros(n_samples, dtype=np.int64)
    first_k = np.zeros(n_samples, dtype=np.int64)
    raw_tot = np.zeros(n_samples)
    norm_tot = np.zeros(n_samples)
    codes = np.zeros(n_samples, dtype=np.int64)  # base-(n+1) encoded identity
    for _ in range(n):
        active = (remaining > 0) & ~stuck
        if not active.any():
            break
        for r in np.unique(remaining[active]):
            r = int(r)
            mask = active & (remaining == r)
            idx = np.nonzero(mask)[0]
            if cums[r].size == 0:
                stuck[idx] = True
                continue
            u = rng.random(idx.size)
            pick = np.minimum(np.searchsorted(cums[r], u, side="right"), cums[r].size - 1)
            k = kmaps[r][pick]
            raw_tot[idx] += logws[r][pick]
            norm_tot[idx] += logws[r][pick] - logzs[r]
            first_k[idx] = np.where(lengths[idx] == 0, k, first_k[idx])
            codes[idx] = codes[idx] * (n + 1) + k
            lengths[idx] += 1
            remaining[idx] -= k
    return remaining, stuck, lengths, first_k, raw_tot, norm_tot, codes


def _decode_identity(code: int, length: int, n: int) -> tuple:
    ks = []
    for _ in range(length):
        ks.append(int(code % (n + 1)))
        code //= n + 1
    return tuple(reversed(ks))


def cascade_ensemble_stats(
    state: BlackHoleState,
    policy: CascadePolicy,
    n_samples: int,
    seed: int,
    method: str = "auto",
) -> CascadeEnsembleStats:
    """Sample an ensemble of cascades and summarize it.

    method "per-sample" draws each chain from its own (seed, index) stream;
    "batch" uses the vectorized energy-only sampler (required for very large
    ensembles); "auto" picks batch for energy-only ensembles >= 10^4 samples.
    """
    if n_samples < 1:
        raise UsageError("n_samples must be >= 1")
    if method == "auto":
        method = "batch" if (policy.energy_only and n_samples >= 10_000) else "per-sample"
    if method == "batch" and not policy.energy_only:
        raise UsageError("batch sampling covers energy-only cascades")

    plan = _plan(state, policy)
    n = plan.n_quanta
    small = n <= 20

    if method == "batch":
        remaining, stuck, lengths, first_k, raw_tot, norm_tot, codes = _batch_energy_sample(
            state, policy, n_samples, seed
        )
        first_counts: dict[int, int] = {}
        for k, c in zip(*np.unique(first_k[lengths > 0], return_counts=True)):
            first_counts[int(k)] = int(c)
        identity_counts = None
        if small:
            identity_counts = {}
            for code, length, c in zip(*_grouped_codes(codes[~stuck], lengths[~stuck])):
                identity_counts[_decode_identity(int(code), int(length), n)] = int(c)
        n_stuck = int(np.count_nonzero(stuck))
        term_counts = {_terminal(policy).value: int(np.count_nonzero(~stuck))}
        if n_stuck:
            term_counts[Termination.STOP_MASS.value] = (
                term_counts.get(Termination.STOP_MASS.value, 0) + n_stuck
            )
    else:
        chains = (sample_cascade(state, policy, seed, i) for i in range(n_samples))
        return ensemble_stats_from_chains(chains, policy, n_samples, seed, method="per-sample")

    identity_entropy = None
    if identity_counts:
        freqs = np.array(list(identity_counts.values()), dtype=np.float64) / n_samples
        identity_entropy = float(-np.sum(freqs * np.log(freqs)))
    return CascadeEnsembleStats(
        n_samples=n_samples,
        seed=seed,
        method=method,
        lengths=lengths,
        first_emission_counts=first_counts,
        identity_counts=identity_counts,
        identity_entropy=identity_entropy,
        mean_raw_log_prob=float(np.mean(raw_tot)),
        mean_norm_log_prob=float(np.mean(norm_tot)),
        n_stuck=n_stuck,
        terminated_counts=term_counts,
    )


def ensemble_stats_from_chains(
    chains,
    policy: CascadePolicy,
    n_samples: int,
    seed: int,
    method: str = "per-sample",
) -> CascadeEnsembleStats:
    """Aggregate an iterable of already-sampled chains into ensemble stats."""
    first_counts: dict[int, int] = {}
    identity_counts: dict[tuple, int] | None = {}
    lengths = np.zeros(n_samples, dtype=np.int64)
    raw_tot = np.zeros(n_samples)
    norm_tot = np.zeros(n_samples)
    n_stuck = 0
    term_counts: dict[str, int] = {}
    n_quanta = None
    for i, chain in enumerate(chains):
        if n_quanta is None:
            n_quanta = _plan(chain.initial, policy).n_quanta
            if n_quanta > 20:
                identity_counts = None  # identity census only at small n
        lengths[i] = chain.n_steps
        raw_tot[i], norm_tot[i] = chain_log_probability(chain)
        if chain.steps:
            k0 = round(chain.steps[0].emission.omega / policy.energy_quantum)
            first_counts[k0] = first_counts.get(k0, 0) + 1
        if identity_counts is not None and not chain.stuck:
            ident = chain_identity(chain, policy)
            identity_counts[ident] = identity_counts.get(ident, 0) + 1
        n_stuck += int(chain.stuck)
        term_counts[chain.terminated.value] = term_counts.get(chain.terminated.value, 0) + 1
    identity_entropy = None
    if identity_counts:
        freqs = np.array(list(identity_counts.values()), dtype=np.float64) / n_samples
        identity_entropy = float(-np.sum(freqs * np.log(freqs)))
    return CascadeEnsembleStats(
        n_samples=n_samples,
        seed=seed,
        method=method,
        lengths=lengths,
        first_emission_counts=first_counts,
        identity_counts=identity_counts,
        identity_entropy=identity_entropy,
        mean_raw_log_prob=float(np.mean(raw_tot)),
        mean_norm_log_prob=float(np.mean(norm_tot)),
        n_stuck=n_stuck,
        terminated_counts=term_counts,
    )


def _grouped_codes(codes: np.ndarray, lengths: np.ndarray):
    """Unique (code, length) pairs with counts."""
    pairs = np.stack([codes, lengths], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    return uniq[:, 0], uniq[:, 1], counts
