"""Entropy and correlation functionals for radiation spectra and cascades.

All functionals work on log-weights and use the 0 * ln 0 = 0 convention.
Entropy-like quantities need probability semantics, so they require unit-sum
spectra; the literal raw-weighted sum is still reported as a diagnostic
column where it differs.

The two-emission joint distribution is built by sequential conditioning,

    joint(w1, w2)  proportional to  p(w1 | M) * p(w2 | M - w1),

the only construction consistent with the factorization identity
p(w1 + w2 | M) = p(w1 | M) p(w2 | M - w1) that the entropy-difference
weights satisfy exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .blackholes import BlackHoleState, Emission, Family, bh_entropy, entropy_grid
from .cascade import EmissionChain
from .errors import DomainError, UsageError
from .grids import GridSpec, Normalization, SpectrumGrid
from .spectrum import emission_log_weight, emission_log_weights

_8PI = 8.0 * np.pi


def radiation_entropy(spectrum: SpectrumGrid) -> float:
    """Shannon entropy -sum p ln p of a unit-sum spectrum's valid bins."""
    if spectrum.normalization is not Normalization.UNIT_SUM:
        raise UsageError("radiation entropy needs a unit-sum spectrum")
    logp = spectrum.log_weight[spectrum.valid]
    with np.errstate(under="ignore"):
        p = np.exp(logp)
    return float(-np.sum(np.where(p > 0.0, p * logp, 0.0)))


@dataclass(frozen=True)
class ConditionalEntropyResult:
    """Remnant conditional entropy under a radiation distribution (nats)."""

    exact: float            # sum_r p(r) S(remnant(r))
    lowenergy: float        # S evaluated at the mean remnant hairs
    raw_weighted: float     # literal raw-weight sum, diagnostic only
    e_r: float              # mean radiated energy <omega>
    mean_q: float
    mean_j: float
    excluded_mass: float    # probability excluded for undefined remnant entropy
    excluded_warning: bool


def conditional_entropy(
    state: BlackHoleState, spectrum: SpectrumGrid
) -> ConditionalEntropyResult:
    """Average remnant entropy over the spectrum, exact and low-energy forms.

    exact weights each remnant's entropy by the bin probability; lowenergy
    evaluates the entropy once at the mean remnant hairs
    (M - <omega>, Q - <q>, J - <j>). Bins whose remnant entropy is undefined
    are excluded and their probability mass reported.
    """
    if spectrum.normalization is not Normalization.UNIT_SUM:
        raise UsageError("conditional entropy needs a unit-sum spectrum")
    if spectrum.source_state is not None and spectrum.source_state != state:
        raise UsageError("spectrum was built from a different state")
    v = spectrum.valid
    logp = spectrum.log_weight[v]
    with np.errstate(under="ignore"):
        p = np.exp(logp)
    m2 = state.m - spectrum.omega[v]
    q2 = state.q - spectrum.q[v]
    j2 = state.j - spectrum.j[v]
    s_rem = np.asarray(entropy_grid(state.family, m2, q2, j2, state.alpha), dtype=np.float64)
    defined = np.isfinite(s_rem)
    excluded = float(np.sum(p[~defined]))
    exact = float(np.sum(p[defined] * s_rem[defined]))
    e_r = float(np.sum(p * spectrum.omega[v]))
    mean_q = float(np.sum(p * spectrum.q[v]))
    mean_j = float(np.sum(p * spectrum.j[v]))
    lowenergy = bh_entropy(state.with_hairs(state.m - e_r, state.q - mean_q, state.j - mean_j))
    log_norm = spectrum.log_norm if spectrum.log_norm is not None else 0.0
    with np.errstate(under="ignore"):
        raw = np.exp(logp + log_norm)
    raw_weighted = float(np.sum(raw[defined] * s_rem[defined]))
    return ConditionalEntropyResult(
        exact=exact,
        lowenergy=lowenergy,
        raw_weighted=raw_weighted,
        e_r=e_r,
        mean_q=mean_q,
        mean_j=mean_j,
        excluded_mass=excluded,
        excluded_warning=excluded > 1e-6,
    )


def pairwise_correlation(state: BlackHoleState, e1: Emission, e2: Emission) -> float:
    """Correlation log p(e1+e2) - log p(e1) - log p(e2) between two emissions.

    Positive for the entropy-difference weights of any concave-area family:
    the second emission is more likely once the first happened. For an
    uncorrected Schwarzschild hole the closed form is 8 pi w1 w2.
    """
    return (
        emission_log_weight(state, e1 + e2)
        - emission_log_weight(state, e1)
        - emission_log_weight(state, e2)
    )


@dataclass(frozen=True, eq=False)
class JointEmissionDistribution:
    """Sequentially conditioned two-emission distribution on an energy grid."""

    omega: np.ndarray         # shared axis nodes
    joint: np.ndarray         # q[i, j], zero where the pair is closed
    valid: np.ndarray         # bool mask of open pairs

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.joint.sum(axis=1), self.joint.sum(axis=0)


def sequential_joint(
    log_weight: Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]],
    mass: float,
    omegas: np.ndarray,
) -> JointEmissionDistribution:
    """Build joint(w1, w2) ∝ p(w1 | mass) p(w2 | mass - w1) on a node grid.

    log_weight(m, w_array) must return (log-weights, validity mask); closed
    pairs get zero joint probability.
    """
    n = omegas.size
    logq = np.full((n, n), -np.inf)
    lw1, v1 = log_weight(mass, omegas)
    for i in range(n):
        if not v1[i]:
            continue
        lw2, v2 = log_weight(mass - omegas[i], omegas)
        row = lw1[i] + lw2
        row[~v2] = -np.inf
        logq[i] = row
    valid = np.isfinite(logq)
    if not valid.any():
        raise DomainError("every emission pair is a closed channel")
    log_z = logsumexp(logq[valid])
    with np.errstate(under="ignore"):
        joint = np.where(valid, np.exp(logq - log_z), 0.0)
    return JointEmissionDistribution(omega=omegas, joint=joint, valid=valid)


@dataclass(frozen=True)
class MutualInformationResult:
    """Mutual information of two sequential emissions, three ways (nats).

    mi_numeric is the definition sum q ln[q/(q1 q2)] under the sequential
    joint; mi_paper_form is 8 pi <w1><w2> with means from the joint's
    marginals; mi_moment_form is 8 pi <w1 w2>. The difference
    moment - paper = 8 pi Cov(w1, w2) is reported, not adjudicated.
    """

    mi_numeric: float
    mi_paper_form: float
    mi_moment_form: float
    mean_w1: float
    mean_w2: float
    covariance: float


def mutual_information(state: BlackHoleState, spec: GridSpec) -> MutualInformationResult:
    """Mutual information between two emissions of a Schwarzschild hole."""
    if state.family is not Family.SCHWARZSCHILD:
        raise UsageError("the closed forms require a Schwarzschild state")
    if spec.n_omega < 2:
        raise UsageError("mutual information needs at least 2 bins per axis")

    def lw(mass: float, w: np.ndarray):
        probe = state.with_hairs(mass, 0.0, 0.0)
        return emission_log_weights(probe, w)

    dist = sequential_joint(lw, state.m, spec.omega_nodes())
    return _mi_from_joint(dist)


def _mi_from_joint(dist: JointEmissionDistribution) -> MutualInformationResult:
    q = dist.joint
    q1, q2 = dist.marginals()
    support = q > 0.0
    outer = np.outer(q1, q2)
    mi = float(np.sum(q[support] * (np.log(q[support]) - np.log(outer[support]))))
    w = dist.omega
    mean1 = float(np.sum(q1 * w))
    mean2 = float(np.sum(q2 * w))
    moment = float(np.sum(q * np.outer(w, w)))
    return MutualInformationResult(
        mi_numeric=mi,
        mi_paper_form=_8PI * mean1 * mean2,
        mi_moment_form=_8PI * moment,
        mean_w1=mean1,
        mean_w2=mean2,
        covariance=moment - mean1 * mean2,
    )


@dataclass(frozen=True, eq=False)
class ChainInformationLedger:
    """Per-emission self-information bookkeeping along a complete cascade.

    The total self-information equals the entropy drop S(initial) - S(final)
    exactly (telescoping), which is the checkable statement that no
    information is lost in a complete evaporation. correlation_with_prior[i]
    is the correlation of emission i with the aggregate of all earlier ones.
    """

    self_information: np.ndarray
    correlation_with_prior: np.ndarray
    total_self_information: float
    entropy_drop: float
    residual: float
    initial_entropy: float
    final_entropy: float

    def to_json_dict(self) -> dict:
        return {
            "self_information": [float(x) for x in self.self_information],
            "correlation_with_prior": [float(x) for x in self.correlation_with_prior],
            "total_self_information": self.total_self_information,
            "entropy_drop": self.entropy_drop,
            "residual": self.residual,
            "initial_entropy": self.initial_entropy,
            "final_entropy": self.final_entropy,
        }


def chain_information_ledger(chain: EmissionChain) -> ChainInformationLedger:
    """Audit a complete chain: per-step self-information and correlations."""
    if not chain.is_complete:
        raise UsageError("information ledger needs a complete chain")
    self_info = np.array([-step.log_weight for step in chain.steps])
    corr = np.zeros(len(chain.steps))
    prior = Emission(0.0)
    for i, step in enumerate(chain.steps):
        if i > 0:
            corr[i] = pairwise_correlation(chain.initial, prior, step.emission)
        prior = prior + step.emission
    s_init = bh_entropy(chain.initial)
    s_final = bh_entropy(chain.final_state)
    total = float(np.sum(self_info))
    return ChainInformationLedger(
        self_information=self_info,
        correlation_with_prior=corr,
        total_self_information=total,
        entropy_drop=s_init - s_final,
        residual=total - (s_init - s_final),
        initial_entropy=s_init,
        final_entropy=s_final,
    )


@dataclass(frozen=True)
class InfoReport:
    """One-stop information summary of a state over an emission grid."""

    s_r: float
    s_cond: float
    s_cond_lowenergy: float
    s_cond_raw_weighted: float
    e_r: float
    e_bprime: float
    correlation_mean: float
    correlation_max: float
    mi_numeric: float | None
    mi_paper_form: float | None
    mi_moment_form: float | None
    excluded_mass: float
    excluded_warning: bool

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def build_info_report(
    state: BlackHoleState, spec: GridSpec, max_corr_nodes: int = 128
) -> InfoReport:
    """Radiation entropy, conditional entropies, pairwise-correlation summary,
    and (for Schwarzschild) the three mutual-information forms.

    The correlation summary runs over energy-only emission pairs on the omega
    axis (subsampled to at most max_corr_nodes nodes); pairs whose combined
    emission is a closed channel are skipped.
    """
    from .spectrum import build_spectrum  # local import to avoid a cycle at module load

    spectrum = build_spectrum(state, spec, Normalization.UNIT_SUM)
    s_r = radiation_entropy(spectrum)
    cond = conditional_entropy(state, spectrum)

    nodes = spec.omega_nodes()
    if nodes.size > max_corr_nodes:
        nodes = nodes[:: max(1, nodes.size // max_corr_nodes)]
    corrs = []
    lw_single, v_single = emission_log_weights(state, nodes)
    sums = nodes[:, None] + nodes[None, :]
    lw_pair, v_pair = emission_log_weights(state, sums)
    for i in range(nodes.size):
        if not v_single[i]:
            continue
        for k in range(i, nodes.size):
            if v_single[k] and v_pair[i, k]:
                corrs.append(lw_pair[i, k] - lw_single[i] - lw_single[k])
    corr_arr = np.array(corrs) if corrs else np.zeros(1)

    mi = None
    if state.family is Family.SCHWARZSCHILD and spec.n_omega >= 2:
        mi = mutual_information(state, spec)
    return InfoReport(
        s_r=s_r,
        s_cond=cond.exact,
        s_cond_lowenergy=cond.lowenergy,
        s_cond_raw_weighted=cond.raw_weighted,
        e_r=cond.e_r,
        e_bprime=state.m - cond.e_r,
        correlation_mean=float(np.mean(corr_arr)),
        correlation_max=float(np.max(corr_arr)),
        mi_numeric=mi.mi_numeric if mi else None,
        mi_paper_form=mi.mi_paper_form if mi else None,
        mi_moment_form=mi.mi_moment_form if mi else None,
        excluded_mass=cond.excluded_mass,
        excluded_warning=cond.excluded_warning,
    )
