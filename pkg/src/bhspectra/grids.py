"""Discretized radiation spectra: grid specifications and spectrum containers.

A SpectrumGrid is a diagonal radiation density matrix sampled on a finite
emission grid. Weights are stored exclusively as log-weights in nats;
exponentiation happens only at output time, with underflow rendered as 0.0
while the log value remains the source of truth.

Grid convention: the omega axis holds point evaluations at the nodes
omega_min + i * (omega_max - omega_min) / n  for i = 1..n, i.e. the open
left endpoint is excluded and omega_max is included exactly. Charge and
angular-momentum axes are integer multiples of user-set quanta starting at 0,
which keeps conservation checks exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .blackholes import Emission
from .errors import UsageError


class Normalization(str, Enum):
    RAW = "raw"          # literal entropy-difference weights, p(no emission) = 1
    UNIT_SUM = "unitsum"  # weights renormalized to a probability distribution


@dataclass(frozen=True)
class GridSpec:
    """Rectangular emission grid: an omega axis plus optional q / j axes.

    n_q = 1 (the default) means the single charge value 0; n_q > 1 adds the
    emissions q_step, 2*q_step, ... Same for the angular-momentum axis.
    """

    omega_max: float
    n_omega: int
    omega_min: float = 0.0
    q_step: float = 1.0
    n_q: int = 1
    j_step: float = 1.0
    n_j: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise UsageError("grid omega bounds must be finite")
        if self.omega_min < 0.0 or self.omega_max <= self.omega_min:
            raise UsageError("grid requires 0 <= omega_min < omega_max")
        if self.n_omega < 1 or self.n_q < 1 or self.n_j < 1:
            raise UsageError("grid axis sizes must be >= 1")
        if self.q_step == 0.0 or self.j_step == 0.0:
            raise UsageError("charge/angular-momentum quanta must be nonzero")

    @property
    def n_bins(self) -> int:
        return self.n_omega * self.n_q * self.n_j

    def omega_nodes(self) -> np.ndarray:
        step = (self.omega_max - self.omega_min) / self.n_omega
        nodes = self.omega_min + step * np.arange(1, self.n_omega + 1, dtype=np.float64)
        nodes[-1] = self.omega_max  # pin the endpoint exactly
        return nodes

    def q_values(self) -> np.ndarray:
        return self.q_step * np.arange(self.n_q, dtype=np.float64)

    def j_values(self) -> np.ndarray:
        return self.j_step * np.arange(self.n_j, dtype=np.float64)

    def to_record(self) -> dict:
        return {
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
            "n_omega": self.n_omega,
            "q_step": self.q_step,
            "n_q": self.n_q,
            "j_step": self.j_step,
            "n_j": self.n_j,
        }

    @classmethod
    def from_record(cls, record: dict) -> "GridSpec":
        return cls(
            omega_max=float(record["omega_max"]),
            n_omega=int(record["n_omega"]),
            omega_min=float(record.get("omega_min", 0.0)),
            q_step=float(record.get("q_step", 1.0)),
            n_q=int(record.get("n_q", 1)),
            j_step=float(record.get("j_step", 1.0)),
            n_j=int(record.get("n_j", 1)),
        )


@dataclass(frozen=True)
class SpectrumBin:
    """One grid bin: the emission it labels, its log-weight, validity."""

    emission: Emission
    log_weight: float
    valid: bool


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """Diagonal radiation density matrix over an emission grid.

    Parallel arrays hold the flattened grid (omega-major, then q, then j).
    Invalid bins mark closed emission channels: they are flagged, never
    dropped, and carry log_weight = nan. log_norm records the log-sum-exp
    total subtracted during unit-sum normalization (None for raw spectra),
    so raw weights are recoverable as log_weight + log_norm.
    """

    omega: np.ndarray
    q: np.ndarray
    j: np.ndarray
    log_weight: np.ndarray
    valid: np.ndarray
    normalization: Normalization
    source_state: object | None = None
    grid_spec: GridSpec | None = None
    log_norm: float | None = None

    @property
    def n_bins(self) -> int:
        return int(self.omega.size)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))

    def weights(self) -> np.ndarray:
        """exp(log_weight) with underflow -> 0.0 and invalid bins -> 0.0."""
        out = np.zeros_like(self.log_weight)
        v = self.valid
        with np.errstate(under="ignore"):
            out[v] = np.exp(self.log_weight[v])
        return out

    def bins(self) -> Iterator[SpectrumBin]:
        for i in range(self.n_bins):
            yield SpectrumBin(
                Emission(float(self.omega[i]), float(self.q[i]), float(self.j[i])),
                float(self.log_weight[i]),
                bool(self.valid[i]),
            )
