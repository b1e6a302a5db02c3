"""Black-hole macro-states, horizon geometry, and entropy functions.

Planck units throughout (G = c = hbar = k_B = 1); entropies are in nats.
Charge and angular momentum are normalized so that sub-extremality reads
M^2 >= Q^2 + (J/M)^2.

Everything downstream is driven by the quarter-area entropy

    S(M, Q, J) = pi * R_H^2            [+ alpha * ln(pi * R_H^2) when alpha != 0]

with the horizon radius per family

    Schwarzschild         R_H = 2 M
    Reissner-Nordstrom    R_H = M + sqrt(M^2 - Q^2)
    Kerr-Newman           R_H = sqrt(r_+^2 + a^2),
                          r_+ = M + sqrt(M^2 - Q^2 - a^2),  a = J / M

For rotating holes R_H is the area radius sqrt(A_H / 4 pi), so S = pi R_H^2
stays a single formula for all three families.

Entropy is evaluated internally in numpy longdouble: consumers take
*differences* of entropies between nearby macro-states, and those differences
must stay accurate to ~1e-10 nats even when S itself is ~1e7 nats, which
float64 intermediate values cannot provide.

A fully evaporated hole (M = Q = J = 0) is a legal terminal state with zero
entropy when alpha = 0: complete evaporation cascades end on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, RemnantInvalid

_PI = np.longdouble(math.pi)


class Family(str, Enum):
    SCHWARZSCHILD = "schwarzschild"
    REISSNER_NORDSTROM = "reissner-nordstrom"
    KERR_NEWMAN = "kerr-newman"

    @classmethod
    def parse(cls, name: str) -> "Family":
        """Accept canonical names plus the usual shorthands (rn, kn)."""
        key = name.strip().lower().replace("_", "-")
        aliases = {
            "schwarzschild": cls.SCHWARZSCHILD,
            "schw": cls.SCHWARZSCHILD,
            "reissner-nordstrom": cls.REISSNER_NORDSTROM,
            "rn": cls.REISSNER_NORDSTROM,
            "kerr-newman": cls.KERR_NEWMAN,
            "kn": cls.KERR_NEWMAN,
        }
        if key not in aliases:
            raise DomainError(f"unknown black-hole family: {name!r}")
        return aliases[key]


def _check_hairs(family: Family, m: float, q: float, j: float) -> None:
    """Raise DomainError unless (m, q, j) is a valid macro-state of `family`."""
    if q == 0.0 and j == 0.0:
        # Covers every family; m >= 0 is False for nan, so this also screens it.
        if m >= 0.0 and m != math.inf:
            return
        raise DomainError(f"mass must be non-negative and finite, got M={m}")
    if not (math.isfinite(m) and math.isfinite(q) and math.isfinite(j)):
        raise DomainError("hairs (M, Q, J) must all be finite")
    if family is Family.SCHWARZSCHILD:
        raise DomainError("Schwarzschild states carry neither charge nor angular momentum")
    if family is Family.REISSNER_NORDSTROM and j != 0.0:
        raise DomainError("Reissner-Nordstrom states carry no angular momentum")
    if m < 0.0:
        raise DomainError(f"mass must be non-negative, got M={m}")
    if m == 0.0:
        raise DomainError("a fully evaporated state must have Q = J = 0")
    a = j / m
    margin = m * m - q * q - a * a
    if margin < 0.0:
        raise DomainError(
            f"super-extremal state (naked singularity): M^2 - Q^2 - (J/M)^2 = {margin}"
        )


@dataclass(frozen=True, slots=True)
class BlackHoleState:
    """Macro-state of a black hole: family, hairs (M, Q, J), and the
    dimensionless log-correction coefficient alpha of the corrected entropy."""

    family: Family
    m: float
    q: float = 0.0
    j: float = 0.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family.parse(str(self.family)))
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be a finite real, got {self.alpha}")
        _check_hairs(self.family, self.m, self.q, self.j)

    @property
    def is_evaporated(self) -> bool:
        return self.m == 0.0

    def with_hairs(self, m: float, q: float, j: float) -> "BlackHoleState":
        return BlackHoleState(self.family, m, q, j, self.alpha)


@dataclass(frozen=True, slots=True)
class Emission:
    """One radiated quantum carrying energy omega >= 0, charge q and
    angular momentum j away from the hole."""

    omega: float
    q: float = 0.0
    j: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega) and math.isfinite(self.q) and math.isfinite(self.j)):
            raise DomainError("emission (omega, q, j) must be finite")
        if self.omega < 0.0:
            raise DomainError(f"emitted energy must be non-negative, got {self.omega}")

    def __add__(self, other: "Emission") -> "Emission":
        return Emission(self.omega + other.omega, self.q + other.q, self.j + other.j)


def _area_sq_ld(family: Family, m: float, q: float, j: float) -> np.longdouble:
    """Scalar R_H^2 in longdouble. No validation; nan where no horizon exists.

    The q == 0, j == 0 case always routes through 4 M^2 so that the family
    reductions RN(Q=0) -> Schwarzschild and KN(J=0) -> RN are bit-exact.
    """
    ml = np.longdouble(m)
    if q == 0.0 and j == 0.0:
        return 4.0 * ml * ml
    ql = np.longdouble(q)
    if j == 0.0:
        d = ml * ml - ql * ql
        if d < 0.0 or m <= 0.0:
            return np.longdouble("nan")
        rp = ml + np.sqrt(d)
        return rp * rp + np.longdouble(0.0)
    if m <= 0.0:
        return np.longdouble("nan")
    al = np.longdouble(j) / ml
    d = ml * ml - ql * ql - al * al
    if d < 0.0:
        return np.longdouble("nan")
    rp = ml + np.sqrt(d)
    return rp * rp + al * al


def _entropy_ld(family: Family, m: float, q: float, j: float, alpha: float) -> np.longdouble:
    """Scalar corrected entropy in longdouble; nan where undefined."""
    s = _PI * _area_sq_ld(family, m, q, j)
    if alpha != 0.0:
        if not s > 0.0:
            return np.longdouble("nan")
        s = s + np.longdouble(alpha) * np.log(s)
    return s


_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def _square_exact(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dekker exact square: (hi, lo) float64 arrays with hi + lo == x*x."""
    hi = x * x
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - hi) + 2.0 * (xh * xl)) + xl * xl
    return hi, lo


def _two_diff(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Knuth exact difference: (s, e) with s + e == a - b."""
    s = a - b
    v = s - a
    e = (a - (s - v)) - (b + v)
    return s, e


def entropy_drop_uncharged(m, omega) -> np.ndarray:
    """S(m - omega) - S(m) for uncharged, uncorrected states, elementwise.

    Both entropies are pi (2m)^2. The remnant mass and both squares are
    carried as exact double-doubles, so the result keeps ~2 ulp *relative*
    accuracy even when the entropies themselves are ~1e7 nats; in particular
    the rounding of m - omega never gets amplified by dS/dM ~ 8 pi M. This is
    the fast float64 counterpart of the scalar longdouble path.
    """
    m = np.asarray(m, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    h1, l1 = _square_exact(2.0 * m)
    rs, re = _two_diff(m, omega)  # remnant mass, exactly
    h2, l2 = _square_exact(2.0 * rs)
    l2 = l2 + 2.0 * (2.0 * rs) * (2.0 * re) + (2.0 * re) * (2.0 * re)
    d, derr = _two_diff(h2, h1)
    return math.pi * (d + (derr + (l2 - l1)))


def area_radius_sq(family: Family, m, q=0.0, j=0.0) -> np.ndarray:
    """Elementwise R_H^2 over arrays of hairs, in longdouble.

    Unvalidated kernel: entries without a horizon (negative mass,
    super-extremal, nonzero hairs at M = 0) come back nan. Shares the
    q = 0, j = 0 -> 4 M^2 routing with the scalar path, so grid values and
    scalar values agree bitwise.
    """
    m = np.asarray(m, dtype=np.longdouble)
    q = np.asarray(q, dtype=np.longdouble)
    j = np.asarray(j, dtype=np.longdouble)
    m, q, j = np.broadcast_arrays(m, q, j)
    schw = 4.0 * m * m
    if family is Family.SCHWARZSCHILD:
        return np.where(m < 0.0, np.longdouble("nan"), schw)
    with np.errstate(invalid="ignore", divide="ignore"):
        pos = m > 0.0
        a = np.where(pos, j / np.where(pos, m, 1.0), np.where(j == 0.0, 0.0, np.nan))
        d = m * m - q * q - a * a
        root = np.sqrt(d)  # nan where super-extremal
        rp = m + root
        area = rp * rp + a * a
        area = np.where((q == 0.0) & (a == 0.0), schw, area)
        area = np.where(m < 0.0, np.longdouble("nan"), area)
        area = np.where((m == 0.0) & ((q != 0.0) | (j != 0.0)), np.longdouble("nan"), area)
    return area


def entropy_grid(family: Family, m, q, j, alpha: float) -> np.ndarray:
    """Elementwise corrected entropy over arrays of hairs (longdouble, nan
    where undefined). Same unvalidated semantics as area_radius_sq."""
    s = _PI * area_radius_sq(family, m, q, j)
    if alpha != 0.0:
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(s > 0.0, s + np.longdouble(alpha) * np.log(s), np.longdouble("nan"))
    return s


def hairs_valid(family: Family, m, q, j, alpha: float) -> np.ndarray:
    """Elementwise validity of (m, q, j) as a macro-state (bool array).

    A zero state (all hairs 0) counts as valid only for alpha = 0, where the
    corrected entropy is still defined (S = 0).
    """
    m = np.asarray(m, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    m, q, j = np.broadcast_arrays(m, q, j)
    zero = (m == 0.0) & (q == 0.0) & (j == 0.0)
    pos = m > 0.0
    if family is Family.SCHWARZSCHILD:
        ok = pos & (q == 0.0) & (j == 0.0)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            a = np.where(pos, j / np.where(pos, m, 1.0), 0.0)
            margin = m * m - q * q - a * a
        ok = pos & (margin >= 0.0)
        if family is Family.REISSNER_NORDSTROM:
            ok &= j == 0.0
    if alpha == 0.0:
        ok = ok | zero
    return ok


def horizon_radius(state: BlackHoleState) -> float:
    """Horizon (area) radius R_H of a valid macro-state, in Planck lengths."""
    return float(np.sqrt(_area_sq_ld(state.family, state.m, state.q, state.j)))


def bh_entropy(state: BlackHoleState) -> float:
    """Corrected horizon entropy pi R_H^2 + alpha ln(pi R_H^2), in nats."""
    s = _entropy_ld(state.family, state.m, state.q, state.j, state.alpha)
    if not np.isfinite(s):
        raise DomainError(
            "log-corrected entropy is undefined at zero horizon area (alpha != 0)"
        )
    return float(s)


def _remnant_hairs(state: BlackHoleState, e: Emission) -> tuple[float, float, float]:
    """Hairs left after an emission; RemnantInvalid if the channel is closed."""
    m2 = state.m - e.omega
    q2 = state.q - e.q
    j2 = state.j - e.j
    if q2 == 0.0 and j2 == 0.0 and m2 >= 0.0:  # uncharged fast path
        return m2, q2, j2
    try:
        _check_hairs(state.family, m2, q2, j2)
    except DomainError as exc:
        raise RemnantInvalid(f"forbidden emission channel: {exc}") from exc
    return m2, q2, j2


def apply_emission(state: BlackHoleState, e: Emission) -> BlackHoleState:
    """State left behind after radiating `e`: hairs (M-omega, Q-q, J-j)."""
    m2, q2, j2 = _remnant_hairs(state, e)
    return BlackHoleState(state.family, m2, q2, j2, state.alpha)


def subextremality_margin(state: BlackHoleState) -> float:
    """M^2 - Q^2 - (J/M)^2; zero exactly at extremality."""
    if state.m == 0.0:
        return 0.0
    a = state.j / state.m
    return state.m * state.m - state.q * state.q - a * a


def is_extremal(state: BlackHoleState) -> bool:
    """True when the state saturates M^2 = Q^2 + (J/M)^2 (or has evaporated)."""
    return subextremality_margin(state) <= 0.0


def hawking_temperature(state: BlackHoleState) -> float:
    """Surface-gravity temperature kappa / 2pi.

    One formula covers all families:  T = (r_+ - r_-) / (4 pi (r_+^2 + a^2))
    with r_+- = M +- sqrt(M^2 - Q^2 - a^2) and a = J/M.  For Schwarzschild
    this reduces to T = 1 / (8 pi M), which is returned directly so the
    uncharged value is exact.
    """
    if is_extremal(state):
        raise DomainError("extremal state has zero temperature")
    if state.q == 0.0 and state.j == 0.0:
        return 1.0 / (8.0 * math.pi * state.m)
    ml = np.longdouble(state.m)
    a = np.longdouble(state.j) / ml
    d = ml * ml - np.longdouble(state.q) ** 2 - a * a
    area = _area_sq_ld(state.family, state.m, state.q, state.j)
    return float(2.0 * np.sqrt(d) / (4.0 * _PI * area))


def state_to_record(state: BlackHoleState) -> dict:
    """Flat serialization record used by configs and output manifests."""
    return {
        "family": state.family.value,
        "M": state.m,
        "Q": state.q,
        "J": state.j,
        "alpha": state.alpha,
    }


def state_from_record(record: dict) -> BlackHoleState:
    """Inverse of state_to_record."""
    return BlackHoleState(
        Family.parse(record["family"]),
        float(record["M"]),
        float(record.get("Q", 0.0)),
        float(record.get("J", 0.0)),
        float(record.get("alpha", 0.0)),
    )
