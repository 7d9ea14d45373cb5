"""Closed-form study of the 1D bar on an elastic adhesive foundation.

For a bar (-L, L) with energy

    F(t, u) = (1/2) integral mu |u'|^2 + Gc #(jumps) + beta integral |u - t x|^2

the crack-free minimizer, its energy, the critical times at which m-crack
configurations become globally cheaper, and the geometry of the strain
boundary layer all have explicit formulas in terms of the decay rate
kappa = sqrt(2 beta / mu). Everything here is exact arithmetic on those
formulas; no discretization is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class Bar1DParams:
    """Half-length and material constants of the 1D bar."""

    half_length_L: float
    mu: float = 1.0
    beta: float = 0.15
    Gc: float = 1.0

    def __post_init__(self):
        for name in ("half_length_L", "mu", "beta", "Gc"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class Layer1DQuery:
    """Reference point (x_star) and reference bar half-length (L_star)."""

    x_star: float
    L_star: float

    def __post_init__(self):
        if not 0 < self.x_star < self.L_star:
            raise ParameterError(
                f"need 0 < x_star < L_star, got x_star={self.x_star}, L_star={self.L_star}"
            )


def decay_rate(params: Bar1DParams) -> float:
    """Exponential rate kappa = sqrt(2 beta / mu) of the boundary layer."""
    return math.sqrt(2.0 * params.beta / params.mu)


def u_continuous(t: float, x: float, params: Bar1DParams) -> float:
    """Crack-free displacement t * (x - sinh(kappa x) / (kappa cosh(kappa L))).

    Solves -mu u'' + 2 beta u = 2 beta t x on (-L, L) with zero-Neumann
    ends. The formula is analytic, so slight evaluation outside [-L, L]
    (finite-difference probes of the end conditions) is allowed.
    """
    L = params.half_length_L
    k = decay_rate(params)
    return t * (x - math.sinh(k * x) / (k * math.cosh(k * L)))


def f_hat(L: float, params: Bar1DParams) -> float:
    """Crack-free energy coefficient: F(t, u_continuous) = t^2 * f_hat(L).

    f_hat(L) = mu (L - tanh(kappa L) / kappa), increasing in L and < mu L.
    """
    if L <= 0:
        raise ParameterError(f"L must be > 0, got {L}")
    k = decay_rate(params)
    return params.mu * (L - math.tanh(k * L) / k)


def delta2(L: float, params: Bar1DParams) -> float:
    """Energy gained by splitting the bar in half: f_hat(L) - 2 f_hat(L/2).

    Equals (mu/kappa) (2 tanh(kappa L / 2) - tanh(kappa L)); positive and
    increasing for L > 0.
    """
    if L <= 0:
        raise ParameterError(f"L must be > 0, got {L}")
    k = decay_rate(params)
    return params.mu / k * (2.0 * math.tanh(k * L / 2.0) - math.tanh(k * L))


def critical_time(L: float, m: int, params: Bar1DParams) -> float:
    """Loading time at which m equispaced cracks match the crack-free energy.

    t_m = sqrt(m Gc / (f_hat(L) - (m+1) f_hat(L/(m+1)))); the denominator is
    positive for every L > 0, m >= 1.
    """
    if L <= 0:
        raise ParameterError(f"L must be > 0, got {L}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    denom = f_hat(L, params) - (m + 1) * f_hat(L / (m + 1), params)
    if denom <= 0:
        raise ParameterError(f"non-positive energy gap {denom} at L={L}, m={m}")
    return math.sqrt(m * params.Gc / denom)


def halving_times(L: float, K: int, params: Bar1DParams) -> list[float]:
    """Single-crack transition times of the dyadic cascade L, L/2, ..., L/2^(K-1)."""
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    return [critical_time(L / 2**k, 1, params) for k in range(K)]


def layer_point(query: Layer1DQuery, L: float, params: Bar1DParams) -> float:
    """Point x in (0, L) where the strain matches its reference-bar value.

    Solves cosh(kappa x) = cosh(kappa L) cosh(kappa x*) / cosh(kappa L*),
    i.e. u'_L(x) = u'_{L*}(x*). L - x is nearly independent of L, which is
    what makes the boundary-layer width a material length.
    """
    if L <= 0:
        raise ParameterError(f"L must be > 0, got {L}")
    k = decay_rate(params)
    # work in logs: cosh overflows for kappa*L beyond ~350
    rhs_log = _log_cosh(k * L) + _log_cosh(k * query.x_star) - _log_cosh(k * query.L_star)
    if rhs_log < 0:
        raise ParameterError(
            f"no solution: cosh identity right-hand side below 1 (log={rhs_log})"
        )
    rhs = math.exp(rhs_log)
    if rhs - 1.0 < 1e-12:
        # acosh is ill-conditioned at 1; bisect cosh(k x) = rhs on [0, L]
        return _bisect_cosh(k, rhs, L)
    return math.acosh(rhs) / k


def _log_cosh(y: float) -> float:
    y = abs(y)
    # log cosh y = y + log((1 + exp(-2y)) / 2)
    return y + math.log1p(math.exp(-2.0 * y)) - math.log(2.0)


def _bisect_cosh(k: float, rhs: float, hi: float) -> float:
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.cosh(k * mid) < rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def layer_width(query: Layer1DQuery, params: Bar1DParams) -> float:
    """Asymptotic offset b with layer_point(L) ~ L - b for large L.

    b = -log(cosh(kappa x*) / cosh(kappa L*)) / kappa > 0.
    """
    k = decay_rate(params)
    return (_log_cosh(k * query.L_star) - _log_cosh(k * query.x_star)) / k


def crack_energy(t: float, L: float, m: int, params: Bar1DParams) -> float:
    """Total energy of m equispaced cracks: m Gc + t^2 (m+1) f_hat(L/(m+1))."""
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    if m == 0:
        return t * t * f_hat(L, params)
    return m * params.Gc + t * t * (m + 1) * f_hat(L / (m + 1), params)


def optimal_crack_count(t: float, L: float, params: Bar1DParams, m_max: int = 64) -> int:
    """Globally cheapest crack count at time t, ties broken toward fewer cracks."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    best_m, best_e = 0, crack_energy(t, L, 0, params)
    for m in range(1, m_max + 1):
        e = crack_energy(t, L, m, params)
        if e < best_e:
            best_m, best_e = m, e
    return best_m


def verify_centered_optimality(
    L1: float, L2: float, params: Bar1DParams, t: float = 1.0
) -> tuple[float, float]:
    """Energies of an off-center vs. a centered single crack in a bar of length L1+L2.

    Returns (off_center, centered); centered is never larger, strictly
    smaller when L1 != L2 (tanh is strictly concave).
    """
    if L1 <= 0 or L2 <= 0:
        raise ParameterError("segment lengths must be positive")
    off = params.Gc + t * t * (f_hat(L1, params) + f_hat(L2, params))
    cen = params.Gc + t * t * 2.0 * f_hat((L1 + L2) / 2.0, params)
    return off, cen
