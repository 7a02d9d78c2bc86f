"""Closed-form per-port SIR statistics, cross-port correlation
approximations, selection outage bounds, and asymptotic laws.

The per-port SIR under either precoder is Beta-prime distributed with shape
pair (M_eff, L): M_eff = M under MRT, M - U + 1 under ZF, and L = U - 1
interfering streams.  Everything downstream (outage envelopes, asymptotes,
diversity orders) is driven by that pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specialfn import (
    beta_fn,
    ln_beta,
    ln_binomial,
    ln_gamma,
    ln_reg_inc_beta_tail,
    reg_inc_beta,
)

__all__ = [
    "BetaPrimeParams",
    "OutageEnvelope",
    "m_eff",
    "betaprime_params",
    "betaprime_pdf",
    "betaprime_cdf",
    "betaprime_sf",
    "ln_betaprime_cdf",
    "betaprime_cdf_finite_sum",
    "rho_u_approx",
    "rho_x_approx",
    "outage_envelope",
    "asymptote_small_gamma",
    "asymptote_large_m",
    "asymptote_tail",
    "diversity_orders",
]


@dataclass(frozen=True)
class BetaPrimeParams:
    """Beta-prime shape pair: a = effective signal dimension, b = interferers."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a != int(self.a) or self.b != int(self.b):
            raise ValueError(f"shape parameters must be integers, got {self}")
        if self.a < 1 or self.b < 1:
            raise ValueError(f"shape parameters must be >= 1, got {self}")


def m_eff(scheme: str, M: int, U: int) -> int:
    """Effective signal dimension: M for MRT, M - U + 1 for ZF."""
    if M < 1 or U < 1:
        raise ValueError(f"M, U must be >= 1, got M={M}, U={U}")
    if scheme == "MRT":
        return M
    if scheme == "ZF":
        if M < U:
            raise ValueError(f"ZF requires M >= U, got M={M}, U={U}")
        return M - U + 1
    raise ValueError(f"unknown scheme {scheme!r}")


def betaprime_params(scheme: str, M: int, U: int) -> BetaPrimeParams:
    """The (M_eff, L) shape pair for a scheme and system size."""
    if U < 2:
        raise ValueError(f"need U >= 2 interfering-user setup, got U={U}")
    return BetaPrimeParams(a=m_eff(scheme, M, U), b=U - 1)


def betaprime_pdf(x: float, params: BetaPrimeParams) -> float:
    """Density x^{a-1} (1+x)^{-(a+b)} / B(a,b) for x > 0."""
    x = float(x)
    if x < 0.0:
        raise ValueError(f"pdf argument must be >= 0, got {x}")
    a, b = params.a, params.b
    if x == 0.0:
        if a > 1:
            return 0.0
        if a == 1:
            return 1.0 / beta_fn(a, b)
    return math.exp(
        (a - 1.0) * math.log(x) - (a + b) * math.log1p(x) - ln_beta(a, b)
    )


def betaprime_cdf(gamma: float, params: BetaPrimeParams) -> float:
    """F(gamma) = I_{gamma/(1+gamma)}(a, b)."""
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"threshold must be >= 0, got {gamma}")
    if gamma == 0.0:
        return 0.0
    if math.isinf(gamma):
        return 1.0
    return reg_inc_beta(gamma / (1.0 + gamma), params.a, params.b)


def betaprime_sf(gamma: float, params: BetaPrimeParams) -> float:
    """Survival function 1 - F(gamma), evaluated without cancellation.

    Uses the symmetry I_y(a,b) = 1 - I_{1-y}(b,a), so deep upper tails stay
    accurate.
    """
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"threshold must be >= 0, got {gamma}")
    if gamma == 0.0:
        return 1.0
    if math.isinf(gamma):
        return 0.0
    return reg_inc_beta(1.0 / (1.0 + gamma), params.b, params.a)


def ln_betaprime_cdf(gamma: float, params: BetaPrimeParams) -> float:
    """ln F(gamma) in log space, usable far below double underflow."""
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"threshold must be >= 0, got {gamma}")
    if gamma == 0.0:
        return -math.inf
    return ln_reg_inc_beta_tail(gamma / (1.0 + gamma), params.a, params.b)


def betaprime_cdf_finite_sum(gamma: float, params: BetaPrimeParams) -> float:
    """Finite-sum CDF for integer shapes:

        F(gamma) = 1 - (1+gamma)^{-(a+b-1)} sum_{j=0}^{a-1} C(a+b-1, j) gamma^j

    Each term is assembled in log space so large shapes and thresholds do
    not overflow.
    """
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"threshold must be >= 0, got {gamma}")
    if gamma == 0.0:
        return 0.0
    a, b = params.a, params.b
    n = a + b - 1
    log_gamma_term = math.log(gamma)
    log_one_plus = math.log1p(gamma)
    log_terms = [
        ln_binomial(n, j) + j * log_gamma_term - n * log_one_plus for j in range(a)
    ]
    peak = max(log_terms)
    s = math.exp(peak) * math.fsum(math.exp(t - peak) for t in log_terms)
    return 1.0 - min(s, 1.0)


def rho_u_approx(mu_k: float, mu_l: float, m_effective: int, L: int) -> float:
    """Cross-port desired-gain correlation: mu_k^2 mu_l^2 M_eff / (M_eff + L).

    Approximates cross-port pairs only; evaluating at k = l does not return
    1, because the shared-component argument ignores the port's own
    innovation overlap.
    """
    if abs(mu_k) > 1.0 + 1e-12 or abs(mu_l) > 1.0 + 1e-12:
        raise ValueError("|mu| must be <= 1")
    if m_effective < 1 or L < 1:
        raise ValueError("M_eff and L must be >= 1")
    return (mu_k**2) * (mu_l**2) * m_effective / (m_effective + L)


def rho_x_approx(mu_k: float, mu_l: float, m_effective: int, L: int) -> float:
    """Cross-port SIR correlation: rho_U attenuated by L / (L + M_eff + 1)."""
    return rho_u_approx(mu_k, mu_l, m_effective, L) * L / (L + m_effective + 1.0)


@dataclass(frozen=True)
class OutageEnvelope:
    """Single-port CDF plus every analytic selection curve at one threshold.

    Ordering invariant: 0 <= lower <= iid_benchmark <= upper <= 1, with
    upper equal to the single-port CDF.
    """

    gamma: float
    single_port: float
    upper: float
    lower: float
    iid_benchmark: float
    large_n_approx: float

    def __post_init__(self) -> None:
        tol = 1e-12
        if not (
            -tol <= self.lower <= self.iid_benchmark + tol
            and self.iid_benchmark <= self.upper + tol
            and self.upper <= 1.0 + tol
        ):
            raise ValueError(f"envelope ordering violated: {self}")


def outage_envelope(gamma: float, params: BetaPrimeParams, N: int) -> OutageEnvelope:
    """Selection-outage envelope over N ports at threshold gamma."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if gamma <= 0.0:
        raise ValueError(f"threshold must be > 0, got {gamma}")
    f = betaprime_cdf(gamma, params)
    eps = betaprime_sf(gamma, params)
    return OutageEnvelope(
        gamma=gamma,
        single_port=f,
        upper=f,
        lower=max(0.0, 1.0 - N * eps),
        iid_benchmark=f**N,
        large_n_approx=math.exp(-N * eps),
    )


def asymptote_small_gamma(gamma: float, scheme: str, M: int, U: int) -> float:
    """Small-threshold law C gamma^{M_eff}, C = Gamma(L+M_eff)/(Gamma(L) Gamma(M_eff+1))."""
    if gamma <= 0.0:
        raise ValueError(f"threshold must be > 0, got {gamma}")
    a = m_eff(scheme, M, U)
    L = U - 1
    if L < 1:
        raise ValueError("asymptote needs at least one interferer (U >= 2)")
    ln_c = ln_gamma(L + a) - ln_gamma(L) - ln_gamma(a + 1.0)
    return math.exp(ln_c + a * math.log(gamma))


def asymptote_large_m(gamma: float, scheme: str, M: int, U: int) -> float:
    """Large-M law M_eff^{L-1} gamma^{M_eff} / Gamma(L), valid for gamma < 1."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"large-M expansion requires 0 < gamma < 1, got {gamma}")
    a = m_eff(scheme, M, U)
    L = U - 1
    if L < 1:
        raise ValueError("asymptote needs at least one interferer (U >= 2)")
    return math.exp((L - 1.0) * math.log(a) - ln_gamma(L) + a * math.log(gamma))


def asymptote_tail(gamma: float, params: BetaPrimeParams) -> float:
    """Upper-tail law 1 - F(gamma) ~ gamma^{-b} / (b B(a,b))."""
    if gamma <= 0.0:
        raise ValueError(f"threshold must be > 0, got {gamma}")
    a, b = params.a, params.b
    return math.exp(-b * math.log(gamma) - math.log(b) - ln_beta(a, b))


def diversity_orders(scheme: str, M: int, U: int, N: int) -> int:
    """Effective selection diversity order M_eff * N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return m_eff(scheme, M, U) * N
