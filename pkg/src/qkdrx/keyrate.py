"""Asymptotic key rate for Gaussian-modulated coherent-state CV-QKD.

Homodyne detection, reverse reconciliation, collective attacks. The receiver
is untrusted: detector loss and electronic noise are handed to the
eavesdropper by folding them into an effective channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, UnphysicalCovarianceError, ValidationError

EIGEN_CLAMP_TOL = 1e-6
DISCRIMINANT_TOL = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    length_km: float = 10.0
    attenuation_db_per_km: float = 0.23
    extra_loss_db: float = 0.0

    def __post_init__(self):
        if self.length_km < 0:
            raise ValidationError("length_km", "must be >= 0")
        if not self.attenuation_db_per_km > 0:
            raise ValidationError("attenuation_db_per_km", "must be > 0")
        if self.extra_loss_db < 0:
            raise ValidationError("extra_loss_db", "must be >= 0")


@dataclass(frozen=True)
class DetectorParams:
    """Receiver-side loss and noise. Efficiency is coupling transmission times R."""

    coupling_loss_db: float = 3.0
    responsivity: float = 0.7
    xi_det_snu: float = 10.0 ** -2.9

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValidationError("responsivity", "detection efficiency must lie in (0, 1]")
        if self.xi_det_snu < 0:
            raise ValidationError("xi_det_snu", "must be >= 0")

    @property
    def efficiency(self) -> float:
        return 10.0 ** (-self.coupling_loss_db / 10.0) * self.responsivity


@dataclass(frozen=True)
class ProtocolParams:
    v_mod: float = 6.0
    beta_rec: float = 0.96
    symbol_rate: float = 250e6

    def __post_init__(self):
        if not self.v_mod > 0:
            raise ValidationError("v_mod", "must be > 0")
        if not 0 < self.beta_rec <= 1:
            raise ValidationError("beta_rec", "must lie in (0, 1]")
        if not self.symbol_rate > 0:
            raise ValidationError("symbol_rate", "must be > 0")


@dataclass(frozen=True)
class QkdScenario:
    channel: ChannelParams = field(default_factory=ChannelParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    xi_rx: float = 0.03

    def __post_init__(self):
        if self.xi_rx < 0:
            raise ValidationError("xi_rx", "must be >= 0")


@dataclass(frozen=True)
class KeyRateResult:
    t_channel: float
    t_total: float
    xi_in: float
    chi_line: float
    i_ab: float
    chi_be: float
    raw_key_fraction: float
    key_fraction: float
    skr: float
    nu: tuple[float, float, float, float]


def channel_transmittance(channel: ChannelParams) -> float:
    loss = channel.attenuation_db_per_km * channel.length_km + channel.extra_loss_db
    return 10.0 ** (-loss / 10.0)


def effective_channel(scenario: QkdScenario) -> tuple[float, float]:
    """Total transmittance and excess noise referred to the channel input.

    ``T = T_ch * eta_det`` and ``xi_in = (xi_rx + xi_det / eta_det) / T_ch``.
    """
    t_ch = channel_transmittance(scenario.channel)
    eta = scenario.detector.efficiency
    if eta <= 0:
        raise DomainError("detection efficiency must be > 0")
    xi_in = (scenario.xi_rx + scenario.detector.xi_det_snu / eta) / t_ch
    return t_ch * eta, xi_in


def chi_line(t: float, xi_in: float) -> float:
    return (1.0 - t) / t + xi_in


def mutual_information(v: float, chi: float) -> float:
    """Alice-Bob information per symbol for homodyne detection, in bits."""
    return 0.5 * math.log2((v + chi) / (1.0 + chi))


def g(nu: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue ``nu``."""
    if nu <= 1.0:
        return 0.0
    p, m = (nu + 1.0) / 2.0, (nu - 1.0) / 2.0
    return p * math.log2(p) - m * math.log2(m)


def _pair_from_sum_product(s: float, p: float, what: str) -> tuple[float, float]:
    """Symplectic pair with nu1^2 + nu2^2 = s and nu1^2 nu2^2 = p."""
    disc = s * s - 4.0 * p
    if disc < -DISCRIMINANT_TOL * max(1.0, s * s):
        raise UnphysicalCovarianceError(f"negative discriminant for {what}", disc)
    root = math.sqrt(max(disc, 0.0))
    return _clamp(math.sqrt(0.5 * (s + root))), _clamp(math.sqrt(max(0.5 * (s - root), 0.0)))


def _clamp(nu: float) -> float:
    if nu < 1.0 - EIGEN_CLAMP_TOL:
        raise UnphysicalCovarianceError("symplectic eigenvalue below vacuum", nu)
    return max(nu, 1.0)


def holevo_bound(v: float, t: float, chi: float) -> tuple[float, tuple[float, float, float, float]]:
    """Eve's Holevo information on Bob's homodyne outcome.

    ``nu1, nu2`` belong to the Alice-Bob state; ``nu3, nu4`` to Alice's mode
    conditioned on Bob's quadrature, with an ideal homodyne after the lumped
    channel (so ``nu4 = 1``).
    """
    if not v > 1:
        raise DomainError(f"V must be > 1, got {v!r}")
    if not 0 < t <= 1:
        raise DomainError(f"T must lie in (0, 1], got {t!r}")
    if chi < 0:
        raise DomainError(f"chi_line must be >= 0, got {chi!r}")
    a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi) ** 2
    b = t * t * (v * chi + 1.0) ** 2
    nu1, nu2 = _pair_from_sum_product(a, b, "Alice-Bob state")
    sqrt_b = math.sqrt(b)
    c = (v * sqrt_b + t * (v + chi)) / (t * (v + chi))
    d = sqrt_b * v / (t * (v + chi))
    nu3, nu4 = _pair_from_sum_product(c, d, "conditional state")
    chi_be = g(nu1) + g(nu2) - g(nu3) - g(nu4)
    return max(chi_be, 0.0), (nu1, nu2, nu3, nu4)


def raw_key_fraction(scenario: QkdScenario) -> float:
    """beta*I_AB - chi_BE before clamping; continuous in every parameter."""
    return secure_key_rate(scenario).raw_key_fraction


def secure_key_rate(scenario: QkdScenario) -> KeyRateResult:
    t_ch = channel_transmittance(scenario.channel)
    t, xi_in = effective_channel(scenario)
    v = scenario.protocol.v_mod + 1.0
    chi = chi_line(t, xi_in)
    i_ab = mutual_information(v, chi)
    chi_be, nu = holevo_bound(v, t, chi)
    raw = scenario.protocol.beta_rec * i_ab - chi_be
    kf = max(0.0, raw)
    return KeyRateResult(
        t_channel=t_ch,
        t_total=t,
        xi_in=xi_in,
        chi_line=chi,
        i_ab=i_ab,
        chi_be=chi_be,
        raw_key_fraction=raw,
        key_fraction=kf,
        skr=scenario.protocol.symbol_rate * kf,
        nu=nu,
    )
