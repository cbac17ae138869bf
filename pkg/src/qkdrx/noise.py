"""Input-referred noise of a shunt-feedback TIA with a bipolar input stage.

The input-referred current PSD is

    S(f) = 4kT/R_F + 2 q I_C / beta
           + 2 q I_C (2 pi C_T)^2 f^2 / g_m^2
           + 4 k T r_b (2 pi C_D)^2 f^2

so it always has the form ``a + b f^2``. ``g_m = I_C / V_T`` (ideal bipolar
law). ``C_T`` is the total input capacitance (photodiode, pads, transistor).
By default ``C_D`` in the base-resistance term is taken as the external
capacitance (photodiode plus bond pads); ``cd_photodiode_only=True`` restricts it
to the photodiode junction alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import integrate

from .constants import DEFAULT_TEMPERATURE, K_B, Q, thermal_voltage
from .errors import DomainError, InfeasibleBiasError, ValidationError

TWO_PI = 2.0 * math.pi
QUADRATURE_RTOL = 1e-9


class IntegrationKind(str, Enum):
    MONOLITHIC = "monolithic"
    HETEROGENEOUS = "heterogeneous"


@dataclass(frozen=True)
class InterfaceModel:
    """Capacitance budget between the balanced photodiodes and the TIA input."""

    kind: IntegrationKind = IntegrationKind.MONOLITHIC
    c_pd: float = 10e-15
    c_pad: float = 100e-15
    n_pads: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", IntegrationKind(self.kind))
        if self.c_pd < 0:
            raise ValidationError("c_pd", "must be >= 0")
        if self.c_pad < 0:
            raise ValidationError("c_pad", "must be >= 0")
        if self.n_pads < 0 or int(self.n_pads) != self.n_pads:
            raise ValidationError("n_pads", "must be a non-negative integer")
        if self.kind is IntegrationKind.MONOLITHIC and self.n_pads != 0:
            raise ValidationError("n_pads", "monolithic integration has no bond pads")

    @classmethod
    def monolithic(cls, c_pd: float = 10e-15) -> "InterfaceModel":
        return cls(IntegrationKind.MONOLITHIC, c_pd=c_pd, n_pads=0)

    @classmethod
    def heterogeneous(cls, c_pd: float = 10e-15, c_pad: float = 100e-15,
                      n_pads: int = 2) -> "InterfaceModel":
        # one pad on the PIC side, one on the IC side
        return cls(IntegrationKind.HETEROGENEOUS, c_pd=c_pd, c_pad=c_pad, n_pads=n_pads)

    def external_capacitance(self) -> float:
        return self.c_pd + self.n_pads * self.c_pad


@dataclass(frozen=True)
class TransistorParams:
    beta_dc: float
    f_t: float
    r_b: float
    c_tr: float
    i_c: float

    def __post_init__(self):
        if not self.beta_dc > 0:
            raise ValidationError("beta_dc", "must be > 0")
        if not self.f_t > 0:
            raise ValidationError("f_t", "must be > 0")
        if self.r_b < 0:
            raise ValidationError("r_b", "must be >= 0")
        if self.c_tr < 0:
            raise ValidationError("c_tr", "must be >= 0")
        if not self.i_c > 0:
            raise ValidationError("i_c", "must be > 0")

    def transconductance(self, temperature: float = DEFAULT_TEMPERATURE) -> float:
        return self.i_c / thermal_voltage(temperature)

    def min_capacitance(self, temperature: float = DEFAULT_TEMPERATURE) -> float:
        """Smallest input capacitance consistent with the transit frequency."""
        return self.transconductance(temperature) / (TWO_PI * self.f_t)


@dataclass(frozen=True)
class TiaNoiseDesign:
    r_f: float
    transistor: TransistorParams
    interface: InterfaceModel = field(default_factory=InterfaceModel)
    temperature: float = DEFAULT_TEMPERATURE
    bandwidth: float = 1.5e9
    label: str = ""
    cd_photodiode_only: bool = False

    def __post_init__(self):
        if not self.r_f > 0:
            raise ValidationError("r_f", "must be > 0")
        if not self.bandwidth > 0:
            raise ValidationError("bandwidth", "must be > 0")
        if not self.temperature > 0:
            raise ValidationError("temperature", "must be > 0")
        if not self.total_capacitance > 0:
            raise ValidationError("c_tr", "total input capacitance must be > 0")
        # relative slack so that presets sitting exactly on the boundary survive a
        # text round trip
        c_min = self.transistor.min_capacitance(self.temperature)
        if self.transistor.c_tr < c_min * (1.0 - 1e-12):
            raise ValidationError(
                "c_tr",
                f"{self.transistor.c_tr:.4g} F is below g_m/(2 pi f_T) = {c_min:.4g} F",
            )

    @property
    def total_capacitance(self) -> float:
        return self.interface.external_capacitance() + self.transistor.c_tr

    @property
    def rb_capacitance(self) -> float:
        if self.cd_photodiode_only:
            return self.interface.c_pd
        return self.interface.external_capacitance()

    @property
    def g_m(self) -> float:
        return self.transistor.transconductance(self.temperature)


@dataclass(frozen=True)
class NoiseBreakdown:
    """PSD coefficients ``a`` (A^2/Hz) and ``b`` (A^2/Hz^3) plus per-term values at ``f``."""

    white_coefficient: float
    quadratic_coefficient: float
    f: float
    feedback_resistor: float
    base_shot: float
    collector_shot: float
    base_resistance: float

    @property
    def total(self) -> float:
        return self.feedback_resistor + self.base_shot + self.collector_shot + self.base_resistance


def _term_coefficients(design: TiaNoiseDesign) -> tuple[float, float, float, float]:
    kt4 = 4.0 * K_B * design.temperature
    tr = design.transistor
    feedback = kt4 / design.r_f
    base_shot = 2.0 * Q * tr.i_c / tr.beta_dc
    collector = 2.0 * Q * tr.i_c * (TWO_PI * design.total_capacitance) ** 2 / design.g_m**2
    base_res = kt4 * tr.r_b * (TWO_PI * design.rb_capacitance) ** 2
    return feedback, base_shot, collector, base_res


def psd_coefficients(design: TiaNoiseDesign) -> tuple[float, float]:
    """Return ``(a, b)`` with ``S(f) = a + b f^2``."""
    feedback, base_shot, collector, base_res = _term_coefficients(design)
    return feedback + base_shot, collector + base_res


def noise_breakdown(design: TiaNoiseDesign, f: float) -> NoiseBreakdown:
    if f < 0:
        raise DomainError(f"frequency must be >= 0, got {f!r}")
    feedback, base_shot, collector, base_res = _term_coefficients(design)
    f2 = f * f
    return NoiseBreakdown(
        white_coefficient=feedback + base_shot,
        quadratic_coefficient=collector + base_res,
        f=f,
        feedback_resistor=feedback,
        base_shot=base_shot,
        collector_shot=collector * f2,
        base_resistance=base_res * f2,
    )


def noise_psd(design: TiaNoiseDesign, f):
    """Input-referred noise current PSD (A^2/Hz) at frequency ``f``; accepts arrays."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0):
        raise DomainError("frequency must be >= 0")
    a, b = psd_coefficients(design)
    out = a + b * f_arr**2
    return float(out) if out.ndim == 0 else out


def quadrature_rms(design: TiaNoiseDesign, upper: float, n: int = 10_001) -> float:
    """Rms noise current from Simpson quadrature of the PSD on ``n`` samples."""
    f = np.linspace(0.0, upper, n)
    return math.sqrt(integrate.simpson(noise_psd(design, f), x=f))


def integrate_rms(design: TiaNoiseDesign, upper: float | None = None, verify: bool = False) -> float:
    """Rms noise current (A) over the brick-wall band ``[0, upper]``.

    ``upper`` defaults to the design bandwidth. With ``verify=True`` the closed
    form is checked against Simpson quadrature and a mismatch beyond 1e-9
    relative raises ``ArithmeticError``.
    """
    if upper is None:
        upper = design.bandwidth
    if not upper > 0:
        raise DomainError(f"upper frequency must be > 0, got {upper!r}")
    a, b = psd_coefficients(design)
    rms = math.sqrt(a * upper + b * upper**3 / 3.0)
    if verify:
        check = quadrature_rms(design, upper)
        if abs(check - rms) > QUADRATURE_RTOL * rms:
            raise ArithmeticError(f"closed-form rms {rms!r} disagrees with quadrature {check!r}")
    return rms


def flat_rsd(design: TiaNoiseDesign, upper: float | None = None) -> float:
    """Flat-equivalent RSD, rms/sqrt(upper)."""
    if upper is None:
        upper = design.bandwidth
    return integrate_rms(design, upper) / math.sqrt(upper)


def mean_rsd(design: TiaNoiseDesign, upper: float | None = None) -> float:
    """Average of sqrt(S(f)) over ``[0, upper]`` in A/sqrt(Hz)."""
    if upper is None:
        upper = design.bandwidth
    if not upper > 0:
        raise DomainError(f"upper frequency must be > 0, got {upper!r}")
    a, b = psd_coefficients(design)
    # integrate on the unit interval so the tolerance is not swamped by Hz scaling
    value, _ = integrate.quad(lambda x: math.sqrt(a + b * (x * upper) ** 2), 0.0, 1.0,
                              epsrel=1e-8, epsabs=0.0)
    return value


@dataclass(frozen=True)
class BiasOptimum:
    design: TiaNoiseDesign
    scale: float
    rms: float
    n_feasible: int

    @property
    def transistor(self) -> TransistorParams:
        return self.design.transistor

    @property
    def capacitance_match(self) -> float:
        """c_tr / external capacitance; reported, not enforced."""
        c_ext = self.design.interface.external_capacitance()
        return math.inf if c_ext == 0 else self.design.transistor.c_tr / c_ext


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (lo > 0 and hi >= lo):
        raise DomainError(f"range must satisfy 0 < lo <= hi, got ({lo!r}, {hi!r})")
    if n < 1:
        raise DomainError("grid needs at least one point")
    if hi == lo or n == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def optimize_bias(
    design: TiaNoiseDesign,
    i_c_range: tuple[float, float],
    scale_range: tuple[float, float] = (1.0, 1.0),
    n_ic: int = 401,
    n_scale: int = 201,
) -> BiasOptimum:
    """Grid search over collector current and transistor scale.

    Scaling the input device by ``s`` multiplies its capacitance by ``s`` and
    divides its base resistance by ``s``, both relative to ``design``. Points
    violating ``c_tr >= g_m / (2 pi f_T)`` are discarded. The winner is the
    lexicographic minimum of ``(rms, i_c, s)`` over the band
    ``[0, design.bandwidth]``.
    """
    ic = _grid(*i_c_range, n_ic)
    s = _grid(*scale_range, n_scale)
    IC, S = np.meshgrid(ic, s, indexing="ij")

    tr = design.transistor
    vt = thermal_voltage(design.temperature)
    kt4 = 4.0 * K_B * design.temperature
    c_ext = design.interface.external_capacitance()
    c_rb = design.rb_capacitance
    c_tr = S * tr.c_tr
    r_b = tr.r_b / S
    g_m = IC / vt
    c_tot = c_ext + c_tr

    feasible = (c_tr >= g_m / (TWO_PI * tr.f_t)) & (c_tot > 0)
    if not feasible.any():
        raise InfeasibleBiasError(
            "no (i_c, scale) grid point satisfies c_tr >= g_m/(2 pi f_T)"
        )

    bw = design.bandwidth
    a = kt4 / design.r_f + 2.0 * Q * IC / tr.beta_dc
    b = 2.0 * Q * IC * (TWO_PI * c_tot) ** 2 / g_m**2 + kt4 * r_b * (TWO_PI * c_rb) ** 2
    rms = np.sqrt(a * bw + b * bw**3 / 3.0)

    idx = np.flatnonzero(feasible.ravel())
    order = np.lexsort((S.ravel()[idx], IC.ravel()[idx], rms.ravel()[idx]))
    best = idx[order[0]]
    i_best, s_best = float(IC.ravel()[best]), float(S.ravel()[best])

    new_tr = replace(tr, i_c=i_best, c_tr=tr.c_tr * s_best, r_b=tr.r_b / s_best)
    new_design = replace(design, transistor=new_tr)
    return BiasOptimum(
        design=new_design,
        scale=s_best,
        rms=integrate_rms(new_design),
        n_feasible=int(idx.size),
    )


def calibrate_feedback(
    design: TiaNoiseDesign,
    target_rms: float,
    i_c_range: tuple[float, float],
    scale_range: tuple[float, float],
    n_ic: int = 401,
    n_scale: int = 201,
) -> BiasOptimum:
    """Optimize bias, then pick R_F so the integrated rms equals ``target_rms``.

    The feedback-resistor term is flat and bias independent, so it does not
    move the optimum; R_F follows in closed form from the remaining budget.
    """
    opt = optimize_bias(design, i_c_range, scale_range, n_ic, n_scale)
    bw = design.bandwidth
    kt4 = 4.0 * K_B * design.temperature
    rest = opt.rms**2 - kt4 / design.r_f * bw
    budget = target_rms**2 - rest
    if budget <= 0:
        raise InfeasibleBiasError(
            f"{design.label or 'design'}: transistor noise alone "
            f"({math.sqrt(rest):.4g} A) exceeds target {target_rms:.4g} A"
        )
    calibrated = replace(opt.design, r_f=kt4 * bw / budget)
    return replace(opt, design=calibrated, rms=integrate_rms(calibrated))
