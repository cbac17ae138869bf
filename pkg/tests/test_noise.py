import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from oracles import KB, Q, psd_terms
from qkdrx.config import tia_presets
from qkdrx.errors import DomainError, InfeasibleBiasError, ValidationError
from qkdrx.noise import (
    IntegrationKind, InterfaceModel, TiaNoiseDesign, TransistorParams, flat_rsd,
    integrate_rms, mean_rsd, noise_breakdown, noise_psd, optimize_bias, psd_coefficients,
    quadrature_rms,
)

VT = KB * 300.0 / Q


def worked_design(**kw):
    """R_F=48.64 kOhm, I_C=1 mA, beta=100, C_T=120 fF, C_ext=60 fF, r_b=50 Ohm."""
    tr = TransistorParams(beta_dc=100, f_t=210e9, r_b=50.0, c_tr=60e-15, i_c=1e-3)
    itf = InterfaceModel.monolithic(c_pd=60e-15)
    return TiaNoiseDesign(48.64e3, tr, itf, 300.0, bandwidth=1e9, **kw)


def white_design(a=1e-24):
    """Capacitances so small that the f^2 terms vanish numerically."""
    tr = TransistorParams(beta_dc=100, f_t=1e30, r_b=0.0, c_tr=1e-30, i_c=1e-15)
    r_f = 4 * KB * 300.0 / (a - 2 * Q * 1e-15 / 100)
    return TiaNoiseDesign(r_f, tr, InterfaceModel.monolithic(c_pd=0.0), bandwidth=1e9)


def reduced_design(c_t=120e-15, beta=100, bw=1.5e9):
    """Only base and collector shot noise active."""
    tr = TransistorParams(beta_dc=beta, f_t=210e9, r_b=0.0, c_tr=c_t, i_c=100e-6)
    return TiaNoiseDesign(1e30, tr, InterfaceModel.monolithic(c_pd=0.0), bandwidth=bw)


REFERENCE_TR = TransistorParams(beta_dc=250, f_t=210e9, r_b=60.0, c_tr=20e-15, i_c=100e-6)


def test_worked_point_matches_term_oracle():
    d = worked_design()
    terms = psd_terms(48.64e3, 300.0, 1e-3, 100, 120e-15, 60e-15, 50.0, 1e9)
    # frozen from the oracle
    assert terms == pytest.approx((3.41e-25, 3.20e-24, 1.22e-25, 1.18e-25), rel=6e-3)
    b = noise_breakdown(d, 1e9)
    assert (b.feedback_resistor, b.base_shot, b.collector_shot, b.base_resistance) == pytest.approx(terms, rel=1e-12)
    assert noise_psd(d, 1e9) == pytest.approx(3.78e-24, rel=3e-3)
    assert b.total == pytest.approx(noise_psd(d, 1e9), rel=1e-15)


def test_dc_value_is_exact():
    d = worked_design()
    a = 4 * KB * 300.0 / 48.64e3 + 2 * Q * 1e-3 / 100
    assert noise_psd(d, 0.0) == a
    b = noise_breakdown(d, 0.0)
    assert b.collector_shot == 0 and b.base_resistance == 0


def test_doubling_ct_quadruples_collector_term_only():
    d = worked_design()
    # C_T goes 120 -> 240 fF by growing the transistor, C_ext unchanged
    d2 = replace(d, transistor=replace(d.transistor, c_tr=180e-15))
    b1, b2 = noise_breakdown(d, 2e9), noise_breakdown(d2, 2e9)
    assert b2.collector_shot == pytest.approx(4 * b1.collector_shot, rel=1e-12)
    assert b2.feedback_resistor == b1.feedback_resistor
    assert b2.base_shot == b1.base_shot
    assert b2.base_resistance == b1.base_resistance


def test_strict_cd_switch():
    het = InterfaceModel.heterogeneous()
    d = TiaNoiseDesign(10e3, REFERENCE_TR, het)
    strict = replace(d, cd_photodiode_only=True)
    assert d.rb_capacitance == pytest.approx(210e-15)
    assert strict.rb_capacitance == pytest.approx(10e-15)
    ratio = noise_breakdown(d, 1e9).base_resistance / noise_breakdown(strict, 1e9).base_resistance
    assert ratio == pytest.approx(21**2)


def test_interface_models():
    assert InterfaceModel.monolithic().external_capacitance() == pytest.approx(10e-15)
    het = InterfaceModel.heterogeneous()
    assert het.kind is IntegrationKind.HETEROGENEOUS
    assert het.external_capacitance() == pytest.approx(210e-15)
    with pytest.raises(ValidationError, match="n_pads"):
        InterfaceModel(IntegrationKind.MONOLITHIC, n_pads=2)
    with pytest.raises(ValidationError, match="c_pd"):
        InterfaceModel.monolithic(c_pd=-1e-15)


@pytest.mark.parametrize("kw, name", [
    ({"beta_dc": 0}, "beta_dc"), ({"f_t": 0}, "f_t"), ({"r_b": -1}, "r_b"),
    ({"i_c": 0}, "i_c"), ({"c_tr": -1e-15}, "c_tr"),
])
def test_transistor_validation(kw, name):
    args = dict(beta_dc=100, f_t=210e9, r_b=10, c_tr=10e-15, i_c=1e-4) | kw
    with pytest.raises(ValidationError, match=name):
        TransistorParams(**args)


def test_design_validation():
    with pytest.raises(ValidationError, match="r_f"):
        replace(worked_design(), r_f=0)
    with pytest.raises(ValidationError, match="bandwidth"):
        replace(worked_design(), bandwidth=0)
    # 10 mA at 210 GHz needs about 295 fF of input capacitance
    tr = TransistorParams(100, 210e9, 10, 100e-15, 10e-3)
    with pytest.raises(ValidationError, match="c_tr"):
        TiaNoiseDesign(1e3, tr)
    with pytest.raises(DomainError):
        noise_psd(worked_design(), -1.0)


def test_white_only_rms_and_rsd():
    d = white_design()
    a, b = psd_coefficients(d)
    assert a == pytest.approx(1e-24, rel=1e-12)
    assert b * 1e18 < 1e-20 * a
    assert integrate_rms(d, 1e9) == pytest.approx(31.62e-9, rel=2e-4)
    for upper in (1e6, 1e9, 5e10):
        assert mean_rsd(d, upper) == pytest.approx(1.0e-12, rel=1e-9)


def test_rms_equals_trapezoid_for_worked_design():
    d = worked_design()
    f = np.linspace(0, 1e9, 10_000)
    trap = math.sqrt(np.trapezoid(noise_psd(d, f), f))
    assert integrate_rms(d, 1e9) == pytest.approx(trap, rel=1e-9)
    assert integrate_rms(d, 1e9, verify=True) == pytest.approx(quadrature_rms(d, 1e9), rel=1e-12)


def test_integrate_rms_domain():
    with pytest.raises(DomainError):
        integrate_rms(worked_design(), 0.0)
    with pytest.raises(DomainError):
        mean_rsd(worked_design(), -1.0)


def test_mean_rsd_closed_form():
    d = worked_design()
    a, b = psd_coefficients(d)
    u = 3e9
    # antiderivative of sqrt(a + b f^2)
    F = lambda f: 0.5 * f * math.sqrt(a + b * f * f) + a / (2 * math.sqrt(b)) * math.asinh(f * math.sqrt(b / a))
    assert mean_rsd(d, u) == pytest.approx(F(u) / u, rel=1e-6)


designs = st.builds(
    lambda rf, beta, rb, cpd, pads, ic, slack, bw: TiaNoiseDesign(
        rf,
        TransistorParams(beta, 210e9, rb, ic / VT / (2 * math.pi * 210e9) * slack, ic),
        InterfaceModel.heterogeneous(c_pd=cpd, n_pads=pads) if pads else InterfaceModel.monolithic(c_pd=cpd),
        bandwidth=bw,
    ),
    st.floats(100, 1e6), st.floats(20, 1000), st.floats(0, 500), st.floats(1e-15, 500e-15),
    st.integers(0, 3), st.floats(1e-6, 2e-2), st.floats(1.0, 50.0), st.floats(1e8, 2e10),
)


@settings(max_examples=60, deadline=None)
@given(designs, st.floats(0, 5e10), st.floats(0, 5e10))
def test_psd_nonnegative_even_monotone(d, f1, f2):
    lo, hi = sorted((f1, f2))
    assert noise_psd(d, lo) >= 0
    assert noise_psd(d, hi) >= noise_psd(d, lo)


@settings(max_examples=60, deadline=None)
@given(designs)
def test_closed_form_vs_adaptive_quadrature(d):
    u = d.bandwidth
    val, _ = integrate.quad(lambda x: noise_psd(d, x * u), 0, 1, epsabs=0, epsrel=1e-13)
    assert integrate_rms(d) == pytest.approx(math.sqrt(val * u), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(designs)
def test_mean_rsd_below_flat_rsd(d):
    assert mean_rsd(d) <= flat_rsd(d) * (1 + 1e-9)


def test_optimize_monotone_objective_returns_lower_bound():
    tr = TransistorParams(beta_dc=100, f_t=1e30, r_b=0.0, c_tr=1e-30, i_c=1e-6)
    d = TiaNoiseDesign(10e3, tr, InterfaceModel.monolithic(c_pd=0.0))
    opt = optimize_bias(d, (1e-6, 1e-3), n_ic=50)
    assert opt.transistor.i_c == pytest.approx(1e-6)


def test_optimize_matches_closed_form_stationary_point():
    d = reduced_design()
    c_t, beta, bw = 120e-15, 100, 1.5e9
    i_star = 2 * math.pi * c_t * VT * math.sqrt(beta / 3) * bw
    assert i_star == pytest.approx(169e-6, rel=3e-3)
    n = 2001
    lo, hi = 10e-6, 1e-3
    step = (hi / lo) ** (1 / (n - 1))
    opt = optimize_bias(d, (lo, hi), n_ic=n)
    assert abs(math.log(opt.transistor.i_c / i_star)) <= math.log(step)


def test_optimize_infeasible():
    # a 1 GHz device cannot carry milliamps in 10 fF
    tr = TransistorParams(100, 1e9, 10, 10e-15, 1e-6)
    d = TiaNoiseDesign(1e3, tr)
    with pytest.raises(InfeasibleBiasError):
        optimize_bias(d, (1e-3, 1e-2), (1.0, 2.0), 20, 5)


def test_optimize_respects_ft_constraint_and_reports_match():
    d = TiaNoiseDesign(1e6, REFERENCE_TR, InterfaceModel.heterogeneous(), bandwidth=5e9)
    opt = optimize_bias(d, (1e-6, 50e-3), (0.05, 50), 301, 301)
    assert opt.design.transistor.c_tr >= opt.design.transistor.min_capacitance() * (1 - 1e-12)
    assert opt.n_feasible > 0
    assert 0.1 < opt.capacitance_match < 10


def test_optimize_ranges_validated():
    with pytest.raises(DomainError):
        optimize_bias(reduced_design(), (0.0, 1e-3))
    with pytest.raises(DomainError):
        optimize_bias(reduced_design(), (1e-3, 1e-4))


def test_optimize_stable_under_refinement():
    d = TiaNoiseDesign(1e6, REFERENCE_TR, InterfaceModel.heterogeneous(), bandwidth=1.5e9)
    coarse = optimize_bias(d, (1e-6, 50e-3), (0.05, 50), 801, 801)
    i0, s0 = coarse.transistor.i_c, coarse.scale
    # 1e-3 relative step around the coarse optimum, then twice as fine
    n1 = int(math.log(4) / math.log(1.001)) + 1
    n2 = 2 * n1 - 1
    a = optimize_bias(d, (i0 / 2, i0 * 2), (s0 / 1.5, s0 * 1.5), n1, 301)
    b = optimize_bias(d, (i0 / 2, i0 * 2), (s0 / 1.5, s0 * 1.5), n2, 301)
    assert b.rms == pytest.approx(a.rms, rel=1e-6)
    assert b.transistor.i_c == pytest.approx(a.transistor.i_c, rel=2e-3)


def test_optimize_tie_break_prefers_small_current():
    # base resistance 0 and zero capacitance -> every scale ties; smallest s wins
    tr = TransistorParams(100, 1e30, 0.0, 1e-30, 1e-6)
    d = TiaNoiseDesign(10e3, tr, InterfaceModel.monolithic(c_pd=0.0))
    opt = optimize_bias(d, (1e-6, 1e-5), (1.0, 4.0), 5, 7)
    assert opt.scale == pytest.approx(1.0)


def _sqrt_c_ratio():
    big = InterfaceModel.heterogeneous(c_pd=10e-15, c_pad=100e-15)
    small = InterfaceModel.heterogeneous(c_pd=2.5e-15, c_pad=25e-15)
    out = []
    for itf in (big, small):
        d = TiaNoiseDesign(1e9, REFERENCE_TR, itf, bandwidth=1.5e9)
        out.append(optimize_bias(d, (1e-6, 50e-3), (0.01, 50), 801, 801))
    return out


def test_sqrt_c_scaling():
    big, small = _sqrt_c_ratio()
    assert big.design.total_capacitance / small.design.total_capacitance == pytest.approx(4, rel=0.05)
    assert 1.8 <= big.rms / small.rms <= 2.2


def test_presets_against_table():
    presets = {p.design.label: p for p in tia_presets()}
    for p in presets.values():
        assert integrate_rms(p.design) == pytest.approx(p.ref_rms, rel=0.15)
    mono = presets["mono-1G5"].design
    het = presets["hetero-1G5"].design
    assert integrate_rms(mono) <= 0.35 * integrate_rms(het)
    for metric in (mean_rsd, integrate_rms):
        assert metric(presets["mono-1G5"].design) < metric(presets["mono-5G"].design) < metric(presets["mono-10G"].design)
        assert metric(presets["hetero-1G5"].design) < metric(presets["hetero-5G"].design) < metric(presets["hetero-10G"].design)
        for band in ("1G5", "5G", "10G"):
            assert metric(presets[f"mono-{band}"].design) < metric(presets[f"hetero-{band}"].design)
