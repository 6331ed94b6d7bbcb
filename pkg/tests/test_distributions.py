import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import truncnorm

from oracles import maxent_moments_mp
from rtd_swipt.distributions import (
    GridPdf,
    MaxEntParams,
    map_output_to_input_pdf,
    maxent_output_pdf,
    point_mass,
    pushforward_input_to_output,
    total_variation,
    truncated_gaussian_pdf,
    uniform_output_pdf,
)
from rtd_swipt.eh_model import table_i_model
from rtd_swipt.errors import InconsistencyError, RangeError
from rtd_swipt.rate_power import solve_mu2

PM = 7.150582699227205e-05


def _maxent(q, pm=PM):
    return MaxEntParams.from_mu2(solve_mu2(pm, q * pm), pm, q * pm)


def test_grid_pdf_validation():
    with pytest.raises(ValueError):
        GridPdf(1.0, 0.0, np.ones(3))
    with pytest.raises(ValueError):
        GridPdf(0.0, 1.0, np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        GridPdf(0.0, 1.0, np.array([]))


def test_grid_pdf_immutable():
    p = uniform_output_pdf(1.0, 10)
    with pytest.raises(ValueError):
        p.density[0] = 3.0


def test_uniform_output_pdf_moments():
    p = uniform_output_pdf(PM, 4001)
    assert p.mass() == pytest.approx(1.0, abs=1e-13)
    assert p.moment(2) == pytest.approx(PM / 3, rel=1e-13)
    assert p.cdf(math.sqrt(PM) / 2) == pytest.approx(0.5, abs=1e-13)


@pytest.mark.parametrize("q", [0.34, 0.5, 0.8, 0.95, 0.999, 1 - 1e-6])
def test_maxent_pdf_normalised_and_active(q):
    prm = _maxent(q)
    p = maxent_output_pdf(prm, 4001)
    # mu0 ~ mu2 P_max carries ~ eps * mu2 P_max absolute rounding (1e-10 at q = 1 - 1e-6)
    assert p.mass() == pytest.approx(1.0, abs=1e-9)
    assert p.moment(2) == pytest.approx(q * PM, rel=1e-5)


@pytest.mark.parametrize("q", [0.4, 0.7, 0.9, 0.99])
def test_maxent_parameters_against_mpmath(q):
    prm = _maxent(q)
    m0, m2 = maxent_moments_mp(prm.mu0, prm.mu2, PM)
    assert m0 == pytest.approx(1.0, abs=1e-9)
    assert m2 == pytest.approx(q * PM, rel=1e-9)


def test_maxent_inconsistent_multipliers():
    prm = _maxent(0.7)
    bad = MaxEntParams(prm.mu0 - 0.01, prm.mu2, PM, 0.7 * PM)
    with pytest.raises(InconsistencyError):
        maxent_output_pdf(bad)


def test_maxent_entropy_identity():
    prm = _maxent(0.8)
    x = np.linspace(0, math.sqrt(PM), 200_001)
    f = prm.density(x)
    g = -f * np.log(f)
    h = float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(x)))
    assert h == pytest.approx(prm.entropy(), abs=1e-6)


def test_truncated_gaussian_against_scipy():
    a_bar, s = 0.6, 0.2
    p = truncated_gaussian_pdf(a_bar, s, 4001)
    ref = truncnorm((0 - a_bar / 2) / s, (a_bar - a_bar / 2) / s, loc=a_bar / 2, scale=s)
    assert p.mass() == pytest.approx(1.0, abs=1e-13)
    assert p.mean() == pytest.approx(ref.mean(), abs=1e-12)
    assert p.moment(2) == pytest.approx(ref.moment(2), rel=1e-7)


def test_truncated_gaussian_narrow_is_spike():
    p = truncated_gaussian_pdf(0.6, 1e-6, 4001)
    assert p.mass() == pytest.approx(1.0)
    assert p.mean() == pytest.approx(0.3, abs=1e-4)


def test_total_variation_properties():
    a = uniform_output_pdf(1.0, 100)
    b = truncated_gaussian_pdf(1.0, 0.2, 77)
    assert total_variation(a, a) == pytest.approx(0.0, abs=1e-15)
    assert total_variation(a, b) == pytest.approx(total_variation(b, a), abs=1e-15)
    assert 0 < total_variation(a, b) <= 1
    far = GridPdf(5.0, 6.0, np.ones(10))
    assert total_variation(a, far) == pytest.approx(1.0)


def test_point_mass():
    p = point_mass(0.3)
    assert p.mass() == pytest.approx(1.0)
    assert p.mean() == pytest.approx(0.3, rel=1e-9)


@pytest.mark.parametrize("q", [None, 0.5, 0.9, 0.99])
def test_output_to_input_round_trip(model, h_tilde, a_bar, q):
    fx = uniform_output_pdf(PM, 4001) if q is None else maxent_output_pdf(_maxent(q), 4001)
    fs = map_output_to_input_pdf(fx, model, h_tilde, 4001, a_bar)
    assert fs.mass() == pytest.approx(1.0, abs=1e-13)
    assert (h_tilde * fs.hi) ** 2 <= model.rho_max_w
    # E_s{psi(|hs|^2)} equals E_x{x^2}
    p_harv = fs.expect(lambda s: model.psi((h_tilde * s) ** 2))
    assert p_harv == pytest.approx(fx.moment(2), rel=2e-6)
    back = pushforward_input_to_output(fs, model, h_tilde, 4001, 400_000)
    assert back.moment(2) == pytest.approx(fx.moment(2), rel=1e-3)


def test_output_to_input_smallest_branch(model, h_tilde):
    fx = uniform_output_pdf(PM, 1001)
    fs = map_output_to_input_pdf(fx, model, h_tilde)
    # the smallest-amplitude branch never uses the decreasing segment
    assert (h_tilde * fs.hi) ** 2 <= 1.8e-3 * (1 + 1e-12)


def test_output_to_input_unreachable(model, h_tilde):
    fx = uniform_output_pdf(PM * 1.01, 100)
    with pytest.raises(RangeError):
        map_output_to_input_pdf(fx, model, h_tilde)


@given(st.floats(0.02, 2.0))
def test_pushforward_mass_preserved(sig):
    m = table_i_model()
    h = 0.07952241932061571
    a_bar = math.sqrt(m.rho_max_w) / h * (1 - 1e-12)
    fs = truncated_gaussian_pdf(a_bar, sig, 501)
    fx = pushforward_input_to_output(fs, m, h, 501, 20_000)
    assert fx.mass() == pytest.approx(1.0, abs=1e-12)
    assert fx.hi == pytest.approx(math.sqrt(PM), rel=1e-12)


def _oracle_preimage(x2, hi_w):
    from scipy.optimize import brentq

    from oracles import psi_table_i

    if x2 <= 0:
        return 0.0
    if x2 >= psi_table_i(hi_w):
        return hi_w
    return brentq(lambda r: psi_table_i(r) - x2, 0.0, hi_w, xtol=1e-18, rtol=1e-14)


def test_pushforward_matches_change_of_variables(model, h_tilde):
    # uniform s on [0, a] with |h a|^2 = 1 mW, strictly on the increasing branch
    a = math.sqrt(1e-3) / h_tilde
    fs = uniform_output_pdf(a * a, 2001)
    fx = pushforward_input_to_output(fs, model, h_tilde, 501, 400_000)
    # F_x(x) = s(x) / a with s(x) = sqrt(psi^-1(x^2)) / |h|
    cdf = np.array([math.sqrt(_oracle_preimage(min(e * e, fx.hi**2), 1e-3)) / h_tilde / a for e in fx.edges])
    ref = GridPdf.from_masses(fx.lo, fx.hi, np.diff(cdf))
    assert total_variation(fx, ref) < 1e-3


@pytest.mark.parametrize("q", [None, 0.7])
def test_output_to_input_round_trip_total_variation(model, h_tilde, a_bar, q):
    fx = uniform_output_pdf(PM, 2001) if q is None else maxent_output_pdf(_maxent(q), 2001)
    fs = map_output_to_input_pdf(fx, model, h_tilde, 4001, a_bar)
    back = pushforward_input_to_output(fs, model, h_tilde, 2001, 400_000)
    assert total_variation(back, fx) < 1e-3


def test_truncated_gaussian_wide_is_uniform_and_centred():
    wide = truncated_gaussian_pdf(0.6, 600.0, 1001)
    assert total_variation(wide, uniform_output_pdf(0.36, 1001)) < 1e-4
    assert truncated_gaussian_pdf(0.6, 0.1, 4001).mean() == pytest.approx(0.3, abs=1e-9)
