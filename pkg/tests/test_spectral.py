import math

import numpy as np
import pytest

from core.bump import BumpComponent
from core.config import HEAVISIDE_J_MAX, HEAVISIDE_J_MIN
from core.data import DataSpec, build_initial_data, circle_bump
from core.errors import ConfigError, WindowError
from core.fields import e1
from core.fourier import SpectralDensity
from core.profile import synthesize_slice
from core.spectral import (
    besov_from_density,
    besov_norm,
    heaviside_demo,
    lower_bound_integral,
    norm_report,
    sobolev_from_density,
    sobolev_norm,
    translation_gap,
)


@pytest.fixture(scope="module")
def data3(spec3):
    return build_initial_data(spec3)


def test_constant_map_has_zero_norms():
    f = build_initial_data(DataSpec.canonical(1.0, 0.0, 3))
    assert sobolev_norm(f) == 0.0
    value, _ = besov_norm(f)
    assert value == 0.0


def test_norms_are_translation_invariant(data3):
    assert translation_gap(data3, 0.5) < 1e-10


@pytest.mark.parametrize("lam", [2.0, 4.0])
def test_half_derivative_norm_is_scale_invariant(data3, lam):
    base = sobolev_norm(data3)
    assert base > 0.0
    assert sobolev_norm(data3.rescaled(lam)) == pytest.approx(base, rel=1e-10)


def test_besov_dominates_the_sobolev_norm(data3):
    # sum of block norms >= their root-sum-of-squares, block by block
    besov, blocks = besov_norm(data3)
    assert besov == pytest.approx(math.fsum(value for _, value in blocks))
    assert besov >= math.sqrt(math.fsum(value**2 for _, value in blocks))


def test_sobolev_order_is_checked(data3):
    with pytest.raises(ConfigError):
        sobolev_norm(data3, 1.0)


def test_lower_bound_window_must_be_open(big_profile):
    with pytest.raises(WindowError):
        lower_bound_integral(big_profile, 50.0)


def test_lower_bound_stays_below_the_norm(big_profile):
    for T in (200.0, 400.0):
        report = norm_report(synthesize_slice(big_profile, T, spacing=1.0 / 16.0), big_profile)
        assert report.lower_bound is not None
        assert 0.0 < report.lower_bound
        assert report.bound_respected


def test_report_skips_an_empty_window(big_profile):
    report = norm_report(synthesize_slice(big_profile, 20.0), big_profile)
    assert report.lower_bound is None
    assert math.isnan(report.row()[3])


def test_low_blocks_of_the_heaviside_example_level_off():
    report = heaviside_demo(circle_bump(1.0).components[0])
    assert report.low_spread < 0.01
    assert report.slope_error < 0.05
    assert report.spectral_limit == pytest.approx(report.integral, rel=1e-3)
    assert report.limit == pytest.approx(report.integral / (2.0 * math.pi))
    sums = np.array(report.partial_sums)
    assert np.all(np.diff(sums) > 0.0)


def _l2_deviation(slice_):
    return math.sqrt(slice_.grid.spacing * np.sum((slice_.values - e1(slice_.m)) ** 2))


def test_order_zero_is_the_l2_norm(data3, big_profile):
    for slice_ in (data3, synthesize_slice(big_profile, 20.0)):
        assert sobolev_norm(slice_, 0.0) == pytest.approx(_l2_deviation(slice_), rel=1e-8)


def test_wider_window_never_lowers_the_bound(big_profile):
    T = 400.0
    base = lower_bound_integral(big_profile, T, kappa1=20.0, kappa2=0.1)
    assert lower_bound_integral(big_profile, T, kappa1=10.0, kappa2=0.1) >= base
    assert lower_bound_integral(big_profile, T, kappa1=20.0, kappa2=0.2) >= base


def test_single_block_density():
    # |f^|^2 = 1 on 4 <= xi < 8 and 0 elsewhere
    freqs = 0.25 * np.arange(64)
    density = np.where((freqs >= 4.0) & (freqs < 8.0), 1.0, 0.0)
    weights = np.full(freqs.shape, 2.0)
    weights[0] = 1.0
    spectrum = SpectralDensity(freqs, density, weights, 0.25)

    besov, blocks = besov_from_density(spectrum)
    assert [(j, v) for j, v in blocks if v != 0.0] == [(2, pytest.approx(2.0 * math.sqrt(8.0)))]
    assert besov == pytest.approx(2.0 * math.sqrt(8.0))
    hdot = sobolev_from_density(spectrum, 0.5)
    assert hdot == pytest.approx(math.sqrt(47.0))
    assert 2.0**-0.5 <= besov / hdot <= 1.0


def test_heaviside_demo_of_a_zero_bump():
    report = heaviside_demo(BumpComponent(1.0, amplitude=0.0))
    assert [j for j, _ in report.blocks] == list(range(HEAVISIDE_J_MIN, HEAVISIDE_J_MAX + 1))
    assert all(value == 0.0 for _, value in report.blocks)
    assert report.integral == 0.0
    assert report.limit == 0.0
    assert report.slope_error == 0.0
