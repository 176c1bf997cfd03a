import numpy as np
import pytest

from core.data import DataSpec, circle_bump
from core.errors import DataSpecError
from core.evolve import march_null_lattice
from core.grid import fit_line
from core.perturb import (
    PerturbationSeries,
    calibrate_kappa,
    check_hierarchy,
    check_lemma_record,
    corner_identity,
    parity_study,
    perturbation_report,
    predicted_alpha_coefficient,
    quadratures_ABDE,
)

DELTA = 1.0 / 64.0


@pytest.fixture(scope="module")
def quads(pair):
    return quadratures_ABDE(pair)


@pytest.fixture(scope="module")
def prediction(pair, quads):
    return predicted_alpha_coefficient(pair, quads)


def test_quadrature_identities(quads):
    assert quads.B == pytest.approx(-quads.A, rel=1e-10)
    assert quads.D == pytest.approx(-0.5 * quads.E, rel=1e-10)
    assert quads.da_gap <= 1e-10 * abs(quads.A * quads.E)
    for name, value in quads.mean_zero.items():
        assert abs(value) < 1e-10, name


def test_sign_pattern_of_the_asymmetric_pair(quads):
    assert quads.A > 0.0
    assert quads.E < 0.0


def test_closed_forms_match_the_diagonal_data(pair):
    series = PerturbationSeries(pair, DELTA)
    for order in (1, 2, 3):
        assert series.diagonal_defect(order) < 1e-14


def test_closed_forms_are_time_symmetric(pair):
    series = PerturbationSeries(pair, DELTA)
    assert series.phi3().symmetry_defect() == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("order", [2, 3])
def test_hierarchy_residual_is_second_order(pair, order):
    result = check_hierarchy(pair, order, DELTA)
    assert 3.0 <= result.ratio <= 5.0
    assert result.extrapolated < result.fine_residual
    assert result.parity_term == 0.0


def test_first_order_has_no_mixed_derivative(pair):
    result = check_hierarchy(pair, 1, DELTA)
    assert result.residual < 1e-9


def test_boundary_record(pair):
    record = check_lemma_record(pair, DELTA)
    assert record.passed
    assert record.antisymmetry < 1e-12
    assert record.reduced < 1e-9 * max(record.scale, 1.0)


def test_quintic_coefficient_matches_the_closed_form(prediction):
    assert prediction.resolved
    assert prediction.relative_gap < 1e-3
    assert prediction.closed_form_e2 < 0.0


def test_marched_alpha_scales_like_eps_to_the_fifth(prediction):
    eps_values = [0.075, 0.15, 0.3]
    e2 = []
    for eps in eps_values:
        march = march_null_lattice(DataSpec.canonical(1.0, eps, 3), 1.0 / 128.0, store=False)
        e2.append(float(march.alpha[1]))
    assert all(v < 0.0 for v in e2)
    fit = fit_line(np.log(eps_values), np.log(np.abs(e2)))
    assert 4.7 <= fit.slope <= 5.3
    assert e2[0] / eps_values[0] ** 5 == pytest.approx(prediction.c5[1], rel=0.1)


def test_corner_identity_on_a_marched_field():
    march = march_null_lattice(DataSpec.canonical(1.0, 0.3, 3), DELTA)
    identity = corner_identity(march.field)
    assert identity.residual < 1e-2


def test_parity_of_marched_solutions():
    small = parity_study(DataSpec.canonical(1.0, 0.1, 3), DELTA)
    large = parity_study(DataSpec.canonical(1.0, 0.2, 3), DELTA)
    for residuals in (small, large):
        assert residuals.odd_e1 < 1e-15
        assert residuals.even_orthogonal < 1e-15
        assert residuals.odd_remainder < 0.1 * residuals.eps * residuals.phi1_mismatch
    assert 3.0 <= large.phi1_mismatch / small.phi1_mismatch <= 5.0


def test_kappa_calibration():
    assert calibrate_kappa(2.0, 8.0, 4.0, kappa=1.0 / 16.0).resolved
    miss = calibrate_kappa(-2.0, 8.0, 4.0, kappa=1.0 / 16.0)
    assert not miss.resolved
    assert miss.empirical == pytest.approx(-1.0 / 16.0)


def test_series_needs_a_pair():
    with pytest.raises(DataSpecError):
        quadratures_ABDE(circle_bump(1.0))


def test_full_report(pair):
    report = perturbation_report(pair, DELTA)
    record = report.to_record()
    assert report.A == record["A"]
    assert report.H_C.shape == (2, 2)
    assert record["kappa_resolved"] is True
    assert len(report.hierarchy) == 3
    assert report.predicted_c5[1] == pytest.approx(report.prediction.closed_form_e2)
