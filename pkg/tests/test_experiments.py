import math

import numpy as np
import pytest

from core.errors import ConfigError, LayoutError
from core.evolve import evolve
from core.experiments import (
    cascade_layout,
    growth_from_profile,
    interior_value,
    run_cascade,
    run_convergence,
    run_eps_sweep,
    run_growth,
    run_jobs,
)


def test_jobs_come_back_in_order():
    jobs = [1.0, 4.0, 9.0, 16.0]
    assert run_jobs(math.sqrt, jobs, workers=1) == [1.0, 2.0, 3.0, 4.0]
    assert run_jobs(math.sqrt, jobs, workers=2) == [1.0, 2.0, 3.0, 4.0]


def test_growth_slope_follows_the_jump(big_profile):
    curve = growth_from_profile(big_profile, [10.0, 30.0, 100.0, 300.0, 1000.0])
    assert curve.hdot_fit.r_squared > 0.99
    assert curve.hdot_fit.slope == pytest.approx(curve.predicted_slope, rel=0.1)
    assert curve.besov_fit.slope > 0.0
    assert curve.bound_respected
    assert len(curve.rows()) == 5


def test_growth_needs_two_decades(big_profile):
    with pytest.raises(ConfigError):
        growth_from_profile(big_profile, [10.0, 50.0])


def test_growth_from_evolved_data(spec3):
    curve = run_growth(spec3, [10.0, 100.0, 1000.0], h_step=1.0 / 32.0, spacing=1.0 / 16.0)
    assert curve.T0 == pytest.approx(4.0)
    assert np.linalg.norm(curve.alpha - np.eye(3)[0]) < 1e-4
    assert curve.bound_respected
    record = curve.to_record()
    assert record["lower_bound_respected"] is True
    assert "hdot_sq_slope" in record


def test_interior_value_needs_separated_strips(spec3):
    ev = evolve(spec3, 1.0, 1.0 / 32.0)
    with pytest.raises(ConfigError):
        interior_value(ev)


def test_eps_sweep_recovers_the_quintic_law():
    sweep = run_eps_sweep([0.05, 0.1, 0.2, 0.4], [1.0 / 32.0, 1.0 / 64.0])
    assert not any(p.flagged for p in sweep.points)
    assert 4.6 <= sweep.exponent <= 5.4
    assert sweep.c5 == pytest.approx(sweep.prediction.c5[1], rel=0.15)
    assert sweep.coefficient < 0.0
    assert set(sweep.exponent_by_step) == {1.0 / 32.0, 1.0 / 64.0}
    assert len(sweep.rows()[0]) == 8


@pytest.mark.parametrize(
    ("eps_list", "kwargs"),
    [
        ([0.05, 0.1], {}),
        ([0.0, 0.4], {}),
        ([0.05, 0.4], {"m": 2}),
    ],
)
def test_eps_sweep_rejects_bad_input(eps_list, kwargs):
    with pytest.raises(ConfigError):
        run_eps_sweep(eps_list, [1.0 / 32.0], **kwargs)


def test_convergence_on_circle_data(spec2):
    study = run_convergence(spec2)
    assert study.steps == (1.0 / 256.0, 1.0 / 512.0, 1.0 / 1024.0)
    assert 1.8 <= study.order <= 2.2
    assert study.errors[0] > study.errors[1] > study.errors[2]
    assert study.sphere_defect <= 1e-12


def test_convergence_needs_circle_data(spec3):
    with pytest.raises(ConfigError):
        run_convergence(spec3, [1.0 / 32.0, 1.0 / 64.0])


def test_cascade_layout_keeps_cones_apart():
    copies = cascade_layout(1.0, 0.3, 3, 2.0, 1.0 / 32.0)
    assert [c.scale for c in copies] == [1.0, 0.5, 0.25]
    assert [c.eps for c in copies] == pytest.approx([0.3, 0.15, 0.075])
    for left, right in zip(copies, copies[1:]):
        assert left.cone(1.0, 2.0)[1] < right.cone(1.0, 2.0)[0]
        assert right.center * 32.0 == round(right.center * 32.0)


def test_cascade_layout_rejects_overlap():
    with pytest.raises(LayoutError):
        cascade_layout(1.0, 0.3, 2, 2.0, 1.0 / 32.0, centers=[0.0, 1.0])
    with pytest.raises(LayoutError):
        cascade_layout(1.0, 0.3, 2, 2.0, 1.0 / 32.0, centers=[0.0])
    with pytest.raises(ConfigError):
        cascade_layout(1.0, 0.3, 4, 2.0, 1.0 / 32.0)


def test_cascade_copies_evolve_independently(spec3):
    report = run_cascade(spec3, 2, h_step=1.0 / 32.0, t_final=2.0)
    assert len(report.copies) == 2
    for copy in report.copies:
        assert copy.independent
        assert copy.independence < 1e-12
        assert copy.growth is not None
    assert report.besov_decreasing
    assert report.scale_invariance < 1e-2
    assert report.to_record()["all_independent"] is True
    assert len(report.rows()[1]) == 10
