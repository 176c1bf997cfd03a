import numpy as np
import pytest

from core.errors import ProfileError
from core.evolve import evolve
from core.fields import e1
from core.profile import (
    AsymptoticProfile,
    consistency_check,
    evaluate_description,
    extract_profile,
    round_trip_error,
    synthesize_slice,
)

H = 1.0 / 64.0


@pytest.fixture(scope="module")
def settled(spec3):
    ev = evolve(spec3, 4.0, H, slice_times=[2.0])
    return ev, extract_profile(ev.final, spec3.C)


def test_extraction_reproduces_the_slice(settled):
    ev, profile = settled
    assert profile.T0 == pytest.approx(4.0)
    assert profile.residual <= 10.0 * H**2
    assert profile.endpoint_defect() <= 10.0 * H**2
    assert round_trip_error(profile, ev.final) == pytest.approx(profile.residual, abs=1e-15)


def test_small_data_barely_move_alpha(settled):
    _, profile = settled
    assert np.linalg.norm(profile.deviation) < 1e-4
    assert np.linalg.norm(profile.alpha) == pytest.approx(1.0)


def test_strips_are_flat_outside_the_light_cone(settled):
    ev, profile = settled
    report = consistency_check(ev, profile)
    assert report.outgoing < 0.05
    assert report.incoming < 0.05
    assert report.interior < 1e-3
    assert set(report.to_dict()) == {
        "outgoing_residual",
        "incoming_residual",
        "interior_residual",
    }


def test_extraction_needs_separated_strips(spec3):
    ev = evolve(spec3, 1.0, H)
    with pytest.raises(ProfileError):
        extract_profile(ev.final, spec3.C)


def test_profile_transform_at_zero_is_the_jump(big_profile):
    jump = big_profile.transform(np.array([0.0]), "F")[0]
    np.testing.assert_allclose(jump, big_profile.deviation, atol=1e-14)


def test_synthesized_slice_has_five_pieces(big_profile):
    T = 10.0
    slice_ = synthesize_slice(big_profile, T)
    assert slice_.time == T
    assert slice_.support == (-11.0, 11.0)
    middle = slice_.grid.index_of(0.0)
    np.testing.assert_allclose(slice_.values[middle], big_profile.alpha)
    np.testing.assert_array_equal(slice_.values[0], e1(3))
    np.testing.assert_array_equal(slice_.values[-1], e1(3))
    assert slice_.unit_defect() < 1e-12


def test_synthesis_needs_separated_strips(big_profile):
    with pytest.raises(ProfileError):
        synthesize_slice(big_profile, 0.5)
    with pytest.raises(ProfileError):
        evaluate_description(big_profile, [0.0], 0.5)


def test_alpha_must_be_a_unit_vector(big_profile):
    with pytest.raises(ProfileError):
        AsymptoticProfile(
            1.0,
            big_profile.s_grid,
            big_profile.F,
            big_profile.G,
            np.array([2.0, 0.0, 0.0]),
            0.0,
            4.0,
        )


def test_resampling_keeps_the_ends(big_profile):
    assert big_profile.resampled(big_profile.s_grid.spacing) is big_profile
    fine = big_profile.resampled(1.0 / 256.0)
    assert fine.s_grid.n == 513
    assert fine.endpoint_defect() == 0.0
    assert np.max(np.abs(np.linalg.norm(fine.F, axis=1) - 1.0)) < 1e-14


def test_alpha_does_not_depend_on_the_extraction_time(settled, spec3):
    ev, late = settled
    early = extract_profile(ev.slice_at(2.0), spec3.C)
    assert early.T0 == pytest.approx(2.0)
    np.testing.assert_allclose(early.alpha, late.alpha, rtol=0.0, atol=1e-10)


def test_doubling_T_only_translates_the_strips(big_profile):
    C = big_profile.C
    near = synthesize_slice(big_profile, 10.0)
    far = synthesize_slice(big_profile, 20.0)
    width = big_profile.s_grid.n
    for sign in (-1.0, 1.0):
        i_near = near.grid.index_of(sign * 10.0 - C)
        i_far = far.grid.index_of(sign * 20.0 - C)
        np.testing.assert_array_equal(
            near.values[i_near : i_near + width], far.values[i_far : i_far + width]
        )


def _curvature(profile):
    ds = profile.s_grid.spacing
    return max(
        float(np.max(np.abs(np.diff(strip, 2, axis=0)))) / ds**2
        for strip in (profile.F, profile.G)
    )


def test_strip_curvature_is_bounded_in_the_step(settled, spec3):
    _, fine = settled
    coarse = extract_profile(evolve(spec3, 2.0, 2.0 * H).final, spec3.C)
    assert _curvature(fine) <= 1.5 * _curvature(coarse)
    assert _curvature(coarse) <= 1.5 * _curvature(fine)
