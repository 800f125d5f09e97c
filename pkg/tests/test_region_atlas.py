import os

import numpy as np
import pytest

import hardy_bellman.utils as utils
from hardy_bellman.Domain import SPoint, validate_spoint
from hardy_bellman.errors import DomainError
from hardy_bellman.Exponents import PRESETS
from hardy_bellman.RegionAtlas import (
    ATLAS_HEADER,
    CURVE_HEADER,
    TheoremTag,
    XTag,
    classify,
    emit_atlas,
    h_threshold,
    s2_double_prime,
    s2_double_prime_values,
    s2_prime_of,
    solve_delta,
    theta,
    theta_at_zero,
    theta_prime,
)
from hardy_bellman.SharpConstant import Sign, sharp_t, solve_t0
from hardy_bellman.SpecialFunctions import omega_values
from hardy_bellman.utils import central_difference
from matched_points import P2Q15, x_region_point

E = P2Q15


def test_theta_endpoints():
    assert theta(E, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert theta_at_zero(E) == pytest.approx(2.0 ** 0.5 * (2.0 ** 1.5 - 4.0), rel=1e-12)
    assert theta_at_zero(E) < 0.0
    assert theta(E, 1e-12) == pytest.approx(theta_at_zero(E), abs=1e-4)


def test_theta_prime_matches_differences():
    for s in (0.2, 0.5, 0.8):
        estimate = central_difference(lambda x: theta(E, x), s, 1e-5)
        assert theta_prime(E, s) == pytest.approx(estimate, rel=1e-5)


def test_theta_rejects_points_outside_unit_interval():
    with pytest.raises(DomainError):
        theta(E, 0.0)
    with pytest.raises(DomainError):
        theta(E, 1.5)


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_delta_separates_theta_signs(preset):
    exps = PRESETS[preset]
    delta = solve_delta(exps)
    assert 0.0 < delta < 1.0
    assert theta(exps, 0.5 * delta) < 0.0
    assert theta(exps, 0.5 * (delta + 1.0)) > 0.0


def test_s2_prime_starts_on_lower_boundary():
    delta = solve_delta(E)
    assert s2_prime_of(E, delta) == pytest.approx(delta ** E.slope, rel=1e-9)
    assert s2_prime_of(E, 1.0 - 1e-8) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DomainError):
        s2_prime_of(E, 0.5 * delta)


def test_t0_equals_omega_on_s2_prime():
    delta = solve_delta(E)
    for s1 in (delta + 0.25 * (1.0 - delta), delta + 0.75 * (1.0 - delta)):
        P = SPoint(s1=s1, s2=s2_prime_of(E, s1))
        assert solve_t0(E, P) == pytest.approx(omega_values(E.p, s1), abs=1e-8)


def test_h_threshold_shape():
    assert h_threshold(E, 1.0) == pytest.approx(1.0, abs=1e-12)
    values = h_threshold(E, np.linspace(0.05, 0.95, 19))
    assert np.all(np.diff(values) < 0.0)
    assert np.all(values > 1.0)
    assert h_threshold(E, 1e-120) == np.inf


def test_s2_double_prime_solves_threshold():
    s1 = 0.9
    s2 = s2_double_prime(E, s1)
    assert 0.0 < s2 < 1.0
    target = s1 ** -E.q
    assert abs(h_threshold(E, s2) - target) <= 1e-10 * target


def test_s2_double_prime_vectorised_matches_scalar():
    grid = np.array([0.1, 0.4, 0.7, 0.95])
    values = s2_double_prime_values(E, grid)
    for s1, value in zip(grid, values):
        assert value == pytest.approx(s2_double_prime(E, float(s1)), rel=1e-10)
    assert np.all(np.diff(values) > 0.0)


def test_classify_below_delta():
    delta = solve_delta(E)
    s1 = 0.5 * delta
    lower = s1 ** E.slope
    report = classify(E, validate_spoint(E, s1, 0.5 * (lower + 1.0)))
    assert report.theorem == TheoremTag.BELOW_DELTA
    assert report.s2_prime is None
    assert report.comparisons.s2_vs_s2_prime is None
    assert report.comparisons.omega_p_vs_t0 == "<"


def test_classify_either_side_of_s2_prime():
    delta = solve_delta(E)
    s1 = 0.5 * (delta + 1.0)
    s2p = s2_prime_of(E, s1)

    above = classify(E, validate_spoint(E, s1, 0.5 * (s2p + 1.0)))
    assert above.theorem == TheoremTag.ABOVE_S2PRIME
    assert above.comparisons.omega_p_vs_t0 == "<"

    between = classify(E, validate_spoint(E, s1, 0.5 * (s1 ** E.slope + s2p)))
    assert between.theorem == TheoremTag.BETWEEN
    assert between.comparisons.omega_p_vs_t0 == ">"
    assert between.classification.startswith("BETWEEN:")


def test_classify_x_region():
    P = x_region_point(E)
    assert P is not None
    report = classify(E, P)
    assert report.x_region == XTag.X_REGION
    assert report.comparisons.s2_vs_s2_double_prime == "<"
    assert report.comparisons.omega_p_vs_t0 == ">"


def test_emit_atlas_small_grid():
    atlas = emit_atlas(E, 2, log=False)
    # of the nodes 0.25 and 0.75 only (0.25, 0.75) lies strictly inside D
    assert [(row.s1, row.s2) for row in atlas.rows] == [(0.25, 0.75)]
    assert len(atlas.boundary) == 2
    assert len(atlas.curves) == 3
    assert atlas.curves[0].delta_flag == 1
    assert atlas.curves[0].s1 == solve_delta(E)
    assert sum(atlas.counts().values()) == 1


def test_emit_atlas_rejects_tiny_grid():
    with pytest.raises(DomainError):
        emit_atlas(E, 1, log=False)


def test_emit_atlas_is_deterministic():
    first = emit_atlas(E, 6, log=False)
    second = emit_atlas(E, 6, workers=3, log=False)
    assert first.atlas_csv() == second.atlas_csv()
    assert first.curves_csv() == second.curves_csv()
    assert first.boundary_csv() == second.boundary_csv()


def test_atlas_written_as_csv(tmp_path):
    atlas = emit_atlas(E, 4, log=False)
    paths = atlas.write(str(tmp_path / "atlas"))
    assert sorted(paths) == ["atlas", "boundary", "curves"]
    with open(paths["atlas"], newline="") as handle:
        lines = handle.read().split("\n")
    assert lines[0] == ",".join(ATLAS_HEADER)
    assert lines[-1] == ""
    assert len(lines) == len(atlas.rows) + 2
    with open(paths["curves"]) as handle:
        header, first = handle.read().split("\n")[:2]
    assert header == ",".join(CURVE_HEADER)
    assert first.split(",")[1] == "1"
    assert not any(name.startswith(".tmp-") for name in os.listdir(tmp_path / "atlas"))


def test_atlas_files_are_written_as_a_set(tmp_path, monkeypatch):
    atlas = emit_atlas(E, 4, log=False)
    out = tmp_path / "atlas"
    real_mkstemp = utils.tempfile.mkstemp
    calls = []

    def failing_mkstemp(*args, **kwargs):
        calls.append(args)
        if len(calls) == 3:
            raise OSError("disk full")
        return real_mkstemp(*args, **kwargs)

    monkeypatch.setattr(utils.tempfile, "mkstemp", failing_mkstemp)
    with pytest.raises(OSError):
        atlas.write(str(out))
    assert os.listdir(out) == []


@pytest.mark.parametrize("s1", [1e-60, 1e-120, 1e-200])
def test_classify_with_tiny_s1(s1):
    P = validate_spoint(E, s1, 0.5)
    report = classify(E, P)
    assert report.x_region == XTag.NOT_X
    assert report.comparisons.s2_vs_s2_double_prime == ">"
    assert 0.0 < report.s2_double_prime < s1 ** E.slope
    assert sharp_t(E, P).tprime0_sign == Sign.NEG


def test_s2_double_prime_for_tiny_s1():
    s1 = 1e-60
    s2 = s2_double_prime(E, s1)
    target = s1 ** -E.q
    assert abs(h_threshold(E, s2) - target) <= 1e-9 * target
    # h(s2) grows like s2^(-q) near 0, which puts s2'' within a constant factor of s1
    assert s2_double_prime_values(E, np.array([1e-305]))[0] == 0.0


def test_classify_on_s2_double_prime():
    P = x_region_point(E)
    on_curve = validate_spoint(E, P.s1, s2_double_prime(E, P.s1))
    report = classify(E, on_curve)
    assert report.x_region == XTag.ON_S2DOUBLEPRIME
    assert report.comparisons.s2_vs_s2_double_prime == "="
    assert report.classification.endswith(":ON_S2DOUBLEPRIME")


@pytest.mark.slow
def test_region_areas_settle_under_grid_doubling():
    areas = []
    for resolution in (32, 64):
        atlas = emit_atlas(E, resolution, workers=4, log=False)
        areas.append({tag: count / resolution ** 2 for tag, count in atlas.counts().items()})
    coarse, fine = areas
    for tag in set(coarse) | set(fine):
        assert abs(fine.get(tag, 0.0) - coarse.get(tag, 0.0)) <= 0.02, tag
