import math

import numpy as np
import pytest

from pearceygap.exceptions import AccuracyError, DomainError, ValidityError
from pearceygap.fredholm import (
    BlockDiscretization,
    GapQuery,
    gap_probability,
    log_gap_probability,
)
from pearceygap.painleve import hastings_mcleod, tracy_widom_f2
from pearceygap.pearcey_process import PearceyContour, RecenterSpec
from pearceygap.scaling import ScalingParams, map_windows


def test_empty_windows_give_probability_one():
    q = GapQuery(family="airy", times=(0.0,), windows=(None,))
    assert gap_probability(q) == 1.0
    assert log_gap_probability(q) == 0.0
    q2 = GapQuery(family="airy", times=(-0.5, 0.5), windows=(None, None))
    assert gap_probability(q2) == 1.0


def test_none_window_equals_dropping_the_time():
    full = GapQuery(family="airy", times=(0.2,), windows=((0.0, 5.0),), m=40)
    padded = GapQuery(
        family="airy", times=(-0.4, 0.2), windows=(None, (0.0, 5.0)), m=40
    )
    assert abs(gap_probability(full) - gap_probability(padded)) <= 1e-10


def test_rank_one_kernel_exact_determinant():
    # K(x, y) = c^2 on (0, 1) with c^2 = 1/2: det(I - W) = 1 - 1/2 exactly
    kernel = lambda ti, tj, x, y: np.full((x.size, y.size), 0.5)
    q = GapQuery(
        family="custom", times=(0.0,), windows=((0.0, 1.0),), m=24, kernel=kernel
    )
    assert abs(gap_probability(q) - 0.5) <= 1e-12


def test_gue_edge_matches_painleve():
    q = GapQuery(family="airy", times=(0.0,), windows=((0.0, 9.0),), m=60)
    assert abs(gap_probability(q) - tracy_widom_f2(0.0)) <= 1e-6


def test_exp_log_consistency():
    q = GapQuery(
        family="airy", times=(-0.3, 0.4), windows=((-1.0, 5.0), (0.0, 6.0)), m=40
    )
    assert abs(math.exp(log_gap_probability(q)) - gap_probability(q)) <= 1e-12


def test_two_time_self_refinement():
    qs = [
        GapQuery(
            family="airy",
            times=(-0.5, 0.5),
            windows=((-1.0, 6.0), (-1.0, 6.0)),
            m=m,
            certify=False,
        )
        for m in (40, 80)
    ]
    p40, p80 = (gap_probability(q) for q in qs)
    assert abs(p40 - p80) <= 1e-8


def test_geometric_refinement_decay():
    ps = {}
    for m in (8, 16, 32):
        q = GapQuery(
            family="airy", times=(0.0,), windows=((-2.0, 4.0),), m=m, certify=False
        )
        ps[m] = gap_probability(q)
    d1 = abs(ps[16] - ps[8])
    d2 = abs(ps[32] - ps[16])
    assert d2 <= 0.3 * d1


def test_monotone_in_window_inclusion():
    def prob(win):
        q = GapQuery(family="airy", times=(0.0,), windows=(win,), m=40)
        return gap_probability(q)

    assert prob((0.0, 5.0)) <= prob((0.5, 5.0)) + 1e-9
    assert prob((0.0, 5.0)) <= prob((0.0, 4.0)) + 1e-9


def test_second_window_decreases_probability():
    base = GapQuery(family="airy", times=(0.0,), windows=((0.0, 5.0),), m=40)
    both = GapQuery(
        family="airy", times=(0.0, 0.8), windows=((0.0, 5.0), (1.0, 5.0)), m=40
    )
    assert gap_probability(both) <= gap_probability(base) + 1e-9


def test_pearcey_two_time_probability_in_range():
    q = GapQuery(
        family="pearcey",
        times=(4.0, 4.6),
        windows=((1.5, 4.5), (1.0, 4.0)),
        m=24,
    )
    p = gap_probability(q)
    assert 0.0 < p < 1.0


def test_conjugation_invariance_large_tau():
    # z = 0.45: unconjugated blocks span ~e^{130} yet the balanced
    # determinant must match the conjugated one
    p = ScalingParams.from_z(0.45, 0.0, 0.5)
    w1x, w2x = (0.0, 0.7), (-0.2, 0.5)
    wxi = map_windows([w2x, w1x], p.tau2, p.tau1)
    rc = PearceyContour(recenter=RecenterSpec(z=p.z, t_i=p.t2, t_j=p.t1))
    qd = GapQuery(
        family="pearcey", times=(p.tau2, p.tau1), windows=tuple(wxi), m=30, contour=rc
    )
    qc = GapQuery(
        family="pearcey-conjugated",
        times=(p.t2, p.t1),
        windows=(w2x, w1x),
        m=30,
        params=p,
    )
    assert abs(gap_probability(qd) - gap_probability(qc)) <= 1e-8


def test_conjugation_invariance_direct_single_time():
    z = (3.0 * 9.7) ** (-1.0 / 6.0)
    p = ScalingParams.from_z(z, 0.0, 0.0)
    wx = (-0.5, 1.5)
    wxi = map_windows([wx], p.tau1)
    qd = GapQuery(family="pearcey", times=(p.tau1,), windows=tuple(wxi), m=30)
    qc = GapQuery(
        family="pearcey-conjugated", times=(0.0,), windows=(wx,), m=30, params=p
    )
    assert abs(gap_probability(qd) - gap_probability(qc)) <= 1e-8


def test_conjugation_invariance_direct_two_time():
    p = ScalingParams.from_z(0.60, 0.1, 0.45)
    w1x, w2x = (-0.5, 1.0), (-0.8, 0.7)
    wxi = map_windows([w2x, w1x], p.tau2, p.tau1)
    qd = GapQuery(
        family="pearcey", times=(p.tau2, p.tau1), windows=tuple(wxi), m=30
    )
    qc = GapQuery(
        family="pearcey-conjugated",
        times=(p.t2, p.t1),
        windows=(w2x, w1x),
        m=30,
        params=p,
    )
    assert abs(gap_probability(qd) - gap_probability(qc)) <= 1e-8


def test_single_pearcey_window_against_conjugated_certificates():
    p = ScalingParams.from_z(0.45, 0.0, 0.5)
    q = GapQuery(
        family="pearcey-conjugated",
        times=(p.t2, p.t1),
        windows=((-1.0, 4.0), (-0.5, 4.5)),
        m=40,
        params=p,
    )
    prob = gap_probability(q)  # certificate m=40 vs m=80 must pass
    assert 0.0 < prob <= 1.0


def test_validity_error_when_determinant_negative():
    kernel = lambda ti, tj, x, y: np.full((x.size, y.size), 2.0)  # trace 2
    q = GapQuery(
        family="custom", times=(0.0,), windows=((0.0, 1.0),), m=16, kernel=kernel
    )
    with pytest.raises(ValidityError):
        gap_probability(q)


def test_validity_error_when_probability_exceeds_one():
    kernel = lambda ti, tj, x, y: np.full((x.size, y.size), -1.0)
    q = GapQuery(
        family="custom", times=(0.0,), windows=((0.0, 1.0),), m=16, kernel=kernel
    )
    with pytest.raises(ValidityError):
        gap_probability(q)


def test_accuracy_error_when_certificate_fails():
    # an underresolved oscillatory kernel moves between m and 2m
    kernel = lambda ti, tj, x, y: 0.3 * np.cos(40.0 * np.outer(x, y))
    q = GapQuery(
        family="custom", times=(0.0,), windows=((0.0, 3.0),), m=4, kernel=kernel
    )
    with pytest.raises(AccuracyError):
        gap_probability(q)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="bessel", times=(0.0,), windows=(None,)),
        dict(family="airy", times=(), windows=()),
        dict(family="airy", times=(0.5, 0.5), windows=(None, None)),
        dict(family="airy", times=(0.5, -0.5), windows=(None, None)),
        dict(family="airy", times=(0.0,), windows=((2.0, 1.0),)),
        dict(family="airy", times=(0.0,), windows=((0.0, math.inf),)),
        dict(family="airy", times=(0.0,), windows=(None, None)),
        dict(family="airy", times=(0.0,), windows=((0.0, 1.0),), m=1),
        dict(family="pearcey-conjugated", times=(0.0,), windows=(None,)),
        dict(family="custom", times=(0.0,), windows=(None,)),
    ],
)
def test_query_validation(kwargs):
    with pytest.raises(DomainError):
        GapQuery(**kwargs)


def test_conjugated_rejects_time_not_in_params():
    p = ScalingParams.from_z(0.3, 0.0, 0.5)
    with pytest.raises(DomainError):
        GapQuery(
            family="pearcey-conjugated",
            times=(0.123,),
            windows=((0.0, 1.0),),
            params=p,
        )


def test_block_discretization_skips_empty_windows():
    q = GapQuery(
        family="airy", times=(-0.5, 0.5), windows=(None, (0.0, 2.0)), m=12
    )
    disc = BlockDiscretization.build(q)
    assert disc.size == 12
    assert disc.times == (0.5,)
    disc2 = BlockDiscretization.build(q, factor=2)
    assert disc2.size == 24


def test_tracy_widom_values():
    assert abs(tracy_widom_f2(0.0) - 0.9693728283) <= 1e-6
    assert abs(tracy_widom_f2(0.0) - 0.96937282835527) <= 1e-9
    s = np.array([-4.0, -2.0, 0.0, 2.0])
    f = tracy_widom_f2(s)
    assert f.shape == (4,)
    assert np.all(np.diff(f) > 0.0)
    assert 0.0 < f[0] < f[-1] <= 1.0
    assert abs(tracy_widom_f2(9.0) - 1.0) <= 1e-12


def test_hastings_mcleod_boundary_behaviour():
    from scipy.special import airy as scipy_airy

    q6, qp6 = hastings_mcleod(6.0)
    ai, aip, _, _ = scipy_airy(6.0)
    assert abs(q6 - ai) <= 1e-12
    assert abs(qp6 - aip) <= 1e-12
    q0, _ = hastings_mcleod(0.0)
    assert abs(q0 - 0.3670615) <= 1e-6
    with pytest.raises(DomainError):
        tracy_widom_f2(-15.0)
