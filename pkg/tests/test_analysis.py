import itertools

import numpy as np
import pytest

from pearceygap.analysis import (
    PdeGrid,
    PsiOperator,
    identity1_residual,
    identity2_residual,
    pde_residual,
    proposition_slope,
    theorem_ratio_study,
)
from pearceygap.exceptions import DomainError


def test_psi_operator_coefficients():
    op = PsiOperator(x=1.5, s=-0.7)
    c = op.coefficients()
    assert c == pytest.approx((0.0, -4.0 * (-0.7) * 1.5, 1.5 * 0.49, 4.0 * (-0.7), 0.25))
    w = 0.83
    expected = w**4 / 4.0 + 1.5 * 0.49 * w**2 - 4.0 * 0.7 * w**3 + 4.2 * w
    assert abs(op(w) - expected) < 1e-14


@pytest.mark.parametrize("s", [-0.6, 0.25, 1.0])
def test_identity1_on_grid(s):
    worst = 0.0
    for x, y in itertools.product(np.linspace(-3.0, 3.0, 5), repeat=2):
        worst = max(worst, abs(identity1_residual(float(x), float(y), s)))
    assert worst < 1e-7


@pytest.mark.parametrize("s", [-0.6, 0.25, 1.0])
def test_identity2_on_grid(s):
    worst = 0.0
    for x, y in itertools.product(np.linspace(-3.0, 3.0, 5), repeat=2):
        worst = max(worst, abs(identity2_residual(float(x), float(y), s)))
    assert worst < 1e-7


def test_identity2_odd_under_relabeling():
    a = identity2_residual(0.9, -0.4, 0.7)
    b = identity2_residual(-0.4, 0.9, -0.7)
    assert abs(a + b) < 1e-8


def test_identity1_nonzero_when_misassembled():
    # dropping the first-order term must leave a visible defect, so the
    # near-zero residuals above are not a trivial cancellation
    d = identity1_residual(1.2, -0.8, 0.5)
    s, x, y = 0.5, 1.2, -0.8
    from pearceygap.analysis import _ID_ORDERS, _apply_sides, _product_integrals

    ints = _product_integrals(x, y, 0.0, 0, _ID_ORDERS)
    lhs = _apply_sides(ints, PsiOperator(x, s).coefficients(), PsiOperator(y, s).coefficients())
    rhs = 0.25 * (x - y) * (x + y + 6.0 * s * s) * ints[(0, 0)]
    assert abs(d) < 1e-9
    assert abs((lhs - rhs) - d) > 1e-4  # the 4s*K term is load-bearing


def test_proposition_slope_centered_times():
    rep = proposition_slope(0.0, 0.5)
    assert rep.summary["expected_slope"] == 8.0
    assert abs(rep.summary["slope"] - 8.0) <= 0.5
    assert rep.summary["r2"] >= 0.99
    assert rep.summary["refine_rel_change"] < 0.01
    assert rep.passed


def test_proposition_slope_offset_times():
    rep = proposition_slope(0.5, 0.3)
    assert rep.summary["expected_slope"] == 4.0
    assert abs(rep.summary["slope"] - 4.0) <= 0.5
    assert rep.summary["r2"] >= 0.99
    assert rep.passed


def test_proposition_slope_report_table():
    z_grid = np.geomspace(0.2, 0.3, 3)
    rep = proposition_slope(0.0, 0.4, z_grid=z_grid)
    assert rep.name == "prop21"
    assert rep.columns == ("z", "residual")
    assert len(rep.rows) == 3
    zs = [r[0] for r in rep.rows]
    assert zs == sorted(zs, reverse=True)
    assert all(r[1] > 0.0 for r in rep.rows)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t": 0.0, "s": 0.5, "z_grid": [0.2, 0.7]},
        {"t": 0.0, "s": 0.5, "z_grid": [0.2]},
        {"t": 1.5, "s": 0.5},
        {"t": 0.0, "s": 0.0},
    ],
)
def test_proposition_slope_rejects_bad_inputs(kwargs):
    with pytest.raises(DomainError):
        proposition_slope(**kwargs)


def test_theorem_two_time_rate():
    rep = theorem_ratio_study(np.geomspace(30.0, 960.0, 6))
    assert abs(rep.summary["slope"] - (-4.0 / 3.0)) <= 0.2
    assert rep.summary["r2"] >= 0.98
    assert rep.summary["ablation_detectability"] >= 5.0
    assert rep.summary["untrusted_points"] == 0
    assert rep.passed
    assert rep.columns == (
        "tau1", "tau2", "z", "ratio_dev", "ratio_dev_ablated", "certified",
    )
    assert len(rep.rows) == 6
    assert all(0.0 < abs(r[3]) < 1.0 for r in rep.rows)
    assert all(r[5] == 1 for r in rep.rows)


def test_theorem_single_time_rate():
    rep = theorem_ratio_study(np.geomspace(30.0, 960.0, 6), single_time=True)
    assert abs(rep.summary["slope"] - (-4.0 / 3.0)) <= 0.1
    assert rep.summary["r2"] >= 0.999
    assert rep.passed
    assert rep.columns == ("tau1", "tau2", "z", "ratio_dev", "certified")


def test_theorem_deviation_decreases():
    rep = theorem_ratio_study(
        np.geomspace(40.0, 640.0, 3), ablate=False, certify=False
    )
    devs = [abs(r[3]) for r in rep.rows]
    assert devs[0] > devs[1] > devs[2]


@pytest.mark.parametrize(
    "grid", [[30.0, -5.0], [60.0, 30.0], [30.0, 30.0]]
)
def test_theorem_rejects_bad_grid(grid):
    with pytest.raises(DomainError):
        theorem_ratio_study(grid)


def test_pde_residual_default_grid():
    rep = pde_residual(PdeGrid())
    s = rep.summary
    assert not s["inconclusive"]
    assert s["noise_estimate"] < s["normalized_residual"]
    assert s["normalized_residual"] < 1e-2
    assert s["normalized_residual_half_step"] < s["normalized_residual"]
    assert s["ablation_ratio"] >= 10.0
    assert rep.passed
    names = [r[0] for r in rep.rows]
    assert names == sorted(names[:-1]) + ["pde_total"]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sigma": 0.05, "h": 0.05},
        {"mu": 0.3},
        {"nu": 0.0},
        {"h": 0.0},
        {"tau": 9.8},
        {"sigma": 3.95},
    ],
)
def test_pde_grid_validation(kwargs):
    with pytest.raises(DomainError):
        PdeGrid(**kwargs)
