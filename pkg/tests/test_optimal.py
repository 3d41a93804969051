import math

import numpy as np
import pytest

from qbtangle.errors import DivergentTime, InvalidEnergy, NegativeBzSquared, OutOfRange
from qbtangle.model import ChainParams, omega_k_sq
from qbtangle.optimal import (
    Branch,
    branch1_bz_radicand,
    classify_b2,
    optimal_fields_b2,
    optimal_fields_ghz,
    optimal_plan,
    tau_star_b2,
    tau_star_ghz,
    thresholds,
)
from qbtangle.propagator import StateClass
from qbtangle.tangle import tau13_closed


def test_thresholds_at_six():
    t = thresholds(6.0)
    assert t.k1_plus == pytest.approx(math.sqrt(5), abs=1e-15)
    assert round(t.k1_plus, 2) == 2.24 and round(t.k1_minus, 2) == -2.24
    assert round(t.k2_plus, 2) == 1.70
    assert t.k2_minus == pytest.approx(-0.0735, abs=1e-4)


def test_ghz_window_at_fourteen():
    t = thresholds(14.0)
    assert (t.k_ghz_minus, t.k_ghz_plus) == (-3.0, 2.0)


def test_thresholds_below_split_energy():
    t = thresholds(1.5)
    assert t.k2_plus is None and t.k2_minus is None
    assert t.k_ghz_plus == t.k_ghz_minus == -0.5
    with pytest.raises(InvalidEnergy):
        thresholds(1.0)


@pytest.mark.parametrize("k,branch", [(1.0, Branch.BRANCH2), (1.59, Branch.BRANCH2), (2.0, Branch.BRANCH1), (2.5, Branch.OUT_OF_RANGE)])
def test_classify_b2(k, branch):
    assert classify_b2(6.0, k) is branch


def test_classify_b2_low_energy():
    assert classify_b2(1.6, 0.5) is Branch.BRANCH1
    assert classify_b2(1.6, 0.9) is Branch.OUT_OF_RANGE


@pytest.mark.parametrize(
    "k,expected", [(1.0, math.pi / 2), (1.59, math.pi / math.sqrt(2.82)), (2.0, math.sqrt(3) * math.pi / 4)]
)
def test_tau_star_b2(k, expected):
    assert tau_star_b2(6.0, k) == pytest.approx(expected, rel=1e-15)


def test_tau_star_b2_out_of_range():
    with pytest.raises(OutOfRange):
        tau_star_b2(6.0, 3.0)


def test_branch2_fields():
    plan = optimal_fields_b2(6.0, 1.59)
    assert plan.branch is Branch.BRANCH2
    assert plan.b0 == pytest.approx(math.sqrt(2.4719), abs=1e-12)
    assert plan.bz == 0 and plan.omega_big == 0 and plan.valid
    plan = optimal_fields_b2(6.0, 1.0)
    assert (plan.b0, plan.bz, plan.omega_big) == (2.0, 0.0, 0.0)


def test_branch1_negative_bz_squared():
    assert branch1_bz_radicand(6.0, 2.0) == pytest.approx(-1 / 3, abs=1e-14)
    with pytest.raises(NegativeBzSquared) as info:
        optimal_fields_b2(6.0, 2.0)
    assert info.value.radicand == pytest.approx(-1 / 3, abs=1e-14)
    assert info.value.branch is Branch.BRANCH1


def test_branch1_fields_where_real():
    plan = optimal_fields_b2(6.0, 1.8)
    assert plan.branch is Branch.BRANCH1
    assert plan.b0 == pytest.approx(2 / math.sqrt(3) * 0.8)
    assert plan.bz ** 2 == pytest.approx(branch1_bz_radicand(6.0, 1.8))
    assert plan.omega_big == pytest.approx(2 * (0.8 + plan.bz))
    assert plan.alternatives[0].omega_big == pytest.approx(2 * (0.8 - plan.bz))


@pytest.mark.parametrize("k,expected", [(1.0, math.sqrt(2) * math.pi / 8), (1.59, math.sqrt(2) * math.pi / (4 * 2.59))])
def test_tau_star_ghz(k, expected):
    assert tau_star_ghz(14.0, k) == pytest.approx(expected, rel=1e-15)


def test_tau_star_ghz_diverges():
    with pytest.raises(DivergentTime):
        tau_star_ghz(2.0, -1.0)


def test_ghz_fields_and_energy():
    plan = optimal_fields_ghz(14.0, 1.0)
    assert plan.b0 == 2.0
    assert plan.bz == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    assert plan.omega_big == pytest.approx(4 * math.sqrt(2), abs=1e-15)
    assert plan.b0 ** 2 + plan.bz ** 2 == pytest.approx(omega_k_sq(ChainParams(1.0, 14.0)), abs=1e-12)


def test_ghz_fields_on_boundary():
    plan = optimal_fields_ghz(6.0, 1.0)
    assert (plan.b0, plan.bz, plan.omega_big) == (2.0, 0.0, 0.0)
    assert "OnWindowBoundary" in plan.diagnostics and not plan.valid


def test_ghz_fields_insufficient():
    with pytest.raises(NegativeBzSquared):
        optimal_fields_ghz(3.0, 1.0)


@pytest.mark.parametrize("k", np.linspace(-2.9, 1.9, 13))
def test_ghz_plan_reaches_one_at_tau_star(k):
    plan = optimal_fields_ghz(14.0, k)
    p = ChainParams(k, 14.0)
    assert tau13_closed(StateClass.GHZ, p, plan.field, plan.tau_star) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("k", np.linspace(-0.05, 1.69, 9))
def test_branch2_plan_returns_to_one(k):
    plan = optimal_fields_b2(6.0, k)
    p = ChainParams(k, 6.0)
    assert tau13_closed(StateClass.B2, p, plan.field, plan.tau_star) == pytest.approx(1.0, abs=1e-12)


def test_optimal_plan_dispatch():
    assert optimal_plan("w", 6.0, 1.59) == optimal_plan("b2", 6.0, 1.59)
    assert optimal_plan(StateClass.GHZ, 14.0, 1.0).branch is Branch.GHZ
    with pytest.raises(OutOfRange):
        optimal_plan(StateClass.S, 6.0, 1.0)


@pytest.mark.parametrize("w2", [6.0, 14.0])
def test_energy_identity_across_k(w2):
    checked = 0
    for k in np.linspace(-3.5, 3.5, 141):
        for build in (optimal_fields_b2, optimal_fields_ghz):
            try:
                plan = build(w2, k)
            except (OutOfRange, NegativeBzSquared, DivergentTime):
                continue
            if plan.diagnostics:
                continue
            assert plan.b0**2 + plan.bz**2 == pytest.approx(w2 - 1 - k * k, abs=1e-12)
            checked += 1
    assert checked > 50
