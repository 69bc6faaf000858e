import math

import pytest

from aoi.analytic import EstimatorOptions, exact_age_dropping, exact_age_preemption
from aoi.bounds import (Applicability, BoundKind, BoundReport,
                        mg11_ordering_bound, mm11, ub_dropping_general,
                        ub_dropping_gm, ub_preemption)
from aoi.distributions import (Deterministic, Erlang, Exponential,
                               Hyperexponential, MrlVerdict,
                               ShiftedExponential, Uniform, classify_mrl)
from aoi.errors import ZeroSuccessProbability

MED = EstimatorOptions(mc_samples=200_000, seed=6)


def test_corollary1_plug_in_examples():
    r = ub_dropping_general(Exponential(1.0), Exponential(1.0), (2.0, 6.0))
    assert r.value == pytest.approx(3.0, rel=1e-12)
    r = ub_dropping_general(Deterministic(2.0), Deterministic(1.0), (1.0, 1.0))
    assert r.value == pytest.approx(2.0, rel=1e-12)
    r = ub_dropping_general(Deterministic(1.0), Deterministic(1.5), (2.0, 4.0))
    assert r.value == pytest.approx(2.5, rel=1e-12)
    assert r.kind is BoundKind.CorollaryOneDropping
    assert r.applicability is Applicability.UNCONDITIONAL


def test_gm11_examples():
    r = ub_dropping_gm(Exponential(1.0), 1.0)
    assert r.value == pytest.approx(3.0, rel=1e-12)
    r = ub_dropping_gm(Deterministic(2.0), 1.0)
    assert r.value == pytest.approx(2.0 + 2.0 * (1.0 / (1.0 - math.exp(-2.0)) - 1.0),
                                    rel=1e-12)
    with pytest.raises(ValueError):
        ub_dropping_gm(Deterministic(0.0), 1.0)


def test_mm11_values():
    exact, bound = mm11(1.0, 1.0)
    assert (exact.value, bound.value) == (pytest.approx(2.5), pytest.approx(3.0))
    assert exact.kind is BoundKind.MM11Exact and bound.kind is BoundKind.MM11
    exact, _ = mm11(2.0, 1.0)
    assert exact.value == pytest.approx(0.5 + 2.0 - 1.0 / 3.0, rel=1e-12)
    exact, _ = mm11(100.0, 1.0)
    assert exact.value == pytest.approx(0.01 + 2.0 - 1.0 / 101.0, rel=1e-12)


def test_mg11_moment_arithmetic():
    assert mg11_ordering_bound(1.0, Exponential(1.0)).value == pytest.approx(2.5)
    assert mg11_ordering_bound(1.0, Deterministic(1.0)).value == pytest.approx(2.25)
    assert mg11_ordering_bound(2.0, Deterministic(0.0)).value == pytest.approx(2.0)
    with pytest.raises(ValueError):
        mg11_ordering_bound(0.0, Exponential(1.0))


def test_mg11_applicability_labels():
    assert mg11_ordering_bound(1.0, Exponential(1.0)).applicability is \
        Applicability.REQUIRES_DMRL_NBUE
    assert mg11_ordering_bound(
        1.0, Exponential(1.0),
        interarrival_verdict=MrlVerdict.IMRL).applicability is \
        Applicability.REVERSED_UNDER_IMRL
    assert mg11_ordering_bound(
        1.0, Exponential(1.0),
        interarrival_verdict=MrlVerdict.DMRL).applicability is \
        Applicability.REQUIRES_DMRL_NBUE


def test_corollary2_examples():
    r = ub_preemption(Exponential(1.0), Exponential(1.0))
    assert r.value == pytest.approx(2.5, rel=1e-9)  # 1 + 1*(0.5/0.5) + 0.5
    r = ub_preemption(Deterministic(2.0), Deterministic(1.0))
    assert r.value == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ZeroSuccessProbability):
        ub_preemption(Deterministic(1.0), Deterministic(2.0))


def test_applicability_is_mg11_specific():
    with pytest.raises(ValueError):
        BoundReport(value=1.0, kind=BoundKind.MM11,
                    applicability=Applicability.REQUIRES_DMRL_NBUE, inputs={})


def test_specialization_chain_corollary1_equals_gm11():
    # With geometric K moments from p = 1 - laplace(Y, mu), the general
    # bound collapses to the closed exponential-service form.
    mu = 1.3
    for y in [Exponential(1.0), ShiftedExponential(1.0, 0.5),
              Deterministic(2.0), Uniform(0.0, 2.0), Erlang(2, 1.0),
              Hyperexponential((0.5, 0.5), (0.5, 2.0))]:
        p = 1.0 - y.laplace(mu)
        km = (1.0 / p, (2.0 - p) / p**2)
        general = ub_dropping_general(y, Exponential(mu), km).value
        closed = ub_dropping_gm(y, mu).value
        assert general == pytest.approx(closed, abs=1e-12), y.describe()


def test_specialization_chain_gm11_equals_mm11():
    for lam, mu in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.7)):
        _, bound = mm11(lam, mu)
        assert ub_dropping_gm(Exponential(lam), mu).value == \
            pytest.approx(bound.value, abs=1e-12)


def test_corollary1_tight_for_deterministic_interarrivals():
    # Deterministic gaps are the equality case of the general bound.
    from aoi.analytic import moments_of_K_dropping
    for v, s in ((1.5, Exponential(1.0)), (1.0, Deterministic(1.5)),
                 (0.8, Uniform(0.2, 1.4))):
        y = Deterministic(v)
        km = moments_of_K_dropping(y, s, MED)
        bound = ub_dropping_general(y, s, km).value
        est = exact_age_dropping(y, s, MED)
        assert abs(bound - est.value) <= 3.0 * est.ci_half_width + 1e-9


def test_corollary2_dominates_exact_preemption():
    for y, s in [(Exponential(1.0), Exponential(1.0)),
                 (ShiftedExponential(1.0, 0.3), Uniform(0.1, 1.1)),
                 (Uniform(0.3, 2.0), ShiftedExponential(2.0, 0.2))]:
        bound = ub_preemption(y, s).value
        exact = exact_age_preemption(y, s).value
        assert bound >= exact - 1e-9


def test_corollary1_dominates_exact_dropping():
    from aoi.analytic import moments_of_K_dropping
    for y, s in [(ShiftedExponential(1.0, 0.5), Exponential(1.0)),
                 (Uniform(0.2, 1.8), ShiftedExponential(1.0, 0.1))]:
        km = moments_of_K_dropping(y, s, MED)
        bound = ub_dropping_general(y, s, km).value
        est = exact_age_dropping(y, s, MED)
        assert bound >= est.value - 3.0 * est.ci_half_width


def test_mg11_upper_bound_under_dmrl_and_reversal_under_imrl():
    service = Exponential(1.0)
    dmrl_y = ShiftedExponential(1.0, 0.5)
    assert classify_mrl(dmrl_y).verdict is MrlVerdict.DMRL
    exact = exact_age_dropping(dmrl_y, service, MED)
    bound = mg11_ordering_bound(dmrl_y.mean(), service).value
    assert bound >= exact.value - 3.0 * exact.ci_half_width

    imrl_y = Hyperexponential((0.5, 0.5), (0.5, 2.0))
    assert classify_mrl(imrl_y).verdict is MrlVerdict.IMRL
    exact = exact_age_dropping(imrl_y, service, MED)
    lower = mg11_ordering_bound(imrl_y.mean(), service).value
    assert lower <= exact.value + 3.0 * exact.ci_half_width
