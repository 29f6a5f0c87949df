import pytest

from absadmm.schedulers import (
    SchedulerParams,
    TauAccumulator,
    abs_sadmm_batch,
    abs_vr_batch,
    static_batch,
    tau_update,
)


def _sp(**kw):
    base = dict(c_tau=1.0, c_eps=3.0, epsilon=1e-3, sigma2=1.0, n=10**6, tau_init=0.0)
    base.update(kw)
    return SchedulerParams(**base)


def test_static_frozen():
    assert static_batch(_sp()) == 3000
    assert static_batch(_sp(n=100)) == 100
    assert static_batch(_sp(sigma2=0.0)) == 1  # floor at one sample


def test_static_ceil():
    # 2999.2 rounds up
    assert static_batch(_sp(sigma2=2999.2 / 3000.0)) == 3000


def test_abs_sadmm_frozen():
    # progress term 1*1/0.01 = 100 beats the 3000 cap
    assert abs_sadmm_batch(_sp(), prev_diff_sq=0.01) == 100
    # zero displacement disables the progress term
    assert abs_sadmm_batch(_sp(), prev_diff_sq=0.0) == 3000
    assert abs_sadmm_batch(_sp(n=50), prev_diff_sq=0.0) == 50


def test_abs_sadmm_exact_n_boundary():
    # c_tau*sigma2/diff^2 == n exactly stays at n
    sp = _sp(n=50)
    assert abs_sadmm_batch(sp, prev_diff_sq=1.0 / 50.0) == 50


def test_abs_sadmm_ceil():
    assert abs_sadmm_batch(_sp(), prev_diff_sq=1.0 / 99.2) == 100


def test_abs_vr_matches_rule():
    sp = _sp(c_tau=2.0, sigma2=3.0)
    # 2*3/tau vs 3*3/1e-3 = 9000 vs n
    assert abs_vr_batch(sp, tau=0.5) == 12
    assert abs_vr_batch(sp, tau=0.0) == 9000
    assert abs_vr_batch(_sp(n=40), tau=1e-9) == 40


def test_batch_floor():
    assert abs_sadmm_batch(_sp(sigma2=1e-12), prev_diff_sq=10.0) == 1
    assert abs_vr_batch(_sp(sigma2=1e-12), tau=10.0) == 1


def test_tau_accumulator_window():
    acc = TauAccumulator(divisor=5, value_for_next_epoch=100.0)
    for _ in range(5):
        tau_update(acc, 1.0)
    assert acc.value_for_next_epoch == 100.0  # unchanged until the window closes
    acc.roll_epoch()
    assert acc.value_for_next_epoch == pytest.approx(1.0)
    assert acc.running_sum == 0.0
    # second window is independent
    for _ in range(5):
        tau_update(acc, 2.0)
    acc.roll_epoch()
    assert acc.value_for_next_epoch == pytest.approx(2.0)


def test_tau_update_validation():
    acc = TauAccumulator(divisor=3, value_for_next_epoch=0.0)
    with pytest.raises(ValueError):
        tau_update(acc, -1.0)
    with pytest.raises(ValueError):
        TauAccumulator(divisor=0, value_for_next_epoch=0.0)


def test_scheduler_params_validation():
    with pytest.raises(ValueError):
        _sp(c_tau=0.0)
    with pytest.raises(ValueError):
        _sp(epsilon=0.0)
    with pytest.raises(ValueError):
        _sp(sigma2=-1.0)
    with pytest.raises(ValueError):
        _sp(n=0)
    with pytest.raises(ValueError):
        _sp(tau_init=-0.1)
