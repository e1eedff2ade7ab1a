import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noma_mec.model import (
    Allocation,
    Scenario,
    UserProfile,
    common_offload_time,
    completion_time,
    local_energy,
    local_time,
    make_scenario,
    objective,
    offload_energy,
    offload_time,
    rate,
    rate_quotient_form,
    sinr,
    sum_rate,
    user_energy,
)


def two_users(**kw):
    base = dict(task_bits=[1.6e6, 1.6e6], cycles_per_bit=1e3, cpu_freq=1e8, cap_coeff=[1e-27, 1e-28],
                gains=[1e4, 1e5], bandwidth=1e6, p_max=0.01, e_max=0.2)
    base.update(kw)
    return make_scenario(**base)


def test_scalars_broadcast_to_every_user():
    sc = two_users()
    assert sc.num_users == 2
    np.testing.assert_array_equal(sc.cpu_freq, [1e8, 1e8])
    np.testing.assert_array_equal(sc.cap_coeff, [1e-27, 1e-28])


def test_derived_arrays_are_read_only():
    sc = two_users()
    with pytest.raises(ValueError):
        sc.gains[0] = 1.0
    alloc = Allocation([0.1, 0.2], [0.0, 0.0])
    with pytest.raises(ValueError):
        alloc.beta[0] = 0.5


def test_unsorted_gains_rejected():
    with pytest.raises(ValueError, match="sorted"):
        two_users(gains=[1e5, 1e4])


@pytest.mark.parametrize("field,value", [("task_bits", 0.0), ("cpu_freq", -1.0), ("channel_gain", math.inf)])
def test_user_profile_validation(field, value):
    kw = dict(task_bits=1.0, cycles_per_bit=1.0, cpu_freq=1.0, cap_coeff=0.0, channel_gain=1.0)
    kw[field] = value
    with pytest.raises(ValueError):
        UserProfile(**kw)


def test_scenario_validation():
    u = UserProfile(1.0, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Scenario((), 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Scenario((u,), 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Scenario((u,), 1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        Scenario((u,), 1.0, 1.0, 0.0)


def test_allocation_validate():
    sc = two_users()
    Allocation([0.0, 1.0], [0.0, 0.01]).validate(sc)
    with pytest.raises(ValueError):
        Allocation([0.0, 1.1], [0.0, 0.0]).validate(sc)
    with pytest.raises(ValueError):
        Allocation([0.0, 0.0], [0.0, 0.02]).validate(sc)
    with pytest.raises(ValueError):
        Allocation([0.0], [0.0, 0.0])


def test_weakest_user_sees_no_interference():
    sc = two_users()
    alloc = Allocation([0.5, 0.5], [0.01, 0.01])
    assert sinr(sc, alloc, 0) == pytest.approx(1e4 * 0.01)
    assert sinr(sc, alloc, 1) == pytest.approx(1e5 * 0.01 / (1 + 1e4 * 0.01))


def test_rate_forms_agree():
    sc = two_users()
    alloc = Allocation([0.5, 0.5], [0.003, 0.007])
    for m in range(2):
        assert rate(sc, alloc, m) == pytest.approx(rate_quotient_form(sc, alloc, m), rel=1e-12)


def test_sum_rate_over_all_users():
    sc = two_users()
    alloc = Allocation([0.5, 0.5], [0.01, 0.01])
    assert sum_rate(sc, alloc, 1) == pytest.approx(1e6 * math.log2(1 + 1e2 + 1e3))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-2, 1e9), st.floats(0, 1)), min_size=1, max_size=8))
def test_telescoping(users):
    gains = sorted(g for g, _ in users)
    powers = [p * 0.05 for _, p in users]
    sc = make_scenario([1e6] * len(gains), 1e3, 1e8, 0.0, gains, 1e6, 0.05, 1.0)
    alloc = Allocation([1.0] * len(gains), powers)
    for m in range(len(gains)):
        total = sum(rate(sc, alloc, i) for i in range(m + 1))
        assert total == pytest.approx(sum_rate(sc, alloc, m), rel=1e-9, abs=1e-6)


def test_times_and_energy():
    sc = two_users()
    alloc = Allocation([0.5, 0.0], [0.01, 0.0])
    r0 = rate(sc, alloc, 0)
    assert offload_time(sc, alloc, 0) == pytest.approx(0.8e6 / r0)
    assert offload_time(sc, alloc, 1) == 0.0
    assert offload_energy(sc, alloc, 1) == 0.0
    assert local_time(sc, alloc, 0) == pytest.approx(8.0)
    assert local_energy(sc, alloc, 0) == pytest.approx(0.5 * 1e-27 * 1.6e9 * 1e16)
    assert user_energy(sc, alloc, 0) == pytest.approx(local_energy(sc, alloc, 0) + 0.8e6 / r0 * 0.01)
    assert completion_time(sc, alloc, 1) == pytest.approx(16.0)
    assert objective(sc, alloc) == pytest.approx(16.0)


def test_offloading_without_power_takes_forever():
    sc = two_users()
    alloc = Allocation([0.5, 0.0], [0.0, 0.0])
    assert offload_time(sc, alloc, 0) == math.inf
    assert objective(sc, alloc) == math.inf


def test_common_offload_time():
    sc = two_users()
    alloc = Allocation([0.5, 0.25], [0.01, 0.01])
    expect = (0.5 + 0.25) * 1.6e6 / sum_rate(sc, alloc, 1)
    assert common_offload_time(sc, alloc, 1) == pytest.approx(expect)
    assert common_offload_time(sc, Allocation.zeros(2), 1) == 0.0


def test_index_out_of_range():
    with pytest.raises(IndexError):
        rate(two_users(), Allocation.zeros(2), 2)


def test_replace_keeps_users():
    sc = two_users()
    assert sc.replace(p_max=0.02).users == sc.users
