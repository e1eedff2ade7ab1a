import numpy as np
import pytest

from noma_mec.scenarios import PRNG_CONTRACT, ScenarioParams, draw_channels, generate, noise_power


def test_noise_power_at_one_megahertz():
    assert noise_power(1e6, -174) == pytest.approx(3.98e-15, rel=1e-3)


def test_same_seed_same_scenario():
    a, b = generate(11, 5), generate(11, 5)
    np.testing.assert_array_equal(a.gains, b.gains)
    assert not np.array_equal(a.gains, generate(12, 5).gains)


def test_draw_order_contract():
    assert PRNG_CONTRACT == "pcg64-v1"
    params = ScenarioParams()
    rng = np.random.default_rng(3)
    u_d, u_g = rng.random(4), rng.random(4)
    d = 1.0 + 499.0 * u_d
    expect = -np.log1p(-u_g) / (1.0 + d**3.76) / params.noise
    np.testing.assert_allclose(draw_channels(np.random.default_rng(3), 4, params), expect, rtol=1e-15)


def test_gains_sorted_ascending():
    for seed in range(20):
        g = generate(seed, 8).gains
        assert np.all(np.diff(g) >= 0)


def test_fading_has_unit_mean():
    rng = np.random.default_rng(0)
    params = ScenarioParams(min_distance_m=0.0, radius_m=1e-9)
    g = draw_channels(rng, 200_000, params) * params.noise
    assert 0.99 <= g.mean() <= 1.01


def test_uniform_area_is_farther_on_average():
    rng = np.random.default_rng(1)
    radius = draw_channels(rng, 20_000, ScenarioParams())
    rng = np.random.default_rng(1)
    area = draw_channels(rng, 20_000, ScenarioParams(distance_law="uniform-area"))
    assert np.median(area) < np.median(radius)


def test_per_user_lists():
    sc = generate(0, 2, ScenarioParams(cap_coeff=(1e-27, 1e-28)))
    np.testing.assert_array_equal(sc.cap_coeff, [1e-27, 1e-28])
    assert len(generate(0, 1, ScenarioParams(cap_coeff=(1e-27, 1e-28))).cap_coeff) == 1
    with pytest.raises(ValueError):
        generate(0, 3, ScenarioParams(cap_coeff=(1e-27, 1e-28)))


@pytest.mark.parametrize("change", [dict(bandwidth=0.0), dict(p_max=-1.0), dict(distance_law="ring"),
                                    dict(min_distance_m=600.0), dict(cap_coeff=(-1.0,))])
def test_params_validation(change):
    with pytest.raises(ValueError):
        ScenarioParams(**change)


def test_needs_a_user():
    with pytest.raises(ValueError):
        generate(0, 0)
