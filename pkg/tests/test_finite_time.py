import math

import numpy as np
import pytest
from scipy.stats import poisson

from ringtasep.errors import NegativeTime, ShapeMismatch, TruncationOverflow
from ringtasep.finite_time import (FREDHOLM_RADII, Configuration,
                                   QuadratureSpec,
                                   flat_configuration, generator_oracle,
                                   one_point_flat, one_point_general,
                                   one_point_step, step_configuration,
                                   transition_probability)
from ringtasep.ring_bethe import SystemShape


def oracle_tail(Y, k, t):
    law = generator_oracle(Y, t)
    def tail(a):
        return sum(p for x, p in law.items() if x[k - 1] >= a)
    return tail


def test_configuration_validation():
    shape = SystemShape(5, 2)
    Configuration((0, 3), shape)
    with pytest.raises(ShapeMismatch):
        Configuration((0, 0), shape)
    with pytest.raises(ShapeMismatch):
        Configuration((0, 5), shape)
    with pytest.raises(ShapeMismatch):
        Configuration((0, 1, 2), shape)
    assert flat_configuration(2, 3).positions == (2, 4, 6)
    assert step_configuration(5, 2).positions == (-1, 0)


def test_time_zero_is_delta():
    Y = flat_configuration(2, 2)
    assert transition_probability(Y, Y, 0.0).value == pytest.approx(1.0, abs=1e-12)
    other = Configuration((2, 5), Y.shape)
    assert abs(transition_probability(Y, other, 0.0).value) < 1e-12
    with pytest.raises(NegativeTime):
        transition_probability(Y, Y, -1.0)


def test_oracle_is_a_probability_law():
    Y = step_configuration(6, 3)
    law = generator_oracle(Y, 1.5)
    assert sum(law.values()) == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(TruncationOverflow):
        generator_oracle(Y, 20.0, cap=100)


def test_transition_probability_matches_oracle():
    Y = Configuration((0, 2), SystemShape(5, 2))
    t = 1.3
    law = generator_oracle(Y, t)
    X = sorted(law, key=law.get, reverse=True)[:12]
    res = transition_probability(Y, [Configuration(x, Y.shape) for x in X], t)
    for x, r in zip(X, res):
        assert abs(r.value - law[x]) < 1e-10
        assert r.imag_residue < 1e-10


def test_general_one_point_matches_oracle():
    Y = Configuration((0, 1, 4), SystemShape(7, 3))
    t, k = 1.0, 2
    tail = oracle_tail(Y, k, t)
    a = list(range(Y.positions[k - 1] - 1, Y.positions[k - 1] + 9))
    res = one_point_general(Y, k, a, t)
    for ai, r in zip(a, res):
        assert abs(r.value - tail(ai)) < 1e-10


@pytest.mark.parametrize('k', [1, 2, 3])
def test_flat_and_step_agree_with_general(k):
    t = 0.8
    Y = flat_configuration(2, 3)
    a = list(range(2 * k - 1, 2 * k + 5))
    flat = one_point_flat(2, 3, k, a, t)
    gen = one_point_general(Y, k, a, t)
    for f, g in zip(flat, gen):
        assert abs(f.value - g.value) < 1e-9

    Y = step_configuration(7, 3)
    a = list(range(-3 + k, -3 + k + 6))
    step = one_point_step(7, 3, k, a, t)
    gen = one_point_general(Y, k, a, t)
    for s, g in zip(step, gen):
        assert abs(s.value - g.value) < 1e-9


def test_free_particle_is_poisson():
    t = 2.5
    Y = Configuration((0,), SystemShape(4, 1))
    a = list(range(0, 12))
    exact = poisson.sf(np.array(a) - 1, t)
    gen = one_point_general(Y, 1, a, t)
    step = one_point_step(4, 1, 1, a, t)
    assert max(abs(g.value - e) for g, e in zip(gen, exact)) < 1e-10
    assert max(abs(s.value - e) for s, e in zip(step, exact)) < 1e-10


def test_scalar_threshold_returns_single_result():
    r = one_point_flat(2, 2, 1, 3, 1.0)
    assert 0.0 < float(r) < 1.0


def test_radius_independence_of_flat_formula():
    a = [3, 4, 5, 6]
    r4 = one_point_flat(2, 3, 1, a, 1.0, QuadratureSpec(radius=0.4),
                        auto_radius=False)
    r6 = one_point_flat(2, 3, 1, a, 1.0, QuadratureSpec(radius=0.6),
                        auto_radius=False)
    assert max(abs(x.value - y.value) for x, y in zip(r4, r6)) < 1e-10


def test_cancellation_diagnostic_grows_in_the_tail():
    res = one_point_flat(2, 3, 1, [3, 12], 1.0)
    assert res[1].cancellation > res[0].cancellation


def test_automatic_radius_tames_the_small_ring_tail():
    # L=2, N=1 is a free particle; at a=12 the Poisson tail is about 1.4e-6
    a = [4, 12]
    exact = poisson.sf(np.array(a) - 1, 2.0)
    fixed = one_point_step(2, 1, 1, a, 2.0, auto_radius=False)
    auto = one_point_step(2, 1, 1, a, 2.0)
    err_fixed = abs(fixed[1].value - exact[1])
    err_auto = abs(auto[1].value - exact[1])
    assert err_auto < err_fixed
    assert auto[1].radius in FREDHOLM_RADII
    assert abs(auto[0].value - exact[0]) < 1e-12
