import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipqmc.field import field_of_order, make_field
from ipqmc.integration import (
    ClassParams,
    Composed,
    ConstantIntegrand,
    CosProdIntegrand,
    FiniteCosineIntegrand,
    FiniteFourierIntegrand,
    RationalPoints,
    cnorm_upper,
    compose_tent,
    convergence_sweep,
    error_bound,
    first_primes_above_powers,
    fit_slope,
    knorm_upper,
    qmc_apply,
    tent,
    tent_pointset,
)
from ipqmc.pointset import period_t, size_q

INF = ClassParams()


def random_cosine(rng, s, terms=4, max_freq=3):
    coeffs = {}
    for _ in range(terms):
        k = tuple(rng.randint(0, max_freq) for _ in range(s))
        coeffs[k] = rng.uniform(-1, 1)
    return FiniteCosineIntegrand(coeffs)


def test_qmc_apply_small_example():
    f = CosProdIntegrand([1.0])
    ps = size_q(make_field(5), 1)
    # average of 1 + cos(2 pi m / 5) over m = 0..4 is exactly 1
    assert qmc_apply(ps, f) == pytest.approx(1.0, abs=1e-15)
    pts = np.array([[0.1], [0.3]])
    assert qmc_apply(pts, f) == pytest.approx(np.mean(1 + np.cos(2 * np.pi * pts[:, 0])))


def test_cosprod_integrates_to_one():
    rng = np.random.default_rng(0)
    for kind in ("fourier", "cosine"):
        f = CosProdIntegrand([0.5, 0.25, 1.0], kind)
        x = rng.random((400_000, 3))
        assert f(x).mean() == pytest.approx(1.0, abs=5e-3)


def test_knorm_examples():
    assert knorm_upper(CosProdIntegrand([1.0]), INF) == pytest.approx(1 + 2 * math.pi)
    assert knorm_upper(CosProdIntegrand([1.0, 1.0]), INF) == pytest.approx(4 + 8 * math.pi)
    assert knorm_upper(ConstantIntegrand(3), INF) == 0.0


def test_cnorm_example_and_tent_identity():
    g = FiniteCosineIntegrand({(1,): 1.0})  # sqrt 2 cos(pi x)
    assert cnorm_upper(g, INF) == pytest.approx(math.sqrt(2) + 2 * math.sqrt(2) * math.pi)
    assert cnorm_upper(g, INF) == pytest.approx(knorm_upper(compose_tent(g), INF))


def test_series_expansion_matches_product():
    rng = np.random.default_rng(1)
    x = rng.random((50, 3))
    for kind in ("fourier", "cosine"):
        f = CosProdIntegrand([0.3, 0.7, 1.0], kind)
        ser = f.to_series()
        assert np.allclose(np.real_if_close(ser(x)), f(x))
        norm = knorm_upper if kind == "fourier" else cnorm_upper
        assert norm(ser, INF) == pytest.approx(norm(f, INF))


def test_compose_tent_is_pointwise_identity():
    rng = random.Random(2)
    x = np.random.default_rng(2).random((200, 3))
    for _ in range(20):
        g = random_cosine(rng, 3)
        assert np.allclose(compose_tent(g)(x), g(tent(x)), atol=1e-12)
        assert np.allclose(Composed(g)(x), g(tent(x)))


def test_tent_pointset_exact():
    ps = size_q(make_field(5), 1)
    tp = tent_pointset(ps)
    assert tp.numerators[:, 0].tolist() == [0, 2, 4, 4, 2]
    assert np.allclose(tp.points, tent(ps.points))
    with pytest.raises(ValueError):
        tent(np.array([1.5]))
    with pytest.raises(TypeError):
        tent_pointset(ps.points)


@pytest.mark.parametrize("q", [7, 9, 16, 25])
def test_tent_transfer_on_point_sets(q):
    rng = random.Random(q)
    f = field_of_order(q)
    for ps in (size_q(f, 3), period_t(f, q - 1, 3)):
        for _ in range(5):
            g = random_cosine(rng, 3)
            assert qmc_apply(tent_pointset(ps), g) == pytest.approx(qmc_apply(ps, Composed(g)), abs=1e-12)
            assert abs(qmc_apply(tent_pointset(ps), g) - qmc_apply(ps, compose_tent(g))) < 1e-12


def test_error_bound_values():
    assert error_bound(100, 5, INF) == pytest.approx(0.3)
    assert error_bound(1, 5, INF) == pytest.approx(3.0)
    assert error_bound(4, 4, ClassParams(0.5, 2.0)) == pytest.approx(max(1.5, 4**0.25 / 2))
    with pytest.raises(ValueError):
        error_bound(0, 1, INF)
    with pytest.raises(ValueError):
        ClassParams(0.0)
    with pytest.raises(ValueError):
        ClassParams(1.0, 0.5)


def test_holder_part_dual_norms():
    f = CosProdIntegrand([1.0, 1.0])
    lip = 4 * math.pi
    assert knorm_upper(f, ClassParams(1, 1)) == pytest.approx(4 + lip)  # dual inf-norm
    assert knorm_upper(f, ClassParams(1, 2)) == pytest.approx(4 + lip * math.sqrt(2))
    # alpha < 1 can only shrink the Lipschitz part when osc and diam are small enough
    assert knorm_upper(f, ClassParams(0.5)) <= knorm_upper(f, INF) + 1e-12


def test_holder_bound_is_sound_on_samples():
    # |f(x) - f(y)| <= H |x - y|_t^alpha with H the certified Holder part
    rng = np.random.default_rng(4)
    f = CosProdIntegrand([0.8, 0.4])
    for params in (ClassParams(1.0), ClassParams(0.5, 2.0), ClassParams(0.3, 1.0)):
        H = knorm_upper(f, params) - f._weighted_sum()
        x = rng.random((20000, 2))
        y = (x + rng.normal(scale=0.05, size=x.shape)) % 1.0
        d = y - x
        d = np.minimum(np.abs(d), 1 - np.abs(d))  # periodic distance
        dist = np.max(d, axis=1) if math.isinf(params.t) else np.sum(d**params.t, axis=1) ** (1 / params.t)
        ok = dist > 0
        assert np.all(np.abs(f(x) - f(y))[ok] <= H * dist[ok] ** params.alpha + 1e-12)


def test_norm_kind_errors():
    with pytest.raises(TypeError):
        knorm_upper(CosProdIntegrand([1.0], "cosine"), INF)
    with pytest.raises(TypeError):
        cnorm_upper(CosProdIntegrand([1.0]), INF)
    with pytest.raises(ValueError):
        CosProdIntegrand([-1.0])


def test_constant_sweep_error_zero():
    res = convergence_sweep(ConstantIntegrand(2), [5, 7, 11], INF)
    assert [r.error for r in res.records] == [0.0, 0.0, 0.0]
    assert res.slope is None
    assert all(r.holds for r in res.records)


def test_sweep_over_primes_holds():
    import sympy

    qs = list(sympy.primerange(5, 1010))
    res = convergence_sweep(CosProdIntegrand([1.0, 0.25]), qs, INF)
    assert [r.q for r in res.records] == sorted(qs)
    assert all(r.holds for r in res.records)


def test_sweep_prime_powers_have_no_verdict():
    res = convergence_sweep(CosProdIntegrand([1.0, 0.25]), [9, 8, 7], INF)
    assert [r.q for r in res.records] == [7, 8, 9]
    assert [r.holds for r in res.records] == [True, None, None]


def test_sweep_csv_and_json():
    res = convergence_sweep(CosProdIntegrand([1.0, 0.25]), [7, 11], INF)
    lines = res.to_csv().splitlines()
    assert lines[0] == "q,N,s,alpha,t,error,bound,norm_upper,holds"
    assert lines[1].startswith("7,7,2,1,inf,")
    assert '"t": "inf"' in res.to_json()


def test_fit_slope():
    Ns = [10, 100, 1000]
    assert fit_slope(Ns, [1 / n for n in Ns]) == pytest.approx(-1.0)
    assert fit_slope(Ns, [0.0, 0.0, 0.0]) is None


def test_first_primes_above_powers():
    assert first_primes_above_powers(2, 6) == [5, 11, 17, 37, 67]


def test_rational_points_view():
    rp = RationalPoints(np.array([[1, 2], [3, 0]]), 4)
    assert rp.N == 2
    assert rp.points.tolist() == [[0.25, 0.5], [0.75, 0.0]]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 2), min_size=1, max_size=3), st.sampled_from([5, 7, 11, 13]))
def test_fourier_sum_bound_on_prime_sets(amps, q):
    f = CosProdIntegrand(amps)
    ps = size_q(field_of_order(q), f.s)
    err = abs(qmc_apply(ps, f) - 1)
    assert err <= error_bound(ps.N, f.s, INF) * knorm_upper(f, INF) + 1e-12


def test_finite_fourier_integral_and_error():
    f = FiniteFourierIntegrand({(0, 0): 1.0, (1, 2): 0.5j, (-1, 0): 0.25})
    assert f.integral == 1.0
    ps = size_q(make_field(7), 2)
    err = abs(qmc_apply(ps, f) - f.integral)
    assert err <= error_bound(7, 2, INF) * knorm_upper(f, INF)


def test_quadrature_error_equals_character_sum_expansion():
    from ipqmc.charsum import charsum, max_abs_charsum

    q = 11
    ps = size_q(field_of_order(q), 2)
    coeffs = {(0, 0): 1.0, (1, 0): 0.5, (2, -3): 0.25 - 0.5j, (0, 4): 0.125, (-5, 1): 0.3}
    f = FiniteFourierIntegrand(coeffs)
    err = qmc_apply(ps, f) - f.integral
    expansion = sum(c * charsum(ps, (1, 2), (h[0] % q, h[1] % q)) / q for h, c in coeffs.items() if any(h))
    assert abs(err - expansion) < 1e-12
    M = max_abs_charsum(ps, (1, 2)).max_abs
    assert abs(err) <= sum(abs(c) for h, c in coeffs.items() if any(h)) * M / q + 1e-12
