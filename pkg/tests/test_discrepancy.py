import itertools
import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipqmc.discrepancy import (
    BudgetExceeded,
    WeightSpec,
    aux_T,
    inverse_M,
    etk_bound,
    min_q_for_eps,
    parse_weights,
    smallest_prime_power_at_least,
    star_discrepancy_exact,
    star_discrepancy_mc,
    star_discrepancy_naive,
    thm1_bound,
    thm2_rate_check,
    weighted_star_discrepancy_direct,
    weighted_star_discrepancy_exact,
)
from ipqmc.field import field_of_order, make_field, prime_power
from ipqmc.pointset import period_t, size_q


def one_dim_formula(xs):
    """Closed form in one dimension: 1/(2N) + max_i |x_(i) - (2i - 1)/(2N)|."""
    xs = sorted(Fraction(x) for x in xs)
    N = len(xs)
    return Fraction(1, 2 * N) + max(abs(x - Fraction(2 * i - 1, 2 * N)) for i, x in enumerate(xs, start=1))


def test_gf5_pair_pinned_value():
    res = star_discrepancy_exact(size_q(make_field(5), 2))
    assert res.value == Fraction(9, 25)
    assert res.corner == (Fraction(4, 5), Fraction(4, 5))
    assert res.closed
    assert res.to_json()["value"] == "9/25"


@pytest.mark.parametrize("q", [4, 5, 7, 8, 9, 16, 25])
def test_one_dim_projection_is_one_over_q(q):
    ps = size_q(field_of_order(q), 1)
    assert star_discrepancy_exact(ps).value == Fraction(1, q)


def test_one_dim_matches_closed_form():
    rng = random.Random(3)
    for _ in range(50):
        N = rng.randint(1, 30)
        xs = [Fraction(rng.randrange(64), 64) for _ in range(N)]
        assert star_discrepancy_exact([[x] for x in xs]).value == one_dim_formula(xs)


@pytest.mark.parametrize("q,s", [(4, 2), (5, 3), (7, 2), (8, 3), (9, 2), (11, 2), (13, 3)])
def test_exact_matches_naive_on_inversive_sets(q, s):
    f = field_of_order(q)
    assert star_discrepancy_exact(size_q(f, s)).value == star_discrepancy_naive(size_q(f, s))
    T = max(d for d in range(1, q - 1) if (q - 1) % d == 0)
    pt = period_t(f, T, s)
    assert star_discrepancy_exact(pt).value == star_discrepancy_naive(pt)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(0, 15), min_size=1, max_size=36))
def test_exact_matches_naive_random(s, flat):
    n = max(1, len(flat) // s)
    flat = (flat * s)[: n * s]
    pts = [[Fraction(v, 16) for v in flat[i * s : (i + 1) * s]] for i in range(n)]
    assert star_discrepancy_exact(pts).value == star_discrepancy_naive(pts)


def test_monte_carlo_is_a_lower_estimate():
    ps = size_q(field_of_order(16), 3)
    exact = star_discrepancy_exact(ps).real
    mc = star_discrepancy_mc(ps.points, n_anchors=200_000)
    assert mc <= exact + 1e-12
    assert mc > 0.5 * exact


def test_discrepancy_range_and_errors():
    res = star_discrepancy_exact([[Fraction(0)]])
    assert res.value == 1
    with pytest.raises(ValueError):
        star_discrepancy_exact([[Fraction(1)]])
    with pytest.raises(BudgetExceeded):
        star_discrepancy_exact(size_q(field_of_order(32), 3), budget=1000)


def test_weighted_gf5():
    ps = size_q(make_field(5), 2)
    w = WeightSpec.power(1.0, 2.0)
    res = weighted_star_discrepancy_exact(ps, w)
    assert res.value == pytest.approx(0.2)
    assert weighted_star_discrepancy_direct(ps, w) == pytest.approx(res.value)


@pytest.mark.parametrize("q,s", [(5, 3), (7, 3), (8, 3), (9, 2), (11, 3)])
def test_weighted_projection_agrees_with_direct(q, s):
    ps = size_q(field_of_order(q), s)
    for w in (WeightSpec.constant(1.0), WeightSpec.power(2.0, 1.0), WeightSpec.sequence([0.1, 1.0, 0.5])):
        assert weighted_star_discrepancy_direct(ps, w) == pytest.approx(weighted_star_discrepancy_exact(ps, w).value, abs=1e-15)


def test_weighted_max_order_flags_lower_bound():
    ps = size_q(field_of_order(7), 3)
    res = weighted_star_discrepancy_exact(ps, WeightSpec.constant(1.0), max_order=2)
    assert res.lower_bound
    assert res.value <= weighted_star_discrepancy_exact(ps, WeightSpec.constant(1.0)).value + 1e-15


def test_parse_weights(tmp_path):
    assert parse_weights("const:0.5").weight((1, 2)) == 0.25
    assert parse_weights("power:1/j^2").weight((2, 3)) == pytest.approx(1 / 36)
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"1": 1.0, "1,2": 0.25}))
    w = parse_weights(f"explicit:@{path}")
    assert w.weight((1, 2)) == 0.25 and w.weight((2,)) == 0.0
    for bad in ("foo", "const:", "power:1/k^2", "const:-1"):
        with pytest.raises(ValueError):
            parse_weights(bad)


def test_aux_T_and_etk_values():
    assert aux_T(16, 2) == pytest.approx(9.0)
    assert aux_T(4, 2) == pytest.approx(4.0)
    assert aux_T(3, 1) == pytest.approx(2.0994, abs=1e-4)
    assert aux_T(5, 1) == pytest.approx(2 / math.pi * math.log(5) + 1.4)
    assert aux_T(9, 2) == pytest.approx(((2 / math.pi) * math.log(3) + 1.4) ** 2 * 4)
    assert etk_bound(1, 5, 5, 0.0) == pytest.approx(0.2)
    assert etk_bound(1, 7, 7, 2 * math.sqrt(7) + 1) == pytest.approx(2.514, abs=1e-3)
    assert etk_bound(2, 5, 5, 7.472) == pytest.approx(9.186, abs=2e-3)


def test_thm1_values():
    assert thm1_bound("size-q", WeightSpec.constant(1.0), 1, 5) == pytest.approx(3.45294, abs=1e-4)
    assert thm1_bound("period-T", WeightSpec.constant(1.0), 1, 7, T=3) == pytest.approx(7.12448, abs=1e-4)
    with pytest.raises(ValueError):
        thm1_bound("period-T", WeightSpec.constant(1.0), 1, 7)


def test_thm1_large_q_power_weights():
    # direct evaluation of max_r (prod_{j<=r} 1/j^2) r (1/q + 3 A^r / sqrt q)
    q = 10**6 + 3
    A = 2 / math.pi * math.log(q) + 1.4
    direct = max(
        math.prod(1 / j**2 for j in range(1, r + 1)) * r * (1 / q + 3 * A**r / math.sqrt(q)) for r in range(1, 60)
    )
    assert thm1_bound("size-q", WeightSpec.power(1.0, 2.0), 60, q) == pytest.approx(direct, rel=1e-12)
    assert thm1_bound("size-q", WeightSpec.power(1.0, 2.0), q, q) == pytest.approx(direct, rel=1e-12)


def test_thm1_product_weights_match_explicit_enumeration():
    rng = random.Random(5)
    for _ in range(20):
        s = rng.randint(1, 6)
        gammas = [rng.uniform(0, 2) for _ in range(s)]
        q = rng.choice([5, 8, 9, 49, 101])
        prod = WeightSpec.sequence(gammas)
        table = {}
        for r in range(1, s + 1):
            for u in itertools.combinations(range(1, s + 1), r):
                table[u] = math.prod(gammas[j - 1] for j in u)
        expl = WeightSpec.explicit(table)
        assert thm1_bound("size-q", prod, s, q) == pytest.approx(thm1_bound("size-q", expl, s, q), rel=1e-12)


def test_thm1_monotone_in_weights():
    a = thm1_bound("size-q", WeightSpec.constant(0.5), 4, 49)
    b = thm1_bound("size-q", WeightSpec.constant(1.0), 4, 49)
    assert a <= b


def test_rate_check_structure():
    rc = thm2_rate_check(WeightSpec.power(1.0, 2.0), 0.1, [2**m for m in range(10, 14)])
    assert len(rc.ratios) == 2
    assert rc.threshold == pytest.approx(2**-0.8 + 0.1)
    assert rc.passed == all(r <= rc.threshold for r in rc.ratios)
    const = thm2_rate_check(WeightSpec.constant(1.0), 0.1, [2**m for m in range(6, 10)])
    assert not const.passed
    with pytest.raises(ValueError):
        thm2_rate_check(WeightSpec.sequence([1.0, 2.0]), 0.1, [4, 8, 16], s_of_q=lambda q: 2)


def test_inverse_eps_pinned():
    assert min_q_for_eps(0.5, 0, 1) == 4
    assert min_q_for_eps(0.1, 0, 1) == 101
    assert inverse_M(0.1, 0, 1) == 100
    assert min_q_for_eps(1 - 1e-9, 0, 1) == 2


def test_smallest_prime_power_brute_force():
    for M in range(2, 3000):
        q = smallest_prime_power_at_least(M)
        brute = next(n for n in range(M, 2 * M) if prime_power(n))
        assert q == brute


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 0.4), st.floats(1.0, 10.0))
def test_min_q_in_bertrand_window(eps, delta, c):
    M = inverse_M(eps, delta, c)
    q = min_q_for_eps(eps, delta, c)
    assert prime_power(q) is not None
    assert M <= q < 2 * M
    assert (c / eps) ** (2 / (1 - 2 * delta)) <= M * (1 + 1e-12)


def test_inverse_eps_domain_errors():
    for args in [(0, 0, 1), (1, 0, 1), (0.5, 0.5, 1), (0.5, 0, 0)]:
        with pytest.raises(ValueError):
            inverse_M(*args)


def test_weights_validation():
    with pytest.raises(ValueError):
        WeightSpec.constant(-1)
    with pytest.raises(ValueError):
        WeightSpec.explicit({(1,): -0.5})
    assert WeightSpec.power(1, 2).is_nonincreasing(10)
    assert not WeightSpec.sequence([1, 2]).is_nonincreasing(2)
    assert np.isclose(WeightSpec.power(1, 2).weight(()), 1.0)
