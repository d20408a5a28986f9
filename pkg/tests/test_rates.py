import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import special

from spiked_tensor import (
    SpikePrior,
    binary_entropy,
    collision_entropy,
    entropy_term_G,
    exact_overlap_tail,
    local_subgaussian_sigma2,
    multi_entropy,
    overlap_tail_oracle,
    rate_function_for,
    rate_rademacher,
    rate_sparse_rademacher,
    rate_spherical,
)
from spiked_tensor.rates import binomial_tail_half, hypergeometric_pmf
from spiked_tensor.tensors import round_half_up

LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------

def test_binary_entropy_values():
    assert abs(binary_entropy(0.5) - LOG2) < 1e-15
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert abs(binary_entropy(2 / 3) - 0.6365141682948128) < 1e-12
    with pytest.raises(ValueError):
        binary_entropy(-0.1)
    with pytest.raises(ValueError):
        binary_entropy(1.1)


def test_multi_entropy_values():
    assert multi_entropy([1.0, 0.0, 0.0, 0.0]) == 0.0
    assert abs(multi_entropy([0.25] * 4) - math.log(4.0)) < 1e-15
    # product-measure multiset at rho=0.3 factorizes to 2 H(0.3)
    rho = 0.3
    probs = [rho**2, rho - rho**2, rho - rho**2, (1 - rho) ** 2]
    assert abs(multi_entropy(probs) - 2 * binary_entropy(rho)) < 1e-12
    assert abs(multi_entropy(probs) - 1.2217286041097870) < 1e-12
    with pytest.raises(ValueError):
        multi_entropy([0.5, -0.1])


# ---------------------------------------------------------------------------
# rate functions
# ---------------------------------------------------------------------------

def test_rate_spherical_values():
    assert rate_spherical(0.0) == 0.0
    assert abs(rate_spherical(0.5) - 0.14384103622589045) < 1e-14
    # divergence proxy near t=1: -log(2e-6 - 1e-12)/2
    assert rate_spherical(1 - 1e-6) == pytest.approx(6.561181938682319, abs=1e-12)
    assert rate_spherical(1 - 1e-6) > 6.5
    with pytest.raises(ValueError):
        rate_spherical(1.0)


def test_rate_rademacher_values():
    assert rate_rademacher(0.0) == 0.0
    assert abs(rate_rademacher(1.0) - LOG2) < 1e-15
    assert abs(rate_rademacher(0.5) - 0.13081203594113694) < 1e-14
    for t in np.linspace(0, 1, 101):
        assert abs(rate_rademacher(t) - (LOG2 - binary_entropy((1 + t) / 2))) < 1e-13


def test_entropy_term_zero_at_product_measure():
    for rho in (0.1, 0.3, 0.5, 0.9):
        assert abs(entropy_term_G(rho**2, rho)) < 1e-12


def test_entropy_term_full_overlap():
    assert abs(entropy_term_G(0.3, 0.3) - binary_entropy(0.3)) < 1e-12
    assert abs(entropy_term_G(0.3, 0.3) - 0.6108643020548935) < 1e-12


def test_entropy_term_strictly_positive_off_minimum():
    assert entropy_term_G(0.09 + 0.01, 0.3) > 1e-5
    assert entropy_term_G(0.09 - 0.01, 0.3) > 1e-5


def test_entropy_term_domain():
    with pytest.raises(ValueError):
        entropy_term_G(0.31, 0.3)
    with pytest.raises(ValueError):
        entropy_term_G(0.2, 0.7)  # below 2*rho - 1 = 0.4


def test_sparse_rate_boundaries():
    for rho in (0.1, 1 / 3, 2 / 3, 1.0):
        assert rate_sparse_rademacher(0.0, rho) == 0.0
        limit = binary_entropy(rho) + rho * LOG2
        assert abs(rate_sparse_rademacher(1.0, rho) - limit) < 1e-8


def test_sparse_rate_dense_reduction():
    for t in np.linspace(0.0, 0.99, 34):
        assert abs(rate_sparse_rademacher(t, 1.0) - rate_rademacher(t)) < 1e-10


def test_rate_functions_monotone_and_zero_at_origin():
    grid = np.linspace(0.0, 1.0 - 1e-6, 10_000)
    for prior in (SpikePrior.spherical(), SpikePrior.rademacher(), SpikePrior.sparse(0.3)):
        rate = rate_function_for(prior)
        vals = rate.eval_batch(grid)
        assert vals[0] == 0.0
        assert np.all(np.diff(vals) >= -1e-12)


def test_batch_matches_scalar():
    grid = np.linspace(0.0, 0.999, 41)
    for prior in (SpikePrior.spherical(), SpikePrior.rademacher(), SpikePrior.sparse(0.25)):
        rate = rate_function_for(prior)
        batch = rate.eval_batch(grid)
        scalars = np.array([rate.eval(float(t)) for t in grid])
        assert np.max(np.abs(batch - scalars)) < 1e-12


def test_collision_entropy_values():
    assert collision_entropy(SpikePrior.rademacher()) == pytest.approx(LOG2, abs=1e-15)
    assert collision_entropy(SpikePrior.sparse(2 / 3)) == pytest.approx(math.log(3.0), abs=1e-12)
    assert math.isinf(collision_entropy(SpikePrior.spherical()))


def test_collision_entropy_consistent_with_rate_limit():
    for prior in (SpikePrior.rademacher(), SpikePrior.sparse(0.4)):
        rate = rate_function_for(prior)
        assert abs(rate.eval(1 - 1e-9) - rate.collision_entropy) < 1e-6


def test_local_subgaussian_constants():
    assert local_subgaussian_sigma2(SpikePrior.spherical()) == 1.0
    assert local_subgaussian_sigma2(SpikePrior.rademacher()) == 1.0
    # curvature of the sparse rate at 0 is 1 for every rho
    for rho in (1e-4, 0.1, 0.5, 1.0):
        assert abs(local_subgaussian_sigma2(SpikePrior.sparse(rho)) - 1.0) < 0.01


# ---------------------------------------------------------------------------
# exact overlap tails
# ---------------------------------------------------------------------------

def test_rademacher_tail_small_case_enumeration():
    # n=2: relative sign patterns give overlaps {1, 0, 0, -1}
    count = sum(
        1
        for signs in itertools.product([-1, 1], repeat=2)
        if sum(signs) / 2.0 >= 0.9
    )
    assert Fraction(count, 4) == Fraction(1, 4)
    assert exact_overlap_tail(SpikePrior.rademacher(), 2, 0.9) == pytest.approx(0.25, abs=1e-15)


def test_rademacher_tail_matches_brute_force():
    n = 6
    prior = SpikePrior.rademacher()
    for t in (0.0, 0.2, 0.5, 0.9, 1.0):
        brute = np.mean(
            [sum(s) / n >= t for s in itertools.product([-1, 1], repeat=n)]
        )
        assert exact_overlap_tail(prior, n, t) == pytest.approx(float(brute), abs=1e-14)


def test_sparse_tail_matches_brute_force():
    # n=4, rho=0.5: 24 support/sign vectors; average the tail over all pairs
    n, rho = 4, 0.5
    prior = SpikePrior.sparse(rho)
    vectors = []
    for support in itertools.combinations(range(n), 2):
        for signs in itertools.product([-1.0, 1.0], repeat=2):
            v = np.zeros(n)
            v[list(support)] = np.array(signs) / math.sqrt(2)
            vectors.append(v)
    vectors = np.array(vectors)
    overlaps = vectors @ vectors.T
    for t in (0.0, 0.3, 0.5, 0.9):
        brute = float(np.mean(overlaps >= t - 1e-12))
        assert exact_overlap_tail(prior, n, t) == pytest.approx(brute, abs=1e-12)


def test_hypergeometric_pmf_small_case():
    assert hypergeometric_pmf(4, 2, 0) == Fraction(1, 6)
    assert hypergeometric_pmf(4, 2, 1) == Fraction(4, 6)
    assert hypergeometric_pmf(4, 2, 2) == Fraction(1, 6)


@given(st.integers(min_value=2, max_value=200), st.floats(min_value=0.05, max_value=1.0))
@settings(max_examples=30, deadline=None)
def test_hypergeometric_pmf_sums_to_one(n, rho):
    assume(round_half_up(rho * n) >= 1)
    k = SpikePrior.sparse(rho).nonzeros(n)
    total = sum(hypergeometric_pmf(n, k, z) for z in range(max(0, 2 * k - n), k + 1))
    assert total == Fraction(1)


def test_tail_at_zero_at_least_half():
    for prior, n in [
        (SpikePrior.rademacher(), 3),
        (SpikePrior.rademacher(), 8),
        (SpikePrior.sparse(0.5), 8),
        (SpikePrior.spherical(), 25),
    ]:
        assert exact_overlap_tail(prior, n, 0.0) >= 0.5 - 1e-12


def test_chernoff_domination_sampled_n():
    prior = SpikePrior.rademacher()
    for n in range(1, 65, 7):
        for t in np.linspace(0.0, 0.999, 50):
            tail = exact_overlap_tail(prior, n, float(t))
            assert tail <= math.exp(-n * rate_rademacher(float(t))) * (1 + 1e-12)


def test_sparse_tail_sandwich():
    # fit the poly(n) prefactor on small n, then verify it at larger n
    rho = 0.3
    prior = SpikePrior.sparse(rho)
    ts = (0.2, 0.4, 0.6)
    rates = {t: rate_sparse_rademacher(t, rho) for t in ts}

    def prefactor(n, t):
        return exact_overlap_tail(prior, n, t) / (n**1.5 * math.exp(-n * rates[t]))

    fitted = max(prefactor(n, t) for n in (40, 80, 120) for t in ts)
    for n in (160, 200):
        for t in ts:
            assert exact_overlap_tail(prior, n, t) <= fitted * n**1.5 * math.exp(
                -n * rates[t]
            ) * (1 + 1e-9)
    # and the normalized log-tail approaches the rate
    for t in ts:
        emp = -math.log(exact_overlap_tail(prior, 200, t)) / 200
        assert abs(emp - rates[t]) < 0.05


def test_spherical_tail_against_betainc():
    # independent oracle: scipy's regularized incomplete beta
    prior = SpikePrior.spherical()
    for n in (3, 10, 64, 250):
        for t in (0.0, 0.25, 0.6, 0.95):
            mine = exact_overlap_tail(prior, n, t)
            ref = float(special.betainc(n / 2, n / 2, (1 - t) / 2))
            assert mine == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_binomial_tail_helper():
    assert binomial_tail_half(4, 0) == Fraction(1)
    assert binomial_tail_half(4, 5) == Fraction(0)
    assert binomial_tail_half(4, 2) == Fraction(11, 16)


def test_oracle_wrapper():
    oracle = overlap_tail_oracle(SpikePrior.sparse(0.5), 12)
    assert oracle.method == "hypergeometric_compound"
    ts = np.linspace(0, 1, 21)
    vals = [oracle(float(t)) for t in ts]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        overlap_tail_oracle(SpikePrior.rademacher(), 500)
    with pytest.raises(ValueError):
        exact_overlap_tail(SpikePrior.sparse(0.5), 300, 0.3)
    assert overlap_tail_oracle(SpikePrior.spherical(), 5000).method == "incomplete_beta"
    assert overlap_tail_oracle(SpikePrior.rademacher(), 64).method == "binomial"
