import math
import numpy as np
import pytest

from utils import copy_override_dict, derive_seed, dkw_epsilon, geometric_cdf, geometric_success_prob, is_valid_key_chain, make_rng


def test_derive_seed_is_deterministic():
    assert derive_seed(42, "env", 3) == derive_seed(42, "env", 3)


def test_derive_seed_separates_purposes_and_replications():
    assert derive_seed(42, "env", 0) != derive_seed(42, "env", 1)
    assert derive_seed(42, "env", 0) != derive_seed(42, "learner", 0)
    assert derive_seed(42, "env", 0) != derive_seed(43, "env", 0)


def test_derived_streams_have_no_first_output_collisions():
    firsts = {int(make_rng(7, "env", i).integers(2**63)) for i in range(10_000)}
    assert len(firsts) == 10_000


def test_derive_seed_fits_in_64_bits():
    assert 0 <= derive_seed(2**62, "schedule", 0) < 2**64


def test_geometric_cdf_matches_direct_summation():
    mu = 0.7
    p = geometric_success_prob(mu)
    pmf = [p * (1 - p)**k for k in range(30)]
    for a in range(30):
        assert geometric_cdf(a, mu) == pytest.approx(sum(pmf[:a+1]), abs=1e-14)


def test_geometric_cdf_below_support_is_zero():
    assert geometric_cdf(-1, 0.5) == 0.0
    assert geometric_cdf(0, 0.0) == 1.0


def test_dkw_epsilon_example():
    assert dkw_epsilon(10_000, 1e-3) == pytest.approx(0.01949, abs=1e-5)


def test_dkw_epsilon_decreases_in_n():
    values = [dkw_epsilon(n, 1e-3) for n in (100, 1000, 10_000, 100_000)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(math.sqrt(math.log(2000) / 200))


def test_copy_override_dict_reports_unknown_keys():
    main = {'a': 1, 'b': {'c': 2, 'd': 3}}
    invalid = copy_override_dict(main, {'a': 5, 'b': {'c': 7, 'x': 1}, 'y': 2})
    assert main == {'a': 5, 'b': {'c': 7, 'd': 3}}
    assert invalid == {'b': {'x': 1}, 'y': 2}


def test_copy_override_dict_replaces_none_with_structure():
    main = {'payoffs': None}
    copy_override_dict(main, {'payoffs': [1, 2]})
    assert main['payoffs'] == [1, 2]


def test_is_valid_key_chain():
    config = {'schedule': {'file': {'path': 'x'}}}
    assert is_valid_key_chain(config, ['schedule', 'file'])
    assert not is_valid_key_chain(config, ['schedule', 'drift'])
    assert not is_valid_key_chain(None, ['schedule'])


def test_make_rng_streams_reproduce():
    a = make_rng(1, "env", 2).random(5)
    b = make_rng(1, "env", 2).random(5)
    assert np.array_equal(a, b)
