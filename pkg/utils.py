"""
Utility functions for the project
"""

from copy import deepcopy
import hashlib
import math
import numpy as np


# Seeds and random streams

def derive_seed(master_seed: int, purpose: str, replication_id: int) -> int:
    """ Deterministic 64-bit seed for one (purpose, replication) stream of a run """
    h = hashlib.sha256()
    for part in (int(master_seed), str(purpose), int(replication_id)):
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little", signed=False)

def make_rng(master_seed: int, purpose: str, replication_id: int=0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, purpose, replication_id))


# Geometric law on {0, 1, 2, ...} parameterized by its mean

def geometric_success_prob(mu: float) -> float:
    return 1.0 / (1.0 + mu)

def geometric_cdf(a, mu: float):
    """ P(X <= a) = 1 - (mu/(1+mu))^(a+1) for integer a >= 0, 0 below the support """
    a = np.asarray(a, dtype=float)
    q = mu / (1.0 + mu)
    cdf = 1.0 - np.power(q, np.floor(a) + 1.0)
    return np.where(a < 0, 0.0, cdf)

def dkw_epsilon(n: int, confidence: float) -> float:
    """ Uniform empirical CDF band half-width licensed by the DKW(M) inequality """
    return math.sqrt(math.log(2.0 / confidence) / (2.0 * n))


# Dictionary tools

def copy_override_dict(main_dict: dict, override_dict: dict) -> dict:
    """ Recursive copying of override values from one dict to another """
    if override_dict is None:
        return {}
    invalid_overrides = {} # For keys in the override dict that don't exist in the main dict
    for key, value in override_dict.items():
        if key in main_dict:
            if isinstance(value, dict) and isinstance(main_dict[key], dict):
                sub_invalid_overrides = copy_override_dict(main_dict[key], override_dict[key])
                if sub_invalid_overrides != {}:
                    invalid_overrides[key] = sub_invalid_overrides
            else:
                main_dict[key] = deepcopy(override_dict[key])
        else:
            invalid_overrides[key] = deepcopy(override_dict[key])
    return invalid_overrides

def is_valid_key_chain(config: dict, key_chain: list[str]) -> bool:
    """ Check a sequence of keys exist in a nested dictionary """
    if config is None:
        return False
    subconfig = config
    for key in key_chain:
        if isinstance(subconfig, dict) and key in subconfig:
            subconfig = subconfig[key]
        else:
            return False
    return True
