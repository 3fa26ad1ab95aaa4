"""
MNL choice probabilities and expected payoff

The formulas accept any non-negative attraction array, not only true parameters in [0, 1],
because the learner evaluates them on its upper confidence bounds.
"""

import numpy as np

from ChoiceModelTypes import Assortment, ItemCatalog, NO_PURCHASE
from LabErrors import DomainError


def _weights(omega: np.ndarray, s: Assortment) -> np.ndarray:
    if not s:
        return np.zeros(0)
    return np.asarray(omega, dtype=float)[np.asarray(s, dtype=int) - 1]


def choice_prob(omega: np.ndarray, s: Assortment, j: int) -> float:
    """ p(j, S) = omega_j / (1 + sum_S omega), p(0, S) = 1 / (1 + sum_S omega) """
    if j != NO_PURCHASE and j not in s:
        raise DomainError(f"Item {j} is neither offered in {s} nor the no-purchase option")
    denominator = 1.0 + float(_weights(omega, s).sum())
    if j == NO_PURCHASE:
        return 1.0 / denominator
    return float(omega[j-1]) / denominator


def choice_probs(omega: np.ndarray, s: Assortment) -> np.ndarray:
    """ Probabilities of [no-purchase, s_1, ..., s_k] in that order """
    w = _weights(omega, s)
    return np.concatenate(([1.0], w)) / (1.0 + w.sum())


def expected_payoff(omega: np.ndarray, catalog: ItemCatalog, s: Assortment) -> float:
    """ R(S, omega) = sum_{j in S} r_j omega_j / (1 + sum_{j in S} omega_j) """
    if not s:
        return 0.0
    idx = np.asarray(s, dtype=int) - 1
    w = np.asarray(omega, dtype=float)[idx]
    return float(np.dot(catalog.payoffs[idx], w) / (1.0 + w.sum()))
