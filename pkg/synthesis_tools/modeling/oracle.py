"""
Oracles give the search a prior policy over moves and a value for a
state. Priors are always masked to the legal moves and renormalized.
"""
import numpy as np

from synthesis_tools.modeling.tnn import infer

import logging
logger = logging.getLogger(__name__)

def mask_policy(policy, legal, move_count):
    """Restricts `policy` to the `legal` moves and renormalizes it

    Falls back to the uniform distribution over legal moves when every
    legal entry is 0.

    Parameters
    ----------
    policy : array_like
        Raw policy over `move_count` moves
    legal : iterable of int
    move_count : int

    Returns
    -------
    prior : ndarray
    """
    legal = list(legal)
    prior = np.zeros(move_count)
    if not legal:
        return prior
    prior[legal] = np.clip(np.asarray(policy, dtype=np.float64)[legal], 0.0, None)
    total = prior.sum()
    if total > 0:
        prior /= total
    else:
        prior[legal] = 1.0 / len(legal)
    return prior

class oracle(object):
    """Base class

    Subclasses implement :meth:`raw`, returning an unmasked policy and a
    value in [0, 1].
    """
    def raw(self, spec, state):
        raise NotImplementedError

    def evaluate(self, spec, state):
        """Prior over legal moves and value of `state`

        Returns
        -------
        prior : ndarray
            Sums to 1 over ``spec.legal(state)``
        value : float
        """
        policy, value = self.raw(spec, state)
        return mask_policy(policy, spec.legal(state), spec.move_count), float(value)

class uniform_oracle(oracle):
    """Uniform prior over the legal moves and constant value 0.5"""
    def raw(self, spec, state):
        return np.ones(spec.move_count), 0.5

class heuristic_oracle(oracle):
    """Uniform prior and a hand-written value function

    Parameters
    ----------
    value_fn : callable
        Maps a state to a value in [0, 1]
    """
    def __init__(self, value_fn):
        self.value_fn = value_fn

    def raw(self, spec, state):
        return np.ones(spec.move_count), self.value_fn(state)

class tnn_oracle(oracle):
    """Prior and value predicted by a tree neural network

    States are converted to terms with ``spec.encode``.
    """
    def __init__(self, model):
        self.model = model

    def raw(self, spec, state):
        return infer(self.model, spec.encode(state))
