"""
Problem selection and success statistics of the learning loop
"""
import numpy as np

import logging
logger = logging.getLogger(__name__)

def streak_score(history):
    """Inverse length of the constant suffix of `history`

    Parameters
    ----------
    history : list of bool
        Attempt outcomes, oldest first

    Returns
    -------
    score : float

    Raises
    ------
    ValueError
        On an empty history
    """
    if len(history) == 0:
        raise ValueError("Streak score of a problem never attempted")
    last = history[-1]
    s = 0
    for outcome in reversed(history):
        if outcome != last:
            break
        s += 1
    return 1.0 / s

def is_positive(history):
    """Attempted, and solved at the last attempt"""
    return len(history) > 0 and bool(history[-1])

def _draw(ids, scores, n, rng):
    if n >= len(ids):
        return list(ids)
    p = np.asarray(scores, dtype=np.float64)
    idx = rng.choice(len(ids), size=n, replace=False, p=p / p.sum())
    return [ids[i] for i in idx]

def select_problems(records, positives, negatives, rng):
    """Draws problems to attempt in a generation

    Positive and negative problems are drawn separately without
    replacement, with probabilities proportional to their streak
    scores. Problems never attempted are negatives with score 1. A
    class short of problems is not completed from the other one.

    Parameters
    ----------
    records : list
        Objects with `id` and `history` attributes
    positives, negatives : int
        Number of problems to draw from each class
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    ids : list of int
        Sorted
    """
    pos_ids, pos_scores, neg_ids, neg_scores = [], [], [], []
    for r in records:
        if is_positive(r.history):
            pos_ids.append(r.id)
            pos_scores.append(streak_score(r.history))
        else:
            neg_ids.append(r.id)
            neg_scores.append(streak_score(r.history) if r.history else 1.0)

    chosen = _draw(pos_ids, pos_scores, positives, rng) + _draw(neg_ids, neg_scores, negatives, rng)
    logger.debug(f"Selected {min(positives, len(pos_ids))} positive and {min(negatives, len(neg_ids))} negative problems")
    return sorted(chosen)

def expectancy(records, last=5):
    """Sum over problems of the success frequency of the last attempts"""
    total = 0.0
    for r in records:
        recent = r.history[-last:]
        if recent:
            total += sum(bool(x) for x in recent) / len(recent)
    return total

def solved_at_least_once(records):
    return sum(1 for r in records if any(r.history))
