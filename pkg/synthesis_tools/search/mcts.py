"""
Monte Carlo Tree Search guided by the PUCT formula

Search problems are described by a :class:`search_spec`. Leaves are
evaluated by an oracle (no roll-outs) and their reward is backed up
along the path: 1 for a won state, 0 for a lost state and the oracle
value otherwise.

A *big step* runs one search from the current state and plays the most
visited root move. Each big step starts from a fresh tree.
"""
import enum
import time

import numpy as np

from synthesis_tools.modeling.tnn import train_example
from synthesis_tools.errors import SearchError

import logging
logger = logging.getLogger(__name__)

class Status(enum.Enum):
    WON = 'won'
    LOST = 'lost'
    ONGOING = 'ongoing'

class Outcome(enum.Enum):
    WON = 'won'
    LOST = 'lost'
    EXHAUSTED = 'exhausted'

class search_spec(object):
    """A single-player search problem

    Subclasses define the move alphabet (``move_count`` moves numbered
    from 0) and implement the state transitions. :meth:`apply` is only
    called on ongoing states with a legal move.
    """
    move_count = 0

    @property
    def initial_state(self):
        raise NotImplementedError

    def apply(self, state, move):
        raise NotImplementedError

    def status(self, state):
        raise NotImplementedError

    def legal(self, state):
        raise NotImplementedError

    def encode(self, state):
        """Term representation of `state` for the TNN"""
        raise NotImplementedError

    def move_label(self, move):
        return str(move)

class search_budget(object):
    """Stopping rule of a search

    Parameters
    ----------
    max_simulations : int, optional
    max_time : float, optional
        Seconds of wall-clock time
    """
    def __init__(self, max_simulations=None, max_time=None):
        if max_simulations is None and max_time is None:
            raise ValueError("A search budget needs a simulation count or a time limit")
        self.max_simulations = max_simulations
        self.max_time = max_time

    def exhausted(self, n_simulations, start):
        if self.max_simulations is not None and n_simulations >= self.max_simulations:
            return True
        if self.max_time is not None and time.monotonic() - start >= self.max_time:
            return True
        return False

    def __repr__(self):
        return f"search_budget(max_simulations={self.max_simulations}, max_time={self.max_time})"

class search_node(object):
    """A node of the search tree

    Attributes
    ----------
    state
    status : :class:`Status`
    legal : list of int
        Legal moves (empty for end states)
    prior : ndarray
        Oracle prior over moves (zeros for end states)
    N : ndarray
        Visit count of each child edge
    W : ndarray
        Sum of the rewards backed up through each child edge
    children : dict
        Move to child node
    value : float
        Oracle value, or the reward of an end state
    depth : int
        Number of moves from the problem start
    visits : int
        Visit total, counting the creation visit
    """
    __slots__ = ('state', 'status', 'legal', 'prior', 'N', 'W', 'children', 'value', 'depth', 'visits')

    def __init__(self, state, status, prior, value, depth, legal=()):
        m = len(prior)
        self.state = state
        self.status = status
        self.legal = legal
        self.prior = prior
        self.N = np.zeros(m, dtype=np.int64)
        self.W = np.zeros(m, dtype=np.float64)
        self.children = {}
        self.value = value
        self.depth = depth
        self.visits = 1

    @property
    def is_end(self):
        return self.status is not Status.ONGOING

    def q(self, move):
        n = self.N[move]
        return self.W[move] / n if n > 0 else 0.0

class search_tree(object):
    def __init__(self, root):
        self.root = root
        self.n_simulations = 0
        self.n_nodes = 1
        self.first_win = root.state if root.status is Status.WON else None

    def nodes(self):
        """Iterates over every node"""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

def _evaluate_node(spec, oracle, state, depth, max_depth):
    status = spec.status(state)
    if status is Status.ONGOING and max_depth is not None and depth >= max_depth:
        status = Status.LOST
    legal = sorted(spec.legal(state)) if status is Status.ONGOING else []
    if status is Status.ONGOING and not legal:
        status = Status.LOST

    if status is Status.WON:
        return search_node(state, status, np.zeros(spec.move_count), 1.0, depth)
    if status is Status.LOST:
        return search_node(state, status, np.zeros(spec.move_count), 0.0, depth)

    prior, value = oracle.evaluate(spec, state)
    return search_node(state, status, prior, value, depth, legal)

def puct_select(node, c_explore=2.0):
    """Legal move maximizing Q(i) + c * P(i) * sqrt(sum N) / (1 + N(i))

    Ties go to the lowest move index.

    Raises
    ------
    SearchError
        On an end state or without legal moves
    """
    if node.is_end or not node.legal:
        raise SearchError("No move can be selected from an end state")
    sqrt_total = np.sqrt(node.N.sum())
    best, best_score = None, -np.inf
    for i in node.legal:
        score = node.q(i) + c_explore * node.prior[i] * sqrt_total / (1 + node.N[i])
        if score > best_score:
            best, best_score = i, score
    return best

def simulate(tree, spec, oracle, c_explore=2.0, max_depth=None):
    """One selection/expansion/backup iteration

    Descends with :func:`puct_select` until a missing child or an end
    state is reached. A missing child is created and evaluated; reaching
    an existing end state backs up its reward without creating a node.
    """
    node = tree.root
    if node.is_end:
        raise SearchError("Cannot simulate from an end state")

    path = []
    while True:
        if node.is_end:
            node.visits += 1
            reward = node.value
            break
        move = puct_select(node, c_explore)
        path.append((node, move))
        child = node.children.get(move)
        if child is None:
            child = _evaluate_node(spec, oracle, spec.apply(node.state, move), node.depth + 1, max_depth)
            node.children[move] = child
            tree.n_nodes += 1
            if child.status is Status.WON and tree.first_win is None:
                tree.first_win = child.state
            reward = child.value
            break
        node = child

    for parent, move in path:
        parent.N[move] += 1
        parent.W[move] += reward
        parent.visits += 1

    tree.n_simulations += 1
    return tree

def _noise(legal, move_count, kind, rng):
    u = np.zeros(move_count)
    if kind == 'flat':
        u[legal] = 1.0
    elif kind == 'random':
        u[legal] = rng.uniform(0.0, 1.0, size=len(legal))
    else:
        raise ValueError(f"Unknown noise kind '{kind}'")
    total = u.sum()
    if total <= 0:
        u[legal] = 1.0
        total = len(legal)
    return u / total

def search(spec, oracle, root_state, budget, noise=None, noise_kind='flat', c_explore=2.0,
           max_depth=None, root_depth=0, stop_on_win=False, rng=None):
    """Builds a search tree from a fresh root

    Parameters
    ----------
    spec : :class:`search_spec`
    oracle : :class:`synthesis_tools.modeling.oracle.oracle`
    root_state
    budget : :class:`search_budget`
    noise : float, optional
        Weight of the exploration noise mixed into the root prior
    noise_kind : {'flat', 'random'}
        Uniform distribution over legal moves, or renormalized
        Uniform(0,1) draws
    c_explore : float
    max_depth : int, optional
        Non-won states at this depth from the problem start are lost
    root_depth : int
        Depth of `root_state` from the problem start
    stop_on_win : bool
        Stop as soon as a won state is created
    rng : :class:`numpy.random.Generator`, optional

    Returns
    -------
    tree : :class:`search_tree`

    Raises
    ------
    SearchError
        If `root_state` is an end state
    """
    if spec.status(root_state) is not Status.ONGOING:
        raise SearchError("The root of a search must be an ongoing state")
    legal = sorted(spec.legal(root_state))
    if not legal:
        raise SearchError("The root of a search has no legal move")
    if rng is None:
        rng = np.random.default_rng()

    prior, value = oracle.evaluate(spec, root_state)
    if noise:
        prior = (1.0 - noise) * prior + noise * _noise(legal, spec.move_count, noise_kind, rng)
    root = search_node(root_state, Status.ONGOING, prior, value, root_depth, legal)
    tree = search_tree(root)

    start = time.monotonic()
    while not budget.exhausted(tree.n_simulations, start):
        simulate(tree, spec, oracle, c_explore, max_depth)
        if stop_on_win and tree.first_win is not None:
            break
    return tree

def _root_visits(tree):
    N = tree.root.N
    if N.sum() == 0:
        raise SearchError("The root has no visited child")
    return N

def improved_policy(tree):
    """Visit share of each root child"""
    N = _root_visits(tree)
    return N / N.sum()

def improved_value(tree):
    """Mean value over the nodes of the tree

    Non-end nodes count their value once; end nodes count their reward
    as many times as they were visited.
    """
    total, count = 0.0, 0
    for node in tree.nodes():
        if node.is_end:
            total += node.value * node.visits
            count += node.visits
        else:
            total += node.value
            count += 1
    return total / count

def best_move(tree):
    """Most visited root move (lowest index on ties)"""
    return int(np.argmax(_root_visits(tree)))

def winning_state(tree):
    """State of the first won node created, or None"""
    return tree.first_win

def root_statistics(tree, spec):
    """Rows (move, prior, visits, mean_value) for the legal root moves"""
    root = tree.root
    return [(spec.move_label(i), float(root.prior[i]), int(root.N[i]), float(root.q(i)))
            for i in root.legal]

def big_step_attempt(spec, oracle, budget, max_big_steps, noise=None, collect=True,
                     noise_kind='flat', c_explore=2.0, depth_cap=True, rng=None):
    """Attempts a problem with a sequence of big steps

    Parameters
    ----------
    spec : :class:`search_spec`
    oracle : :class:`synthesis_tools.modeling.oracle.oracle`
    budget : :class:`search_budget`
        Budget of each big step
    max_big_steps : int
    noise : float, optional
    collect : bool
        Whether to emit a training example per big step
    depth_cap : bool
        Cap the search depth at `max_big_steps` moves from the start

    Returns
    -------
    outcome : :class:`Outcome`
    examples : list of :class:`synthesis_tools.modeling.tnn.train_example`
    """
    if max_big_steps < 1:
        raise ValueError("max_big_steps must be at least 1")
    if rng is None:
        rng = np.random.default_rng()

    state = spec.initial_state
    examples = []
    max_depth = max_big_steps if depth_cap else None

    for step in range(max_big_steps):
        status = spec.status(state)
        if status is not Status.ONGOING:
            break
        if not spec.legal(state):
            return Outcome.LOST, examples

        tree = search(spec, oracle, state, budget, noise=noise, noise_kind=noise_kind,
                      c_explore=c_explore, max_depth=max_depth, root_depth=step, rng=rng)
        if tree.root.N.sum() == 0:
            simulate(tree, spec, oracle, c_explore, max_depth)

        if collect:
            examples.append(train_example(spec.encode(state), improved_policy(tree), improved_value(tree)))
        state = spec.apply(state, best_move(tree))

    status = spec.status(state)
    if status is Status.WON:
        return Outcome.WON, examples
    if status is Status.LOST:
        return Outcome.LOST, examples
    return Outcome.EXHAUSTED, examples
