import itertools

import numpy as np
import numpy.testing as npt
import pytest

from synthesis_tools.term import signature, make_term
from synthesis_tools.modeling import tnn
from synthesis_tools.modeling.oracle import mask_policy, oracle, uniform_oracle, heuristic_oracle, tnn_oracle
from synthesis_tools.search.mcts import (search_spec, search_budget, search_node, search_tree, Status, Outcome,
                                         puct_select, simulate, search, improved_policy, improved_value,
                                         best_move, winning_state, root_statistics, big_step_attempt)
from synthesis_tools.errors import SearchError

class path_spec(search_spec):
    """Guess a fixed sequence of moves

    States are the tuples of moves played so far. The target tuple wins,
    any other tuple of the same length loses.
    """
    def __init__(self, target, move_count=2, illegal=()):
        self.target = tuple(target)
        self.move_count = move_count
        self.illegal = set(illegal)
        self.sig = signature([('root', 0)] + [(f"m{i}", 1) for i in range(move_count)])

    @property
    def initial_state(self):
        return ()

    def apply(self, state, move):
        return state + (move,)

    def status(self, state):
        if state == self.target:
            return Status.WON
        if len(state) >= len(self.target):
            return Status.LOST
        return Status.ONGOING

    def legal(self, state):
        return [i for i in range(self.move_count) if i not in self.illegal]

    def encode(self, state):
        t = make_term(self.sig, 'root')
        for m in state:
            t = make_term(self.sig, f"m{m}", t)
        return t

class fixed_oracle(oracle):
    def __init__(self, policy, value=0.5):
        self.policy = np.asarray(policy, dtype=np.float64)
        self.value = value

    def raw(self, spec, state):
        return self.policy, self.value

def make_node(prior, N=None, W=None, value=0.5, legal=None):
    prior = np.asarray(prior, dtype=np.float64)
    node = search_node('s', Status.ONGOING, prior, value, 0,
                       list(range(len(prior))) if legal is None else legal)
    if N is not None:
        node.N[:] = N
    if W is not None:
        node.W[:] = W
    return node

"""
Oracles
"""

def test_mask_policy():
    npt.assert_allclose(mask_policy([0.2, 0.6, 0.2], [0, 2], 3), [0.5, 0, 0.5])
    npt.assert_array_equal(mask_policy([0, 0, 0], [0, 2], 3), [0.5, 0, 0.5])
    npt.assert_array_equal(mask_policy([1, 1], [], 2), [0, 0])

def test_uniform_oracle_five_moves():
    spec = path_spec((0, 0), move_count=5)
    prior, value = uniform_oracle().evaluate(spec, ())
    npt.assert_allclose(prior, np.full(5, 0.2))
    assert value == 0.5

def test_uniform_oracle_one_move():
    spec = path_spec((0,), move_count=5, illegal={1, 2, 3, 4})
    prior, value = uniform_oracle().evaluate(spec, ())
    npt.assert_array_equal(prior, [1, 0, 0, 0, 0])
    assert value == 0.5

def test_heuristic_oracle():
    spec = path_spec((0, 1, 1))
    o = heuristic_oracle(lambda state: len(state) / 3)
    prior, value = o.evaluate(spec, (0,))
    npt.assert_allclose(prior, [0.5, 0.5])
    assert value == pytest.approx(1 / 3)

def test_tnn_oracle():
    spec = path_spec((0, 1, 1), move_count=3, illegal={1})
    model = tnn.init_model(spec.sig, 4, {'policy': 3, 'value': 1}, seed=2)
    prior, value = tnn_oracle(model).evaluate(spec, (0, 2))
    assert prior[1] == 0
    assert prior.sum() == pytest.approx(1.0)
    assert 0 <= value <= 1

"""
Selection
"""

def test_puct_all_unvisited():
    assert puct_select(make_node([0.1, 0.7, 0.2])) == 0

def test_puct_hand_example():
    # scores 1 + 2*0.5*1/2 = 1.5 and 0 + 2*0.5*1/1 = 1.0
    node = make_node([0.5, 0.5], N=[1, 0], W=[1, 0])
    assert puct_select(node, c_explore=2.0) == 0

def test_puct_exploration_term():
    node = make_node([0.5, 0.5], N=[1, 0], W=[0.2, 0])
    assert puct_select(node, c_explore=2.0) == 1

def test_puct_skips_illegal():
    prior = mask_policy([0.9, 0.05, 0.05], [1, 2], 3)
    node = make_node(prior, legal=[1, 2])
    assert puct_select(node) == 1
    node.N[1] = 4
    node.W[1] = 0.0
    assert puct_select(node) == 2

def test_puct_end_state():
    node = search_node('s', Status.WON, np.zeros(2), 1.0, 0)
    with pytest.raises(SearchError):
        puct_select(node)

"""
Simulation and search
"""

def test_simulate_single_move_to_win():
    spec = path_spec((0,), move_count=1)
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=1))
    npt.assert_array_equal(t.root.N, [1])
    npt.assert_array_equal(t.root.W, [1.0])
    assert t.n_nodes == 2

def test_simulate_revisits_end_state():
    spec = path_spec((0,), move_count=1)
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=3))
    assert t.n_nodes == 2
    assert t.n_simulations == 3
    assert t.root.children[0].visits == 3
    npt.assert_array_equal(t.root.N, [3])

def test_simulate_from_end_root():
    spec = path_spec((0,), move_count=1)
    t = search_tree(search_node((0,), Status.WON, np.zeros(1), 1.0, 1))
    with pytest.raises(SearchError):
        simulate(t, spec, uniform_oracle())

def test_won_child_dominates():
    spec = path_spec((0,))
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=200), c_explore=1.0)
    assert t.root.N.sum() == 200
    assert t.root.N[0] / 200 > 0.95
    assert best_move(t) == 0

def test_zero_budget():
    spec = path_spec((0, 1))
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=0))
    assert t.n_nodes == 1
    assert t.n_simulations == 0
    assert not t.root.children

def test_budget_requires_a_limit():
    with pytest.raises(ValueError):
        search_budget()

def test_time_budget():
    spec = path_spec((0, 1, 1, 0, 1, 0, 0, 1))
    t = search(spec, uniform_oracle(), (), search_budget(max_time=0.05))
    assert t.n_simulations > 0

def test_search_from_end_state():
    spec = path_spec((0,))
    with pytest.raises(SearchError):
        search(spec, uniform_oracle(), (0,), search_budget(max_simulations=1))

def test_full_noise_is_uniform():
    spec = path_spec((0, 0), move_count=3, illegal={1})
    o = fixed_oracle([0.9, 0.05, 0.05])
    t = search(spec, o, (), search_budget(max_simulations=0), noise=1.0)
    npt.assert_allclose(t.root.prior, [0.5, 0, 0.5])

def test_random_noise_stays_legal():
    spec = path_spec((0, 0), move_count=3, illegal={1})
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=0), noise=0.25,
               noise_kind='random', rng=np.random.default_rng(3))
    assert t.root.prior[1] == 0
    assert t.root.prior.sum() == pytest.approx(1.0)

def test_search_deterministic():
    spec = path_spec((1, 0, 1, 1), move_count=3)
    o = fixed_oracle([0.3, 0.5, 0.2], value=0.4)
    trees = [search(spec, o, (), search_budget(max_simulations=100), noise=0.25, noise_kind='random',
                    rng=np.random.default_rng(5)) for _ in range(2)]
    npt.assert_array_equal(trees[0].root.N, trees[1].root.N)
    npt.assert_array_equal(trees[0].root.W, trees[1].root.W)
    assert trees[0].n_nodes == trees[1].n_nodes

def test_search_starts_from_fresh_tree():
    spec = path_spec((1, 0, 1, 1), move_count=3)
    o = fixed_oracle([0.3, 0.5, 0.2], value=0.4)
    rng = np.random.default_rng(6)
    first = search(spec, o, (), search_budget(max_simulations=60), rng=rng)
    second = search(spec, o, (), search_budget(max_simulations=60), rng=rng)
    assert second is not first and second.root is not first.root
    assert first.root.N.sum() == second.root.N.sum() == 60
    assert second.root.visits == 61
    npt.assert_array_equal(first.root.N, second.root.N)

@pytest.mark.parametrize('target', list(itertools.product([0, 1], repeat=3)))
def test_uniform_search_solves_small_problems(target):
    spec = path_spec(target)
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=1000), stop_on_win=True)
    assert winning_state(t) == target
    assert t.n_nodes <= 15

def test_visit_counts_are_conserved():
    spec = path_spec((1, 0, 1), move_count=3)
    t = search(spec, fixed_oracle([0.5, 0.3, 0.2], value=0.7), (), search_budget(max_simulations=300),
               noise=0.25, rng=np.random.default_rng(2))
    assert t.root.visits == 1 + t.root.N.sum() == 1 + t.n_simulations
    for node in t.nodes():
        if not node.is_end:
            assert node.visits == 1 + node.N.sum()
        for move, child in node.children.items():
            assert node.N[move] == child.visits
            assert 0.0 <= node.q(move) <= 1.0

@pytest.mark.parametrize('target', list(itertools.product(range(3), repeat=3)))
def test_search_finds_every_reachable_win(target):
    spec = path_spec(target, move_count=3)
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=2000), stop_on_win=True)
    assert winning_state(t) == target

def test_search_exhausts_unsolvable_problem():
    spec = path_spec((0, 1, 2), move_count=3, illegal={2})
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=1000))
    assert winning_state(t) is None
    assert t.n_nodes == 1 + 2 + 4 + 8

def test_depth_cap():
    spec = path_spec((0, 0, 0))
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=50), max_depth=2)
    assert winning_state(t) is None
    assert all(node.status is Status.LOST for node in t.nodes() if node.depth == 2)

def test_root_statistics():
    spec = path_spec((0,))
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=10))
    rows = root_statistics(t, spec)
    assert [r[0] for r in rows] == ['0', '1']
    assert sum(r[2] for r in rows) == 10
    assert rows[0][3] == 1.0
    assert rows[1][3] == 0.0

"""
Improved policy and value
"""

def test_improved_policy():
    t = search_tree(make_node(np.full(5, 0.2), N=[3, 1, 0, 0, 0]))
    npt.assert_allclose(improved_policy(t), [0.75, 0.25, 0, 0, 0])

def test_improved_policy_single_child():
    spec = path_spec((0, 0), move_count=3, illegal={0, 2})
    t = search(spec, uniform_oracle(), (), search_budget(max_simulations=4))
    npt.assert_array_equal(improved_policy(t), [0, 1, 0])

def test_improved_policy_unvisited():
    with pytest.raises(SearchError):
        improved_policy(search_tree(make_node([0.5, 0.5])))

def test_improved_value_single_root():
    assert improved_value(search_tree(make_node([0.5, 0.5], value=0.5))) == 0.5

def test_improved_value_counts_end_visits():
    root = make_node([0.5, 0.5], value=0.4)
    child = search_node('w', Status.WON, np.zeros(2), 1.0, 1)
    child.visits = 3
    root.children[0] = child
    assert improved_value(search_tree(root)) == pytest.approx(0.85)

def test_improved_value_all_won():
    assert improved_value(search_tree(search_node('w', Status.WON, np.zeros(2), 1.0, 0))) == 1.0

@pytest.mark.parametrize('N,move', [((5, 2), 0), ((2, 2), 0), ((0, 7), 1)])
def test_best_move(N, move):
    assert best_move(search_tree(make_node([0.5, 0.5], N=N))) == move

"""
Big steps
"""

def test_big_step_one_move_from_win():
    spec = path_spec((0,))
    outcome, examples = big_step_attempt(spec, uniform_oracle(), search_budget(max_simulations=16), 2,
                                         rng=np.random.default_rng(0))
    assert outcome is Outcome.WON
    assert len(examples) == 1
    assert np.argmax(examples[0].policy) == 0
    assert examples[0].policy[0] > 0.5
    assert examples[0].input == spec.encode(())
    assert 0 <= examples[0].value <= 1

def test_big_step_exhausted():
    spec = path_spec((1, 0, 1))
    outcome, examples = big_step_attempt(spec, uniform_oracle(), search_budget(max_simulations=32), 2,
                                         rng=np.random.default_rng(0))
    assert outcome is Outcome.EXHAUSTED
    assert len(examples) == 2

def test_big_step_lost():
    spec = path_spec((0,), illegal={0})
    outcome, examples = big_step_attempt(spec, uniform_oracle(), search_budget(max_simulations=8), 4)
    assert outcome is Outcome.LOST
    assert len(examples) == 1

def test_big_step_without_collection():
    spec = path_spec((0, 1))
    outcome, examples = big_step_attempt(spec, uniform_oracle(), search_budget(max_simulations=32), 4,
                                         noise=0.25, collect=False, rng=np.random.default_rng(0))
    assert outcome is Outcome.WON
    assert examples == []

def test_big_step_zero_budget_still_moves():
    spec = path_spec((0,))
    outcome, examples = big_step_attempt(spec, uniform_oracle(), search_budget(max_simulations=0), 1)
    assert outcome is Outcome.WON
    npt.assert_array_equal(examples[0].policy, [1, 0])

def test_big_step_bound():
    with pytest.raises(ValueError):
        big_step_attempt(path_spec((0,)), uniform_oracle(), search_budget(max_simulations=1), 0)
