import click
from click_option_group import optgroup

import numpy as np

from synthesis_tools.tasks import get_task
from synthesis_tools.search.mcts import search, search_budget, root_statistics, Status
from synthesis_tools.errors import SynthesisError
from synthesis_tools.cli.utils import (load_problems, oracle_kind, load_model, make_oracle,
                                       write_output_header, write_rows)
from synthesis_tools.cli.verify import read_results, solved_rows
from synthesis_tools.cli.eval import evaluate_problem

import logging
logger = logging.getLogger(__name__)

@click.group(name='stats')
def run():
    """Statistics of solutions and search trees"""
    pass

@run.command(name='solutions')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('results_file')
@click.option('--top', type=click.IntRange(1, None),
    default=20, show_default=True,
    help='Number of most frequent items to report')
def solutions(task, results_file, top=20):
    """Most frequent building blocks of the solutions

    RESULTS_FILE is written by the 'eval' command. For combinators every
    subterm of the witnesses is counted; for Diophantine equations every
    monomial.
    """
    task = get_task(task)
    try:
        rows = solved_rows(read_results(results_file))
        witnesses = [task.parse_witness(w) for w in rows['witness']]
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    write_output_header(['item', 'occurrences'])
    write_rows(task.occurrences(witnesses)[:top])

@run.command(name='tree')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('problem_file')
@click.argument('problem_id', type=click.INT)
@optgroup.group('Oracle options')
@optgroup.option('--checkpoint', type=click.STRING,
    help='Guide the search with a trained network (checkpoint file)')
@optgroup.option('--uniform', is_flag=True, default=False,
    help='Uniform prior and constant value (no network)')
@optgroup.option('--heuristic', is_flag=True, default=False,
    help='Uniform prior and the hand-written value function (dioph only)')
@optgroup.group('Search options')
@optgroup.option('--n_sims', type=click.IntRange(0, None),
    default=1600, show_default=True,
    help='Number of simulations')
@optgroup.option('--noise', type=click.FloatRange(0, 1),
    default=0.0, show_default=True,
    help='Weight of the exploration noise in the root prior')
@optgroup.option('--seed', type=click.INT,
    default=0, show_default=True,
    help='Seed for random number generation')
def tree(task, problem_file, problem_id, checkpoint=None, uniform=False, heuristic=False,
         n_sims=1600, noise=0.0, seed=0):
    """Root statistics of one search

    Runs a search from the starting state of problem PROBLEM_ID and prints
    one row per legal root move (move, prior, visits, mean_value).
    """
    task = get_task(task)
    kind = oracle_kind(task, checkpoint, uniform, heuristic)

    try:
        problems = {p.id: p for p in load_problems(task, problem_file)}
        model = load_model(task, checkpoint) if kind == 'tnn' else None
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    if problem_id not in problems:
        raise click.BadParameter(f"no problem with id {problem_id} in {problem_file}", param_hint='PROBLEM_ID')

    spec = task.make_spec(problems[problem_id].target)
    if spec.status(spec.initial_state) is not Status.ONGOING:
        logger.critical(f"Problem {problem_id} starts in an end state")
        raise click.Abort()

    t = search(spec, make_oracle(task, kind, model), spec.initial_state,
               search_budget(max_simulations=n_sims), noise=noise or None,
               rng=np.random.default_rng(seed))

    write_output_header(['move', 'prior', 'visits', 'mean_value'],
                        extra=f"problem={problem_id} simulations={t.n_simulations} nodes={t.n_nodes}")
    write_rows((move, f"{prior:.4f}", visits, f"{q:.4f}") for move, prior, visits, q in root_statistics(t, spec))

STRATEGY_COLUMNS = ['strategy', 'solved', 'total', 'simulations', 'time', 'sims_per_s']

def compare_strategies(task, problems, strategies, budget, c_explore=2.0, seed=0):
    """Evaluates every problem once per oracle

    The memoized evaluations of the task are emptied before each
    strategy so that all of them start cold.

    Parameters
    ----------
    task : :class:`synthesis_tools.tasks.task`
    problems : list of :class:`synthesis_tools.tasks.problems.problem`
    strategies : list of (str, :class:`synthesis_tools.modeling.oracle.oracle`)
    budget : :class:`synthesis_tools.search.mcts.search_budget`

    Returns
    -------
    rows : list of tuple
        One per strategy, in the order of `STRATEGY_COLUMNS`
    """
    rows = []
    for name, o in strategies:
        task.clear_caches()
        solved, sims, elapsed = 0, 0, 0.0
        for p in problems:
            ok, t, n, _ = evaluate_problem(task, p, o, budget, c_explore, np.random.default_rng([seed, p.id]))
            solved += int(ok)
            sims += n
            elapsed += t
        rate = sims / elapsed if elapsed > 0 else 0.0
        logger.info(f"{name}: solved {solved}/{len(problems)}, {rate:,.0f} simulations/s")
        rows.append((name, solved, len(problems), sims, elapsed, rate))
    return rows

@run.command(name='strategies')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('problem_file')
@click.option('--checkpoint', type=click.STRING,
    help='Also evaluate a trained network (checkpoint file)')
@optgroup.group('Search options')
@optgroup.option('--time_limit', type=click.FloatRange(0, None, min_open=True),
    default=60.0, show_default=True,
    help='Seconds of search per problem')
@optgroup.option('--max_simulations', type=click.IntRange(1, None),
    help='Also stop after this many simulations')
@optgroup.option('--c_explore', type=click.FloatRange(0, None),
    default=2.0, show_default=True,
    help='PUCT exploration coefficient')
@optgroup.option('--seed', type=click.INT,
    default=0, show_default=True,
    help='Seed for random number generation')
def strategies(task, problem_file, checkpoint=None, time_limit=60.0, max_simulations=None,
               c_explore=2.0, seed=0):
    """Solved problems and search speed of each oracle

    Evaluates PROBLEM_FILE with the uniform oracle, the hand-written value
    function (dioph only) and, given a checkpoint, the trained network.
    Prints one row per strategy (strategy, solved, total, simulations,
    time, sims_per_s).
    """
    task = get_task(task)
    try:
        problems = load_problems(task, problem_file)
        model = load_model(task, checkpoint) if checkpoint else None
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    kinds = ['uniform'] + (['heuristic'] if task.has_heuristic else []) + (['tnn'] if model is not None else [])
    budget = search_budget(max_simulations=max_simulations, max_time=time_limit)
    rows = compare_strategies(task, problems, [(k, make_oracle(task, k, model)) for k in kinds],
                              budget, c_explore, seed)

    write_output_header(STRATEGY_COLUMNS, extra=f"task={task.name} time_limit={time_limit}")
    write_rows((name, solved, total, sims, f"{elapsed:.3f}", f"{rate:.1f}")
               for name, solved, total, sims, elapsed, rate in rows)
