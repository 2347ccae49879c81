import time
from concurrent.futures import ProcessPoolExecutor

import click
from click_option_group import optgroup

from multiprocessing import cpu_count

import numpy as np

from synthesis_tools.tasks import get_task
from synthesis_tools.search.mcts import search, search_budget, winning_state, Status
from synthesis_tools.errors import SynthesisError
from synthesis_tools.cli.utils import (config_option, load_problems, oracle_kind, load_model,
                                       make_oracle, write_output_header)

from tqdm import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

import logging
logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['id', 'target', 'solved', 'time', 'simulations', 'witness']

def evaluate_problem(task, problem, oracle, budget, c_explore=2.0, rng=None):
    """Single search without noise or depth bound, stopped at the first win

    Returns
    -------
    solved : bool
    elapsed : float
        Seconds until the win (or until the budget ran out)
    simulations : int
    witness : object or None
    """
    spec = task.make_spec(problem.target, verification=True)
    start = time.monotonic()
    state = spec.initial_state
    status = spec.status(state)
    if status is not Status.ONGOING:
        return status is Status.WON, time.monotonic() - start, 0, (spec.witness(state) if status is Status.WON else None)

    tree = search(spec, oracle, state, budget, noise=None, c_explore=c_explore,
                  max_depth=None, stop_on_win=True, rng=rng)
    elapsed = time.monotonic() - start
    won = winning_state(tree)
    return won is not None, elapsed, tree.n_simulations, (spec.witness(won) if won is not None else None)

def _evaluate_job(args):
    task_name, problem, kind, model, budget, c_explore, seed = args
    task = get_task(task_name)
    return evaluate_problem(task, problem, make_oracle(task, kind, model), budget, c_explore,
                            np.random.default_rng(seed))

@click.command(name='eval')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('problem_file')
@optgroup.group('Oracle options')
@optgroup.option('--checkpoint', type=click.STRING,
    help='Guide the search with a trained network (checkpoint file)')
@optgroup.option('--uniform', is_flag=True, default=False,
    help='Uniform prior and constant value (no network)')
@optgroup.option('--heuristic', is_flag=True, default=False,
    help='Uniform prior and the hand-written value function (dioph only)')
@optgroup.group('Search options')
@optgroup.option('--time_limit', type=click.FloatRange(0, None, min_open=True),
    default=60.0, show_default=True,
    help='Seconds of search per problem')
@optgroup.option('--max_simulations', type=click.IntRange(1, None),
    help='Also stop after this many simulations')
@optgroup.option('--c_explore', type=click.FloatRange(0, None),
    default=2.0, show_default=True,
    help='PUCT exploration coefficient')
@optgroup.group('Output options')
@optgroup.option('--outfile', type=click.STRING,
    default='results.tsv', show_default=True,
    help='Per-problem results')
@optgroup.group('Other options')
@optgroup.option('--seed', type=click.INT,
    default=0, show_default=True,
    help='Seed for random number generation')
@optgroup.option('--n_threads', type=click.IntRange(1, cpu_count()),
    default=1, show_default=True,
    help='Number of problems searched in parallel')
@config_option
def run(task,
        problem_file,
        checkpoint=None,
        uniform=False,
        heuristic=False,
        time_limit=60.0,
        max_simulations=None,
        c_explore=2.0,
        outfile='results.tsv',
        seed=0,
        n_threads=1):
    """Evaluate a prover on a problem set

    TASK is either 'combin' or 'dioph'. PROBLEM_FILE is a problem set written
    by the 'gen' command.

    Each problem gets a single search (no big steps, no noise) that stops at
    the time limit or as soon as a solution is found. Results are written to
    a TSV file (id, target, solved, time, simulations, witness) and the share
    of solved problems is printed.
    """
    task = get_task(task)
    kind = oracle_kind(task, checkpoint, uniform, heuristic)

    logger.info("Validating input files")
    try:
        problems = load_problems(task, problem_file)
        if kind == 'tnn':
            logger.info(f"Loading network from file {checkpoint}")
            model = load_model(task, checkpoint)
        else:
            logger.info(f"No checkpoint -- using the {kind} oracle")
            model = None
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    budget = search_budget(max_simulations=max_simulations, max_time=time_limit)
    jobs = [(task.name, p, kind, model, budget, c_explore, np.random.SeedSequence([seed, p.id]))
            for p in problems]

    try:
        output_filehandle = open(outfile, 'w')
        write_output_header(RESULT_COLUMNS, file=output_filehandle,
                            extra=f"task={task.name} oracle={checkpoint or kind} time_limit={time_limit}")
    except IOError as e:
        logger.critical(e)
        raise click.Abort()

    solved, total_sims, total_time = 0, 0, 0.0

    with logging_redirect_tqdm():
        if n_threads > 1:
            executor = ProcessPoolExecutor(max_workers=n_threads)
            results = executor.map(_evaluate_job, jobs)
        else:
            executor = None
            oracle = make_oracle(task, kind, model)
            results = (evaluate_problem(task, p, oracle, budget, c_explore, np.random.default_rng(s))
                       for _, p, _, _, _, _, s in jobs)

        for p, (ok, elapsed, sims, witness) in tqdm(zip(problems, results), total=len(problems), colour='#cc951d'):
            text = ''
            if ok:
                text = task.render_witness(witness)
                if not task.verify(witness, p.target):
                    logger.warning(f"Problem {p.id}: witness {text} fails verification")
                solved += 1
            total_sims += sims
            total_time += elapsed
            print(f"{p.id}\t{task.render_target(p.target)}\t{int(ok)}\t{elapsed:.3f}\t{sims}\t{text}",
                  file=output_filehandle)

        if executor is not None:
            executor.shutdown()

    output_filehandle.close()

    rate = total_sims / total_time if total_time > 0 else 0.0
    click.echo(f"Solved {solved}/{len(problems)} ({100.0*solved/len(problems):.1f}%)")
    click.echo(f"{total_sims:,} simulations in {total_time:.1f}s ({rate:,.0f} simulations/s)")
