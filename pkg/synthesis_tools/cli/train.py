import click
from click_option_group import optgroup

from multiprocessing import cpu_count

from synthesis_tools import rl
from synthesis_tools.tasks import get_task
from synthesis_tools.modeling.tnn import train_schedule
from synthesis_tools.search.mcts import search_budget
from synthesis_tools.errors import SynthesisError
from synthesis_tools.cli.utils import config_option, load_problems

from tqdm.contrib.logging import logging_redirect_tqdm

import logging
logger = logging.getLogger(__name__)

@click.command(name='train')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('problem_file')
@optgroup.group('Search options')
@optgroup.option('--max_simulations', type=click.IntRange(1, None),
    default=1600, show_default=True,
    help='Simulations per big step')
@optgroup.option('--noise', type=click.FloatRange(0, 1),
    default=0.25, show_default=True,
    help='Weight of the exploration noise in the root prior')
@optgroup.option('--noise_kind', type=click.Choice(['flat', 'random']),
    default='flat', show_default=True,
    help='Uniform noise over legal moves, or renormalized uniform random draws')
@optgroup.option('--c_explore', type=click.FloatRange(0, None),
    default=2.0, show_default=True,
    help='PUCT exploration coefficient')
@optgroup.group('Network options')
@optgroup.option('--dim', type=click.IntRange(1, None),
    default=16, show_default=True,
    help='Embedding dimension')
@optgroup.option('--warm_start', is_flag=True,
    default=False, show_default=True,
    help='Train each generation from the previous weights')
@optgroup.group('Training options')
@optgroup.option('--generations', type=click.IntRange(1, None),
    default=10, show_default=True,
    help='Number of generations')
@optgroup.option('--positives', type=click.IntRange(0, None),
    default=100, show_default=True,
    help='Positive problems attempted per generation')
@optgroup.option('--negatives', type=click.IntRange(0, None),
    default=100, show_default=True,
    help='Negative problems attempted per generation')
@optgroup.option('--epochs', type=click.IntRange(1, None),
    default=10, show_default=True,
    help='Training epochs per generation')
@optgroup.option('--learning_rate', type=click.FloatRange(0, None, min_open=True),
    default=0.02, show_default=True,
    help='Learning rate')
@optgroup.option('--batch_size', type=click.IntRange(1, None),
    default=16, show_default=True,
    help='Mini-batch size')
@optgroup.option('--window_size', type=click.IntRange(1, None),
    default=200000, show_default=True,
    help='Number of most recent examples kept for training')
@optgroup.group('Output options')
@optgroup.option('--outdir', type=click.Path(file_okay=False),
    default='run', show_default=True,
    help='Directory receiving checkpoints (gen_<n>.tnn), stats.tsv and the run state')
@optgroup.option('--resume', is_flag=True,
    default=False,
    help='Continue the run found in the output directory')
@optgroup.group('Other options')
@optgroup.option('--seed', type=click.INT,
    default=0, show_default=True,
    help='Seed for random number generation')
@optgroup.option('--n_threads', type=click.IntRange(1, cpu_count()),
    default=1, show_default=True,
    help='Number of processes attempting problems')
@config_option
def run(task,
        problem_file,
        max_simulations=1600,
        noise=0.25,
        noise_kind='flat',
        c_explore=2.0,
        dim=16,
        warm_start=False,
        generations=10,
        positives=100,
        negatives=100,
        epochs=10,
        learning_rate=0.02,
        batch_size=16,
        window_size=200000,
        outdir='run',
        resume=False,
        seed=0,
        n_threads=1):
    """Learn to synthesize by reinforcement learning

    TASK is either 'combin' or 'dioph'. PROBLEM_FILE is a training problem
    set written by the 'gen' command.

    Each generation attempts selected problems with Monte Carlo tree search
    guided by the current network and trains a new network on the collected
    examples. Writes one checkpoint and one row of <outdir>/stats.tsv
    (gen, sol, exp) per generation.
    """
    task = get_task(task)

    logger.info("Validating input files")
    try:
        problems = load_problems(task, problem_file)
        logger.info(f"Loaded {len(problems):,} problems from {problem_file}")
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    config = rl.generation_config(
        positives=positives,
        negatives=negatives,
        budget=search_budget(max_simulations=max_simulations),
        noise=noise,
        noise_kind=noise_kind,
        c_explore=c_explore,
        dim=dim,
        schedule=train_schedule(epochs, learning_rate, batch_size),
        window_size=window_size,
        warm_start=warm_start,
        seed=seed,
        n_threads=n_threads)

    with logging_redirect_tqdm():
        try:
            rl.rl_loop(task, problems, config, outdir, generations, resume=resume)
        except (IOError, SynthesisError) as e:
            logger.critical(e)
            raise click.Abort()

    logger.info(f"Statistics written to {outdir}/stats.tsv")
