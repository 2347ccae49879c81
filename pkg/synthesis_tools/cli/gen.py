import os

import click
from click_option_group import optgroup

from yaspin import yaspin
from yaspin.spinners import Spinners

import numpy as np

import synthesis_tools
from synthesis_tools.tasks import get_task, problems as problem_io
from synthesis_tools.errors import SynthesisError
from synthesis_tools.cli.utils import config_option, write_output_header, write_rows

import logging
logger = logging.getLogger(__name__)

@click.command(name='gen')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@optgroup.group('Generation options')
@optgroup.option('--count', type=click.IntRange(1, None),
    default=2200, show_default=True,
    help='Number of distinct targets to generate')
@optgroup.option('--test_size', type=click.IntRange(0, None),
    default=200, show_default=True,
    help='Number of problems held out for testing')
@optgroup.option('--max_solution_size', type=click.IntRange(1, None),
    default=20, show_default=True,
    help='Largest size of the random normal forms (combin only)')
@optgroup.option('--max_draws', type=click.IntRange(1, None),
    help='Give up after this many random draws')
@optgroup.group('Output options')
@optgroup.option('--outdir', type=click.Path(file_okay=False),
    envvar='SYNTH_DATA_DIR', default='.', show_default=True,
    help='Output directory (defaults to $SYNTH_DATA_DIR when set)')
@optgroup.group('Other options')
@optgroup.option('--seed', type=click.INT,
    default=0, show_default=True,
    help='Seed for random number generation')
@config_option
def run(task,
        count=2200,
        test_size=200,
        max_solution_size=20,
        max_draws=None,
        outdir='.',
        seed=0):
    """Generate a problem set

    TASK is either 'combin' (SK-combinator synthesis) or 'dioph'
    (Diophantine sets over Z/16Z).

    Problems are written to <outdir>/train.tsv and <outdir>/test.tsv. The number
    of problems per smallest-solution size is written to <outdir>/difficulty.tsv.
    """
    task = get_task(task)
    if test_size > count:
        raise click.BadParameter(f"cannot hold out {test_size} of {count} problems", param_hint='--test_size')

    rng = np.random.default_rng(seed)
    kwargs = {'max_draws': max_draws}
    if task.name == 'combin':
        kwargs['max_solution_size'] = max_solution_size

    with yaspin(Spinners.bouncingBar, text='Generating problems') as sp:

        def progress(draws, found):
            if draws % 1000 == 0:
                sp.text = f"Generating problems -- {found:,} / {count:,} distinct targets after {draws:,} draws"

        try:
            problems = task.gen_problems(count, rng, callback=progress, **kwargs)
        except SynthesisError as e:
            sp.fail()
            logger.critical(e)
            raise click.Abort()
        sp.ok()

    train, test = problem_io.split_problems(problems, test_size, rng)

    try:
        os.makedirs(outdir, exist_ok=True)
        header = [f"generated by synthesis_tools version {synthesis_tools.__version__}",
                  f"task={task.name} count={count} seed={seed}"]
        for name, subset in (('train.tsv', train), ('test.tsv', test)):
            filepath = os.path.join(outdir, name)
            logger.info(f"Writing {len(subset):,} problems to {filepath}")
            with open(filepath, 'w') as f:
                task.write_problems(subset, f, header_lines=header)

        filepath = os.path.join(outdir, 'difficulty.tsv')
        logger.info(f"Writing difficulty histogram to {filepath}")
        with open(filepath, 'w') as f:
            write_output_header(['size', 'count'], file=f)
            write_rows(problem_io.difficulty_histogram(problems), file=f)
    except IOError as e:
        logger.critical(e)
        raise click.Abort()
