import os

import click
from click_option_group import optgroup

from synthesis_tools.tasks import get_task
from synthesis_tools.errors import SynthesisError
from synthesis_tools.cli.utils import list_args, load_problems

import logging
logger = logging.getLogger(__name__)

@click.command(name='export-tptp')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('problem_file')
@optgroup.group('Output options')
@optgroup.option('--outdir', type=click.Path(file_okay=False),
    default='tptp', show_default=True,
    help='Directory receiving one <id>.p file per problem')
@optgroup.group('Other options')
@optgroup.option('--ids', type=click.STRING, callback=list_args(int),
    help='Only export these problem ids (comma-delimited)')
def run(task,
        problem_file,
        outdir='tptp',
        ids=None):
    """Export combinator problems to first-order TPTP

    TASK must be 'combin'. PROBLEM_FILE is a problem set written by the 'gen'
    command. Each problem is written with the S and K axioms and an
    existential conjecture for the witness.
    """
    task = get_task(task)
    if not task.has_tptp:
        raise click.UsageError(f"TPTP export is not available for the '{task.name}' task")

    try:
        problems = load_problems(task, problem_file)
    except (IOError, SynthesisError) as e:
        logger.critical(e)
        raise click.Abort()

    if ids is not None:
        wanted = set(ids)
        problems = [p for p in problems if p.id in wanted]

    try:
        os.makedirs(outdir, exist_ok=True)
        for p in problems:
            with open(os.path.join(outdir, f"{p.id}.p"), 'w') as f:
                f.write(task.export_tptp(p.target))
    except IOError as e:
        logger.critical(e)
        raise click.Abort()

    logger.info(f"Wrote {len(problems):,} TPTP problems to {outdir}")
