import click

import pandas as pd

from synthesis_tools.tasks import get_task
from synthesis_tools.errors import SynthesisError

import logging
logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['id', 'target', 'solved', 'witness']

def read_results(filepath):
    """Reads an evaluation results file, raises IOError with problems

    An empty file holds no results.
    """
    try:
        df = pd.read_table(filepath, dtype=str, keep_default_na=False, comment='#')
    except FileNotFoundError:
        raise IOError(f"No such file: {filepath}")
    except pd.errors.EmptyDataError:
        logger.warning(f"Empty results file: {filepath}")
        return pd.DataFrame(columns=RESULT_COLUMNS, dtype=str)
    missing = [c for c in RESULT_COLUMNS if c not in df.columns]
    if missing:
        raise IOError(f"{filepath}: missing column(s) {', '.join(missing)}")
    return df

def solved_rows(df):
    return df[df['solved'] == '1']

@click.command(name='verify')
@click.argument('task', type=click.Choice(['combin', 'dioph']))
@click.argument('results_file')
@click.pass_context
def run(ctx, task, results_file):
    """Check the solutions of an evaluation

    TASK is either 'combin' or 'dioph'. RESULTS_FILE is written by the 'eval'
    command.

    Every claimed witness is checked by exhaustive evaluation (dioph) or by
    reduction with generous bounds (combin). Exits with status 1 when a
    witness fails.
    """
    task = get_task(task)

    try:
        df = read_results(results_file)
    except IOError as e:
        logger.critical(e)
        raise click.Abort()

    rows = solved_rows(df)
    failed = []
    for row in rows.itertuples(index=False):
        try:
            ok = task.verify(task.parse_witness(row.witness), task.parse_target(row.target))
        except (ValueError, SynthesisError) as e:
            logger.warning(f"Problem {row.id}: {e}")
            ok = False
        if not ok:
            failed.append(row.id)

    click.echo(f"{len(rows) - len(failed)}/{len(rows)} verified")
    if failed:
        logger.error(f"Failed verification: {', '.join(failed)}")
        ctx.exit(1)
