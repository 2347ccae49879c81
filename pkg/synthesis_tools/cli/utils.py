"""
Argument validation functions
"""
import click

def list_args(value_type=int):
    def _parse_list(ctx, params, value):
        """Function to parse a list from command line"""
        if value is None:
            return None
        try:
            items = list(map(value_type, value.split(',')))
        except ValueError:
            raise click.BadParameter(f'needs to be a comma-delimited list of type {value_type.__name__}')
        return items
    return _parse_list

def load_config_file(ctx, param, value):
    """Eager callback reading ``key = value`` lines into the option defaults

    Explicit command-line flags still take precedence.
    """
    if value is None:
        return value
    try:
        with open(value) as f:
            lines = f.read().splitlines()
    except IOError:
        raise click.BadParameter(f"Cannot read config file {value}")

    known = {p.name for p in ctx.command.params}
    defaults = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise click.BadParameter(f"{value}, line {lineno}: expected 'key = value'")
        key, v = (s.strip() for s in line.split('=', 1))
        key = key.replace('-', '_')
        if key not in known:
            raise click.BadParameter(f"{value}, line {lineno}: unknown option '{key}'")
        defaults[key] = v

    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value

config_option = click.option('--config', type=click.Path(dir_okay=False),
    callback=load_config_file, is_eager=True, expose_value=False,
    help='File of "key = value" lines providing option defaults')

"""
Input loading functions
"""
from synthesis_tools.modeling import tnn
from synthesis_tools.modeling.oracle import uniform_oracle, heuristic_oracle, tnn_oracle

def load_problems(task, filepath):
    """Reads a problem file, raises IOError with problems"""
    problems = task.read_problems(filepath)
    if not problems:
        raise IOError(f"No problems in {filepath}")
    return problems

def oracle_kind(task, checkpoint, uniform, heuristic):
    """Validates the exclusive oracle flags

    Returns
    -------
    kind : {'tnn', 'uniform', 'heuristic'}
    """
    chosen = [name for name, flag in (('--checkpoint', checkpoint), ('--uniform', uniform),
                                      ('--heuristic', heuristic)) if flag]
    if len(chosen) != 1:
        raise click.UsageError("Exactly one of --checkpoint, --uniform or --heuristic is required")
    if heuristic and not task.has_heuristic:
        raise click.UsageError(f"No heuristic is defined for the '{task.name}' task")
    if checkpoint:
        return 'tnn'
    return 'uniform' if uniform else 'heuristic'

def load_model(task, checkpoint):
    """Loads a checkpoint, raises IOError with problems"""
    model = tnn.read_model_file(checkpoint, literals=task.literals, cache_size=100000)
    if model.heads.get('policy') != task.move_count:
        raise IOError(f"{checkpoint} was not trained for the '{task.name}' task")
    return model

def make_oracle(task, kind, model=None):
    if kind == 'tnn':
        return tnn_oracle(model)
    if kind == 'heuristic':
        return heuristic_oracle(task.heuristic_value)
    return uniform_oracle()

"""
Writer functions
"""
import sys

import synthesis_tools

def write_output_header(columns, file=None, delim='\t', extra=None):
    """Write header to output file

    Parameters
    ----------
    columns : list
        Column names
    file : filehandle
        Filehandle to write header to
    delim : str
        Delimiter between columns
    extra : str, optional
        Additional comment line
    """
    file = file or sys.stdout
    print(f"# generated by synthesis_tools version {synthesis_tools.__version__}", file=file)
    if extra:
        print(f"# {extra}", file=file)
    print(delim.join(columns), file=file)

def write_rows(rows, file=None, delim='\t'):
    file = file or sys.stdout
    for row in rows:
        print(delim.join(str(x) for x in row), file=file)
