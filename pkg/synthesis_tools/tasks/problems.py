"""
Problem sets shared by the synthesis tasks

A problem set is a TSV table with one problem per row::

    id  target  solution  size

where `solution` is the smallest witness found by the generator and
`size` its size. Lines starting with '#' are comments.
"""
import sys
from collections import namedtuple, Counter

import numpy as np
import pandas as pd

from synthesis_tools.errors import ProblemFileError, SynthesisError

import logging
logger = logging.getLogger(__name__)

PROBLEM_COLUMNS = ['id', 'target', 'solution', 'size']

class problem(namedtuple('problem', ['id', 'target', 'solution', 'size'])):
    """A synthesis problem

    Attributes
    ----------
    id : int
    target
        Task-specific target
    solution
        Smallest witness known for the target
    size : int
        Size of `solution`
    """
    __slots__ = ()

def write_problems(problems, render_target, render_solution, file=sys.stdout, header_lines=()):
    """Writes a problem table

    Parameters
    ----------
    problems : iterable of :class:`problem`
    render_target, render_solution : callable
        Text renderers of the task
    file : filehandle
    header_lines : iterable of str
        Comment lines written before the column header
    """
    for line in header_lines:
        print(f"# {line}", file=file)
    print('\t'.join(PROBLEM_COLUMNS), file=file)
    for p in problems:
        print(f"{p.id}\t{render_target(p.target)}\t{render_solution(p.solution)}\t{p.size}", file=file)

def read_problems(filepath, parse_target, parse_solution):
    """Reads a problem table written by :func:`write_problems`

    Returns
    -------
    problems : list of :class:`problem`

    Raises
    ------
    IOError
        If the file cannot be opened
    ProblemFileError
        On a missing column or a row that fails to parse
    """
    try:
        df = pd.read_table(filepath, dtype=str, keep_default_na=False, comment='#')
    except FileNotFoundError:
        raise IOError(f"No such file: {filepath}")
    except pd.errors.EmptyDataError:
        raise ProblemFileError(f"Empty problem file: {filepath}")

    missing = [c for c in PROBLEM_COLUMNS if c not in df.columns]
    if missing:
        raise ProblemFileError(f"{filepath}: missing column(s) {', '.join(missing)}")

    problems = []
    for row_number, row in enumerate(df.itertuples(index=False), start=1):
        try:
            problems.append(problem(int(row.id), parse_target(row.target),
                                    parse_solution(row.solution), int(row.size)))
        except (ValueError, SynthesisError) as e:
            raise ProblemFileError(f"{filepath}: row {row_number}: {e}")
    return problems

def split_problems(problems, test_size, rng):
    """Random train/test split

    Targets of a generated set are distinct, so the two parts never
    share a target.

    Parameters
    ----------
    problems : list of :class:`problem`
    test_size : int
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    train, test : lists of :class:`problem`
        Each ordered by id
    """
    if not 0 <= test_size <= len(problems):
        raise ValueError(f"Cannot hold out {test_size} of {len(problems)} problems")
    idx = rng.permutation(len(problems))
    test_idx = set(idx[:test_size].tolist())
    train = [p for i, p in enumerate(problems) if i not in test_idx]
    test = [p for i, p in enumerate(problems) if i in test_idx]
    return sorted(train, key=lambda p: p.id), sorted(test, key=lambda p: p.id)

def difficulty_histogram(problems):
    """Number of problems per smallest-witness size

    Returns
    -------
    rows : list of (size, count)
        Sorted by size
    """
    counts = Counter(p.size for p in problems)
    return sorted(counts.items())

def max_solution_size(problems):
    return max((p.size for p in problems), default=0)
