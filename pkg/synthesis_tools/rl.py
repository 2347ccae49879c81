"""
Reinforcement learning loop

One generation selects problems, attempts each once with big steps
guided by the current network, pushes the collected examples into a
bounded window and trains a new network on the window.
"""
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd
import simplejson

from synthesis_tools.term import serialize_term, parse_term
from synthesis_tools.modeling.tnn import (train_example, train_schedule, init_model, train,
                                          write_model_file, read_model_file)
from synthesis_tools.modeling.oracle import tnn_oracle
from synthesis_tools.search.mcts import search_budget, big_step_attempt, Outcome
from synthesis_tools.stats import selection
from synthesis_tools.tasks import get_task
from synthesis_tools.errors import SynthesisError, ProblemFileError

from tqdm import tqdm

import logging
logger = logging.getLogger(__name__)

STATE_VERSION = 1

STREAM_INIT = 0
STREAM_SELECT = 1
STREAM_TRAIN = 2
STREAM_ATTEMPT = 3

class problem_record(object):
    """A training problem and its attempt history

    Attributes
    ----------
    id : int
    target
    size : int
        Size of the smallest known witness
    history : list of bool
        Outcome of every attempt, oldest first
    """
    def __init__(self, id, target, size, history=None):
        if size < 1:
            raise ValueError(f"Problem {id}: solution size must be positive")
        self.id = id
        self.target = target
        self.size = size
        self.history = list(history or [])

    @property
    def bound(self):
        """Maximum number of big steps of an attempt"""
        return 2 * self.size

    @property
    def positive(self):
        return selection.is_positive(self.history)

    @classmethod
    def from_problem(cls, p):
        return cls(p.id, p.target, p.size)

class example_window(object):
    """FIFO of the most recent training examples"""
    def __init__(self, capacity=200000):
        self.capacity = capacity
        self.examples = deque(maxlen=capacity)

    def push(self, examples):
        self.examples.extend(examples)

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

class generation_config(object):
    """Parameters of the learning loop

    Attributes
    ----------
    positives, negatives : int
        Problems drawn per generation from each class
    budget : :class:`synthesis_tools.search.mcts.search_budget`
        Budget of each big step
    noise : float
    noise_kind : {'flat', 'random'}
    c_explore : float
    dim : int
        Embedding dimension
    schedule : :class:`synthesis_tools.modeling.tnn.train_schedule`
    window_size : int
    warm_start : bool
        Train from the previous weights instead of fresh ones
    seed : int
    n_threads : int
    """
    def __init__(self, positives=100, negatives=100, budget=None, noise=0.25, noise_kind='flat',
                 c_explore=2.0, dim=16, schedule=None, window_size=200000, warm_start=False,
                 seed=0, n_threads=1):
        self.positives = positives
        self.negatives = negatives
        self.budget = budget or search_budget(max_simulations=1600)
        self.noise = noise
        self.noise_kind = noise_kind
        self.c_explore = c_explore
        self.dim = dim
        self.schedule = schedule or train_schedule()
        self.window_size = window_size
        self.warm_start = warm_start
        self.seed = seed
        self.n_threads = n_threads

    @property
    def problems_per_generation(self):
        return self.positives + self.negatives

    def to_dict(self):
        return {
            'positives': self.positives,
            'negatives': self.negatives,
            'max_simulations': self.budget.max_simulations,
            'max_time': self.budget.max_time,
            'noise': self.noise,
            'noise_kind': self.noise_kind,
            'c_explore': self.c_explore,
            'dim': self.dim,
            'epochs': self.schedule.epochs,
            'learning_rate': self.schedule.learning_rate,
            'batch_size': self.schedule.batch_size,
            'window_size': self.window_size,
            'warm_start': self.warm_start,
            'seed': self.seed,
        }

class generation_stats(object):
    """Summary of one generation

    Attributes
    ----------
    generation : int
    attempts : int
    solved : int
        Problems solved during this generation
    solved_at_least_once : int
    expectancy : float
    window_fill : int
    outcomes : list of (int, :class:`synthesis_tools.search.mcts.Outcome`)
    """
    def __init__(self, generation, outcomes, records, window_fill):
        self.generation = generation
        self.outcomes = outcomes
        self.attempts = len(outcomes)
        self.solved = sum(1 for _, o in outcomes if o is Outcome.WON)
        self.solved_at_least_once = selection.solved_at_least_once(records)
        self.expectancy = selection.expectancy(records)
        self.window_fill = window_fill

    def row(self):
        return f"{self.generation}\t{self.solved_at_least_once}\t{self.expectancy:.4f}"

def _seed(config, generation, stream, index=0):
    return np.random.SeedSequence([config.seed, generation, stream, index])

def heads_for(task):
    return {'policy': task.move_count, 'value': 1}

def fresh_model(task, config, generation):
    return init_model(task.signature(), config.dim, heads_for(task),
                      seed=np.random.default_rng(_seed(config, generation, STREAM_INIT)))

def select_problems(records, config, rng):
    """Ids of the problems attempted in a generation"""
    return selection.select_problems(records, config.positives, config.negatives, rng)

def attempt_problem(task, record, oracle, config, rng):
    """One noisy, example-collecting attempt bounded by the record"""
    spec = task.make_spec(record.target)
    return big_step_attempt(spec, oracle, config.budget, record.bound, noise=config.noise,
                            collect=True, noise_kind=config.noise_kind, c_explore=config.c_explore,
                            depth_cap=True, rng=rng)

def _attempt_job(args):
    task_name, record, model, config, seed = args
    task = get_task(task_name)
    return attempt_problem(task, record, tnn_oracle(model), config, np.random.default_rng(seed))

def run_generation(task, model, records, window, config, generation, progress=True):
    """One generation of the learning loop

    Parameters
    ----------
    task : :class:`synthesis_tools.tasks.task`
    model : :class:`synthesis_tools.modeling.tnn.tnn_model`
        Network guiding the attempts
    records : list of :class:`problem_record`
        Histories are appended to in place
    window : :class:`example_window`
    config : :class:`generation_config`
    generation : int
        Index of this generation (from 1)

    Returns
    -------
    model : :class:`synthesis_tools.modeling.tnn.tnn_model`
        Network trained on the window
    records, window
    stats : :class:`generation_stats`
    """
    by_id = {r.id: r for r in records}
    ids = select_problems(records, config, np.random.default_rng(_seed(config, generation, STREAM_SELECT)))
    logger.info(f"Generation {generation}: attempting {len(ids)} problems")

    jobs = [(task.name, by_id[i], model, config, _seed(config, generation, STREAM_ATTEMPT, i)) for i in ids]
    if config.n_threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.n_threads) as executor:
            results = list(tqdm(executor.map(_attempt_job, jobs), total=len(jobs),
                                colour='#cc951d', disable=not progress))
    else:
        oracle = tnn_oracle(model)
        results = [attempt_problem(task, record, oracle, config, np.random.default_rng(seed))
                   for _, record, _, _, seed in tqdm(jobs, colour='#cc951d', disable=not progress)]

    outcomes = []
    for i, (outcome, examples) in zip(ids, results):
        by_id[i].history.append(outcome is Outcome.WON)
        window.push(examples)
        outcomes.append((i, outcome))
        logger.debug(f"Problem {i}: {outcome.value} ({len(examples)} examples)")

    if len(window) == 0:
        logger.warning("Example window is empty; keeping the current network")
        new_model = model
    else:
        start = model if config.warm_start else fresh_model(task, config, generation)
        schedule = train_schedule(config.schedule.epochs, config.schedule.learning_rate,
                                  config.schedule.batch_size,
                                  seed=np.random.default_rng(_seed(config, generation, STREAM_TRAIN)))
        logger.info(f"Training on {len(window):,} examples")
        new_model = train(start, list(window), schedule)

    stats = generation_stats(generation, outcomes, records, len(window))
    logger.info(f"Generation {generation}: solved {stats.solved}/{stats.attempts}, "
                f"at least once {stats.solved_at_least_once}, expectancy {stats.expectancy:.2f}")
    return new_model, records, window, stats

"""
Run directory
"""

def checkpoint_path(outdir, generation):
    return os.path.join(outdir, f"gen_{generation}.tnn")

WINDOW_COLUMNS = ['term', 'policy', 'value']

def write_window(window, filepath):
    """Writes the examples of `window` as a TSV table, oldest first"""
    rows = [(serialize_term(ex.input), ','.join(repr(float(x)) for x in ex.policy), repr(float(ex.value)))
            for ex in window]
    pd.DataFrame(rows, columns=WINDOW_COLUMNS).to_csv(filepath, sep='\t', index=False)

def read_window(filepath, sig, capacity):
    """Reads a table written by :func:`write_window`

    Raises
    ------
    ProblemFileError
        On a missing column or a malformed example
    """
    try:
        df = pd.read_table(filepath, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise IOError(f"No such file: {filepath}")
    except pd.errors.EmptyDataError:
        raise ProblemFileError(f"Empty example window: {filepath}")
    missing = [c for c in WINDOW_COLUMNS if c not in df.columns]
    if missing:
        raise ProblemFileError(f"{filepath}: missing column(s) {', '.join(missing)}")

    window = example_window(capacity)
    for row_number, row in enumerate(df.itertuples(index=False), start=1):
        try:
            window.push([train_example(parse_term(row.term, sig),
                                       np.array([float(x) for x in row.policy.split(',')]),
                                       float(row.value))])
        except (ValueError, SynthesisError) as e:
            raise ProblemFileError(f"{filepath}: row {row_number}: {e}")
    return window

def save_state(outdir, task, config, generation, records, window):
    """Writes what `--resume` needs: state.json and window.tsv"""
    state = {
        'version': STATE_VERSION,
        'task': task.name,
        'generation': generation,
        'config': config.to_dict(),
        'histories': {str(r.id): r.history for r in records},
    }
    with open(os.path.join(outdir, 'state.json'), 'w') as f:
        simplejson.dump(state, f, indent=2)
    write_window(window, os.path.join(outdir, 'window.tsv'))

def load_state(outdir, task, config, records):
    """Restores histories, window and latest network of a run

    Returns
    -------
    generation : int
    model : :class:`synthesis_tools.modeling.tnn.tnn_model`
    window : :class:`example_window`
    """
    try:
        with open(os.path.join(outdir, 'state.json')) as f:
            state = simplejson.load(f)
    except FileNotFoundError:
        raise IOError(f"No run state in {outdir}")
    if state.get('version') != STATE_VERSION or state.get('task') != task.name:
        raise ProblemFileError(f"{outdir}/state.json does not belong to a '{task.name}' run")

    histories = state['histories']
    for r in records:
        r.history = [bool(x) for x in histories.get(str(r.id), [])]

    generation = int(state['generation'])
    model = read_model_file(checkpoint_path(outdir, generation), literals=task.literals)
    window = read_window(os.path.join(outdir, 'window.tsv'), model.sig, config.window_size)
    return generation, model, window

def rl_loop(task, problems, config, outdir, generations, resume=False, progress=True):
    """Runs generations, writing one checkpoint and one stats row each

    Writes ``gen_<n>.tnn``, ``stats.tsv`` (``gen sol exp``) and the
    resume state into `outdir`.

    Returns
    -------
    stats : list of :class:`generation_stats`
    """
    os.makedirs(outdir, exist_ok=True)
    records = [problem_record.from_problem(p) for p in problems]
    stats_file = os.path.join(outdir, 'stats.tsv')

    if resume:
        start, model, window = load_state(outdir, task, config, records)
        logger.info(f"Resuming after generation {start}")
    else:
        start = 0
        model = fresh_model(task, config, 0)
        window = example_window(config.window_size)
        with open(stats_file, 'w') as f:
            print("gen\tsol\texp", file=f)

    all_stats = []
    for generation in range(start + 1, generations + 1):
        model, records, window, stats = run_generation(task, model, records, window, config,
                                                       generation, progress=progress)
        write_model_file(model, checkpoint_path(outdir, generation))
        with open(stats_file, 'a') as f:
            print(stats.row(), file=f)
        save_state(outdir, task, config, generation, records, window)
        all_stats.append(stats)
    return all_stats
