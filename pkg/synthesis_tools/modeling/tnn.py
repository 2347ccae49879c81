"""
Tree neural networks (TNN)

A TNN holds one small feed-forward block per operator of a signature.
The embedding of a term is computed bottom-up: an arity-0 operator
stores a vector in the embedding space and an operator of arity `a`
maps the concatenation of its `a` child embeddings (R^{a x d}) to R^d.
Heads map the root embedding to the network outputs; here a `policy`
head (one output per move) and a `value` head (one output).

Every layer is an affine map followed by tanh. Head outputs are mapped
from [-1, 1] to [0, 1] with y -> (y + 1) / 2.
"""
import re
from collections import namedtuple, OrderedDict

import numpy as np

from synthesis_tools.term import signature, term_operator
from synthesis_tools.errors import (SignatureError, DimensionError, EmptyDatasetError,
                                    CheckpointFormatError, CheckpointVersionError)

import logging
logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

class train_example(namedtuple('train_example', ['input', 'policy', 'value'])):
    """A training example

    Attributes
    ----------
    input : :class:`synthesis_tools.term.term`
        Term representing a search state
    policy : ndarray
        Improved policy, entries in [0, 1] summing to 1 over legal moves
    value : float
        Improved value in [0, 1]
    """
    __slots__ = ()

class train_schedule(object):
    """Schedule of the learning phase

    Attributes
    ----------
    epochs : int
    learning_rate : float
    batch_size : int
    seed : int
        Seed of the per-epoch example shuffling
    """
    def __init__(self, epochs=10, learning_rate=0.02, batch_size=16, seed=0):
        if epochs < 0 or learning_rate <= 0 or batch_size < 1:
            raise ValueError("Training schedule values must be positive")
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.batch_size = int(batch_size)
        self.seed = seed

class tnn_model(object):
    """A double-headed tree neural network

    Parameters are stored in a flat dictionary keyed by tuples:

    - ``('op', name)`` embedding vector of an arity-0 operator, shape (d,)
    - ``('op', name, 'W')``, ``('op', name, 'b')`` layer of an operator of
      arity a > 0, shapes (d, a*d) and (d,)
    - ``('head', name, i, 'W')``, ``('head', name, i, 'b')`` layer i (0 or 1)
      of a head, shapes (d, d), (d,) then (n, d), (n,)

    Attributes
    ----------
    sig : :class:`synthesis_tools.term.signature`
    dim : int
        Embedding dimension d
    heads : OrderedDict
        Head name to output dimension
    params : dict
    """
    HEAD_LAYERS = 2

    def __init__(self, sig, dim, heads, params, cache_size=0):
        self.sig = sig
        self.dim = int(dim)
        self.heads = OrderedDict(heads)
        self.params = params
        self.cache_size = cache_size
        self._cache = {}
        self._validate()

    def _validate(self):
        d = self.dim
        for op in self.sig:
            if op.arity == 0:
                self._check_shape(('op', op.name), (d,))
            else:
                self._check_shape(('op', op.name, 'W'), (d, op.arity*d))
                self._check_shape(('op', op.name, 'b'), (d,))
        for name, n in self.heads.items():
            self._check_shape(('head', name, 0, 'W'), (d, d))
            self._check_shape(('head', name, 0, 'b'), (d,))
            self._check_shape(('head', name, 1, 'W'), (n, d))
            self._check_shape(('head', name, 1, 'b'), (n,))

    def _check_shape(self, key, shape):
        try:
            actual = self.params[key].shape
        except KeyError:
            raise DimensionError(f"Missing parameter {key}")
        if actual != shape:
            raise DimensionError(f"Parameter {key} has shape {actual}, expected {shape}")

    def param_keys(self):
        """Parameter keys in a fixed order (operators, then heads)"""
        keys = []
        for op in self.sig:
            if op.arity == 0:
                keys.append(('op', op.name))
            else:
                keys.extend([('op', op.name, 'W'), ('op', op.name, 'b')])
        for name in self.heads:
            for i in range(self.HEAD_LAYERS):
                keys.extend([('head', name, i, 'W'), ('head', name, i, 'b')])
        return keys

    def copy(self, cache_size=None):
        params = {k: v.copy() for k, v in self.params.items()}
        return tnn_model(self.sig, self.dim, self.heads, params,
                         cache_size=self.cache_size if cache_size is None else cache_size)

    def clear_cache(self):
        self._cache = {}

    def leaf_vector(self, name):
        """Embedding of an arity-0 operator (learned or literal)"""
        v = self.params.get(('op', name))
        if v is not None:
            return v
        v = self.sig.literal_vector(name)
        if v is None:
            raise SignatureError(f"Unknown operator: '{name}'")
        v = np.asarray(v, dtype=np.float64)
        if len(v) > self.dim:
            raise DimensionError(f"Literal '{name}' has {len(v)} entries but dim={self.dim}")
        if len(v) < self.dim:
            v = np.concatenate([v, np.zeros(self.dim - len(v))])
        return v

    def is_literal(self, name):
        return ('op', name) not in self.params

    def __getstate__(self):
        state = self.__dict__.copy()
        state['_cache'] = {}
        return state

def init_model(sig, dim, heads, seed=0, cache_size=0):
    """Creates a model with random weights

    Weights and biases are drawn uniformly in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    Arity-0 embeddings use fan_in = 1.

    Parameters
    ----------
    sig : :class:`synthesis_tools.term.signature`
    dim : int
    heads : dict
        Head name to output dimension, e.g. ``{'policy': 5, 'value': 1}``
    seed : int or :class:`numpy.random.Generator`

    Returns
    -------
    model : :class:`tnn_model`
    """
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        r = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-r, r, size=shape)

    params = {}
    for op in sig:
        if op.arity == 0:
            params[('op', op.name)] = uniform((dim,), 1)
        else:
            params[('op', op.name, 'W')] = uniform((dim, op.arity*dim), op.arity*dim)
            params[('op', op.name, 'b')] = uniform((dim,), op.arity*dim)
    for name, n in heads.items():
        params[('head', name, 0, 'W')] = uniform((dim, dim), dim)
        params[('head', name, 0, 'b')] = uniform((dim,), dim)
        params[('head', name, 1, 'W')] = uniform((n, dim), dim)
        params[('head', name, 1, 'b')] = uniform((n,), dim)

    return tnn_model(sig, dim, heads, params, cache_size=cache_size)

def _unique_postorder(t, known=None):
    """Distinct subterms of `t`, children before parents

    Subterms found in `known` are listed without their arguments.
    """
    order = []
    seen = set()
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            if node not in seen:
                seen.add(node)
                order.append(node)
            continue
        if node in seen:
            continue
        if known is not None and node in known:
            seen.add(node)
            order.append(node)
            continue
        stack.append((node, True))
        for a in reversed(node.args):
            if a not in seen:
                stack.append((a, False))
    return order

def _forward(model, t, record=False):
    """Bottom-up embedding of every distinct subterm

    Returns the embedding table, and if `record` the concatenated inputs
    of every composite node (needed by backpropagation).
    """
    emb = {}
    inputs = {} if record else None
    use_cache = model.cache_size > 0 and not record
    cache = model._cache
    p = model.params

    order = _unique_postorder(t, cache if use_cache else None)
    if use_cache:
        # read every hit first, inserting below may clear the cache
        emb.update((node, cache[node]) for node in order if node in cache)

    for node in order:
        if node in emb:
            continue
        op = node.op
        if not node.args:
            v = model.leaf_vector(op.name)
        else:
            try:
                W = p[('op', op.name, 'W')]
                b = p[('op', op.name, 'b')]
            except KeyError:
                raise SignatureError(f"Unknown operator: '{op.name}/{op.arity}'")
            x = np.concatenate([emb[a] for a in node.args])
            if len(x) != W.shape[1]:
                raise SignatureError(f"Operator '{op.name}' applied to {len(node.args)} argument(s)")
            v = np.tanh(W @ x + b)
            if record:
                inputs[node] = x
        emb[node] = v
        if use_cache:
            if len(cache) >= model.cache_size:
                cache.clear()
            cache[node] = v

    return emb, inputs

def _head_forward(model, name, e):
    p = model.params
    h = np.tanh(p[('head', name, 0, 'W')] @ e + p[('head', name, 0, 'b')])
    y = np.tanh(p[('head', name, 1, 'W')] @ h + p[('head', name, 1, 'b')])
    return h, y

def embed(model, t):
    """Embedding E(t) of a term

    Parameters
    ----------
    model : :class:`tnn_model`
    t : :class:`synthesis_tools.term.term`

    Returns
    -------
    e : ndarray
        Vector of size ``model.dim``

    Raises
    ------
    SignatureError
        When `t` uses an operator the model does not know
    """
    emb, _ = _forward(model, t)
    return emb[t]

def head_outputs(model, t):
    """All head outputs, each mapped to [0, 1]"""
    e = embed(model, t)
    return OrderedDict((name, (_head_forward(model, name, e)[1] + 1.0) / 2.0)
                       for name in model.heads)

def infer(model, t):
    """Policy and value of a term

    The policy is not renormalized; consumers mask illegal moves.

    Returns
    -------
    policy : ndarray
        Entries in [0, 1]
    value : float
        In [0, 1]
    """
    e = embed(model, t)
    _, yp = _head_forward(model, 'policy', e)
    _, yv = _head_forward(model, 'value', e)
    return (yp + 1.0) / 2.0, float((yv[0] + 1.0) / 2.0)

def _check_example(model, example):
    n = model.heads.get('policy')
    if np.shape(example.policy) != (n,):
        raise DimensionError(f"Policy target has shape {np.shape(example.policy)}, expected ({n},)")

def loss(model, example):
    """Squared error of both heads

    Mean over the components of each head, summed over the two heads.
    """
    _check_example(model, example)
    policy, value = infer(model, example.input)
    return float(np.mean((policy - example.policy)**2) + (value - example.value)**2)

def batch_loss(model, examples):
    """Mean of the example losses"""
    if len(examples) == 0:
        raise EmptyDatasetError("No examples")
    return float(np.mean([loss(model, ex) for ex in examples]))

def _loss_and_gradient(model, example, grads):
    """Accumulates d(loss)/d(params) of one example into `grads`"""
    _check_example(model, example)
    p = model.params
    d = model.dim
    t = example.input

    emb, inputs = _forward(model, t, record=True)
    e = emb[t]

    total = 0.0
    d_emb = {t: np.zeros(d)}

    targets = (('policy', np.asarray(example.policy, dtype=np.float64)),
               ('value', np.array([example.value], dtype=np.float64)))

    for name, target in targets:
        h, y = _head_forward(model, name, e)
        out = (y + 1.0) / 2.0
        diff = out - target
        total += float(np.mean(diff**2))

        dy = diff * (1.0 / len(diff))      # 2/n from the mean square, 1/2 from the output map
        dz2 = dy * (1.0 - y**2)
        W2 = p[('head', name, 1, 'W')]
        _accumulate(grads, ('head', name, 1, 'W'), np.outer(dz2, h))
        _accumulate(grads, ('head', name, 1, 'b'), dz2)
        dz1 = (W2.T @ dz2) * (1.0 - h**2)
        W1 = p[('head', name, 0, 'W')]
        _accumulate(grads, ('head', name, 0, 'W'), np.outer(dz1, e))
        _accumulate(grads, ('head', name, 0, 'b'), dz1)
        d_emb[t] = d_emb[t] + W1.T @ dz1

    # parents are visited before children, so d_emb of a shared subterm
    # holds the contributions of all its occurrences when it is reached
    for node in reversed(list(emb.keys())):
        g = d_emb.pop(node, None)
        if g is None:
            continue
        name = node.op.name
        if not node.args:
            if not model.is_literal(name):
                _accumulate(grads, ('op', name), g)
            continue
        v = emb[node]
        dz = g * (1.0 - v**2)
        _accumulate(grads, ('op', name, 'W'), np.outer(dz, inputs[node]))
        _accumulate(grads, ('op', name, 'b'), dz)
        dx = p[('op', name, 'W')].T @ dz
        for i, a in enumerate(node.args):
            chunk = dx[i*d:(i+1)*d]
            d_emb[a] = d_emb[a] + chunk if a in d_emb else chunk.copy()

    return total

def _accumulate(grads, key, value):
    if key in grads:
        grads[key] += value
    else:
        grads[key] = np.array(value, dtype=np.float64)

def backprop(model, example):
    """Exact gradient of :func:`loss` with respect to every parameter

    Returns
    -------
    grads : dict
        Same keys and shapes as ``model.params``; parameters not involved
        in the example get zero arrays
    """
    grads = {}
    _loss_and_gradient(model, example, grads)
    for k, v in model.params.items():
        if k not in grads:
            grads[k] = np.zeros_like(v)
    return grads

def train(model, examples, schedule):
    """Mini-batch gradient descent

    Each epoch shuffles the examples (seeded by ``schedule.seed``),
    splits them into batches of ``schedule.batch_size`` and applies one
    step of the batch-averaged gradient.

    Parameters
    ----------
    model : :class:`tnn_model`
        Left untouched
    examples : sequence of :class:`train_example`
    schedule : :class:`train_schedule`

    Returns
    -------
    model : :class:`tnn_model`
        A trained copy

    Raises
    ------
    EmptyDatasetError
    """
    examples = list(examples)
    if len(examples) == 0:
        raise EmptyDatasetError("Cannot train on an empty dataset")

    new = model.copy()
    new.clear_cache()
    rng = np.random.default_rng(schedule.seed)
    n = len(examples)
    lr = schedule.learning_rate

    for epoch in range(schedule.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, schedule.batch_size):
            batch = perm[start:start+schedule.batch_size]
            grads = {}
            for i in batch:
                epoch_loss += _loss_and_gradient(new, examples[i], grads)
            scale = lr / len(batch)
            for k, g in grads.items():
                new.params[k] -= scale * g
        logger.debug(f"Epoch {epoch+1}/{schedule.epochs}: mean loss {epoch_loss/n:.6f}")

    new.clear_cache()
    return new

_header_re = re.compile(r'tnn-checkpoint v(\d+) dim=(\d+)$')

def _format_row(values):
    return ' '.join(repr(float(x)) for x in values)

def save_model(model):
    """Serializes a model to the plain-text checkpoint format

    Format::

        tnn-checkpoint v1 dim=<d>
        op <name> <arity>
        <rows of the operator matrix, then the bias>   (arity > 0)
        <the embedding vector>                        (arity = 0)
        head <name> <outputs>
        <layer 0 matrix rows> <layer 0 bias> <layer 1 matrix rows> <layer 1 bias>

    Floats are written with ``repr`` so the round trip is exact.
    """
    p = model.params
    lines = [f"tnn-checkpoint v{CHECKPOINT_VERSION} dim={model.dim}"]
    for op in model.sig:
        lines.append(f"op {op.name} {op.arity}")
        if op.arity == 0:
            lines.append(_format_row(p[('op', op.name)]))
        else:
            lines.extend(_format_row(row) for row in p[('op', op.name, 'W')])
            lines.append(_format_row(p[('op', op.name, 'b')]))
    for name, n in model.heads.items():
        lines.append(f"head {name} {n}")
        for i in range(tnn_model.HEAD_LAYERS):
            lines.extend(_format_row(row) for row in p[('head', name, i, 'W')])
            lines.append(_format_row(p[('head', name, i, 'b')]))
    return '\n'.join(lines) + '\n'

class _line_reader(object):
    def __init__(self, text):
        self.lines = text.splitlines()
        self.i = 0

    @property
    def lineno(self):
        return self.i + 1

    def eof(self):
        return self.i >= len(self.lines)

    def next(self):
        if self.eof():
            raise CheckpointFormatError("Unexpected end of file", self.lineno)
        line = self.lines[self.i]
        self.i += 1
        return line

    def floats(self, n):
        lineno = self.lineno
        line = self.next()
        try:
            values = np.array([float(x) for x in line.split()], dtype=np.float64)
        except ValueError:
            raise CheckpointFormatError("Invalid number", lineno)
        if len(values) != n:
            raise CheckpointFormatError(f"Expected {n} values, found {len(values)}", lineno)
        return values

    def matrix(self, rows, cols):
        return np.vstack([self.floats(cols) for _ in range(rows)]) if rows else np.zeros((0, cols))

def load_model(text, literals=None, cache_size=0):
    """Reads a model written by :func:`save_model`

    Parameters
    ----------
    text : str
    literals : dict, optional
        Literal operator families of the task signature (they are not
        stored in checkpoints)

    Raises
    ------
    CheckpointVersionError
        Unknown header version
    CheckpointFormatError
        Any other malformation (with its line number)
    """
    r = _line_reader(text)
    header = r.next().strip()
    m = _header_re.match(header)
    if not m:
        if header.startswith('tnn-checkpoint'):
            raise CheckpointVersionError(f"Unrecognized checkpoint header '{header}'", 1)
        raise CheckpointFormatError("Not a TNN checkpoint", 1)
    if int(m.group(1)) != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"Unsupported checkpoint version {m.group(1)}", 1)
    d = int(m.group(2))

    sig = signature(literals=literals)
    heads = OrderedDict()
    params = {}

    while not r.eof():
        lineno = r.lineno
        fields = r.next().split()
        if not fields:
            continue
        try:
            kind, name, n = fields[0], fields[1], int(fields[2])
            if len(fields) != 3:
                raise ValueError
        except (IndexError, ValueError):
            raise CheckpointFormatError("Expected 'op <name> <arity>' or 'head <name> <outputs>'", lineno)

        if kind == 'op':
            try:
                sig.add(term_operator(name, n))
            except SignatureError as e:
                raise CheckpointFormatError(str(e), lineno)
            if n == 0:
                params[('op', name)] = r.floats(d)
            else:
                params[('op', name, 'W')] = r.matrix(d, n*d)
                params[('op', name, 'b')] = r.floats(d)
        elif kind == 'head':
            heads[name] = n
            params[('head', name, 0, 'W')] = r.matrix(d, d)
            params[('head', name, 0, 'b')] = r.floats(d)
            params[('head', name, 1, 'W')] = r.matrix(n, d)
            params[('head', name, 1, 'b')] = r.floats(n)
        else:
            raise CheckpointFormatError(f"Unknown block type '{kind}'", lineno)

    if not heads:
        raise CheckpointFormatError("Checkpoint has no heads", r.lineno)

    return tnn_model(sig, d, heads, params, cache_size=cache_size)

def read_model_file(filepath, literals=None, cache_size=0):
    """Loads a checkpoint file

    Raises
    ------
    IOError
        If the file cannot be opened
    """
    try:
        with open(filepath) as f:
            text = f.read()
    except IOError:
        raise IOError(f"Cannot open checkpoint file: {filepath}")
    return load_model(text, literals=literals, cache_size=cache_size)

def write_model_file(model, filepath):
    with open(filepath, 'w') as f:
        f.write(save_model(model))
