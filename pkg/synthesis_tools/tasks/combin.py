"""
Synthesis of SK-combinators

A combinator is an atom (``'S'``, ``'K'``, the placeholder ``'X'`` or a
variable ``'v1'``, ``'v2'``, ``'v3'``) or an application, represented
as a pair ``(left, right)``. A problem asks for a combinator `w` such
that ``w v1 v2 v3`` reduces to a given target built from the variables
only.

Witnesses are synthesized top-down from ``X`` by rewriting the first
occurrence of ``X`` with one of five templates. The templates never
create a redex, so every X-free witness is in normal form.
"""
from collections import namedtuple, Counter
from functools import lru_cache
import re

import numpy as np

from synthesis_tools.term import signature, term, term_operator
from synthesis_tools.search.mcts import search_spec, Status
from synthesis_tools.tasks import problems as problem_io
from synthesis_tools.errors import (EncodingError, IllegalMoveError, TermParseError,
                                    GenerationStalledError)

import logging
logger = logging.getLogger(__name__)

S, K, X = 'S', 'K', 'X'
VARIABLES = ('v1', 'v2', 'v3')

GEN_MAX_STEPS = 100
GEN_MAX_SIZE = 400
VERIFY_FACTOR = 10

MAX_VAR_ARITY = 8

MOVES = (S, (S, X), ((S, X), X), K, (K, X))
MOVE_LABELS = ('X->S', 'X->S X', 'X->S X X', 'X->K', 'X->K X')

LITERALS = {}

comb_state = namedtuple('comb_state', ['witness', 'target'])

def is_app(c):
    return isinstance(c, tuple)

def app(*items):
    """Left-associated application ``app(a, b, c) = ((a b) c)``"""
    c = items[0]
    for a in items[1:]:
        c = (c, a)
    return c

def unwind(c):
    """Head atom and argument list of the application spine of `c`"""
    args = []
    while is_app(c):
        args.append(c[1])
        c = c[0]
    args.reverse()
    return c, args

def _atoms(c):
    stack = [c]
    while stack:
        node = stack.pop()
        if is_app(node):
            stack.append(node[1])
            stack.append(node[0])
        else:
            yield node

def node_count(c):
    """Number of atoms and applications"""
    n = 0
    stack = [c]
    while stack:
        node = stack.pop()
        n += 1
        if is_app(node):
            stack.extend(node)
    return n

def comb_size(c):
    """Number of S and K leaves"""
    return sum(1 for a in _atoms(c) if a == S or a == K)

def contains_x(c):
    return any(a == X for a in _atoms(c))

"""
Rewriting
"""

def _contract(head, args):
    """Contracts a head redex of the spine, or returns None"""
    if head == S and len(args) >= 3:
        x, y, z = args[:3]
        return app(((x, z), (y, z)), *args[3:]), node_count(z) - 1
    if head == K and len(args) >= 2:
        return app(args[0], *args[2:]), -(3 + node_count(args[1]))
    return None

def _find_redex(c):
    """Path (argument indices along spines) to the left-outermost redex"""
    stack = [(c, ())]
    while stack:
        node, path = stack.pop()
        head, args = unwind(node)
        if (head == S and len(args) >= 3) or (head == K and len(args) >= 2):
            return path
        for i in range(len(args) - 1, -1, -1):
            if is_app(args[i]):
                stack.append((args[i], path + (i,)))
    return None

def _contract_at(c, path):
    frames = []
    node = c
    for i in path:
        head, args = unwind(node)
        frames.append((head, args, i))
        node = args[i]
    new, delta = _contract(*unwind(node))
    for head, args, i in reversed(frames):
        args = list(args)
        args[i] = new
        new = app(head, *args)
    return new, delta

def lo_step(c):
    """One left-outermost reduction step

    ``S x y z -> (x z)(y z)`` and ``K x y -> x``.

    Returns
    -------
    c : combinator or None
        None when `c` has no redex
    """
    path = _find_redex(c)
    if path is None:
        return None
    return _contract_at(c, path)[0]

def normalize(c, max_steps=GEN_MAX_STEPS, max_size=GEN_MAX_SIZE):
    """Normal form by left-outermost reduction

    Returns None when more than `max_steps` steps are needed or when a
    term of more than `max_size` nodes appears.
    """
    size = node_count(c)
    if size > max_size:
        return None
    steps = 0
    while True:
        path = _find_redex(c)
        if path is None:
            return c
        if steps >= max_steps:
            return None
        c, delta = _contract_at(c, path)
        steps += 1
        size += delta
        if size > max_size:
            return None

def apply_variables(c):
    return app(c, *VARIABLES)

"""
Normal forms: counting and uniform generation
"""

@lru_cache(maxsize=None)
def count_nf(n):
    """Number of normal forms of size `n`

    Normal forms are S, K, S a, K a and S a b with a, b in normal form.
    """
    if n < 1:
        raise ValueError("Combinator size must be at least 1")
    if n == 1:
        return 2
    return 2*count_nf(n-1) + sum(count_nf(i)*count_nf(n-1-i) for i in range(1, n-1))

def _randbelow(rng, n):
    """Uniform integer in [0, n) for arbitrarily large n"""
    if n <= 2**62:
        return int(rng.integers(n))
    bits = n.bit_length()
    mask = (1 << bits) - 1
    while True:
        x = 0
        for _ in range(0, bits, 32):
            x = (x << 32) | int(rng.integers(2**32))
        x &= mask
        if x < n:
            return x

def random_nf(n, rng):
    """Normal form of size `n` drawn uniformly at random

    Parameters
    ----------
    n : int
    rng : :class:`numpy.random.Generator`
    """
    if n < 1:
        raise ValueError("Combinator size must be at least 1")
    if n == 1:
        return S if _randbelow(rng, 2) == 0 else K

    r = _randbelow(rng, count_nf(n))
    unary = count_nf(n-1)
    if r < unary:
        return (S, random_nf(n-1, rng))
    r -= unary
    if r < unary:
        return (K, random_nf(n-1, rng))
    r -= unary
    for i in range(1, n-1):
        weight = count_nf(i) * count_nf(n-1-i)
        if r < weight:
            return ((S, random_nf(i, rng)), random_nf(n-1-i, rng))
        r -= weight
    raise AssertionError("Unreachable")

def all_normal_forms(n):
    """Every normal form of size `n`"""
    if n == 1:
        yield S
        yield K
        return
    for a in all_normal_forms(n-1):
        yield (S, a)
    for a in all_normal_forms(n-1):
        yield (K, a)
    for i in range(1, n-1):
        for a in all_normal_forms(i):
            for b in all_normal_forms(n-1-i):
                yield ((S, a), b)

"""
Search problem
"""

def _first_x_path(c):
    """Left/right path to the first X in pre-order"""
    stack = [(c, ())]
    while stack:
        node, path = stack.pop()
        if node == X:
            return path
        if is_app(node):
            stack.append((node[1], path + (1,)))
            stack.append((node[0], path + (0,)))
    return None

def _replace(c, path, new):
    frames = []
    for side in path:
        frames.append((c, side))
        c = c[side]
    for parent, side in reversed(frames):
        new = (new, parent[1]) if side == 0 else (parent[0], new)
    return new

def strip_x(c):
    """Deletes every application whose argument is X

    Returns None for a bare X.
    """
    if c == X:
        return None
    if not is_app(c):
        return c
    left, right = strip_x(c[0]), strip_x(c[1])
    if right is None:
        return left
    if left is None:
        return right
    return (left, right)

def legal_moves(state):
    return list(range(len(MOVES))) if contains_x(state.witness) else []

def apply_move(state, move):
    """Replaces the first X of the witness by the template of `move`

    Raises
    ------
    IllegalMoveError
    """
    path = _first_x_path(state.witness)
    if path is None or not 0 <= move < len(MOVES):
        raise IllegalMoveError(f"Move {move} is not legal in {render_comb(state.witness)}")
    return comb_state(_replace(state.witness, path, MOVES[move]), state.target)

@lru_cache(maxsize=2**16)
def _status(witness, target, max_steps, max_size):
    stripped = strip_x(witness)
    if stripped is not None and normalize(apply_variables(stripped), max_steps, max_size) == target:
        return Status.WON
    return Status.ONGOING if contains_x(witness) else Status.LOST

def clear_caches():
    _status.cache_clear()

def status(state, max_steps=GEN_MAX_STEPS, max_size=GEN_MAX_SIZE):
    """Won if the X-stripped witness applied to v1 v2 v3 reduces to the
    target, lost if the witness is X-free and not won, ongoing otherwise
    """
    return _status(state.witness, state.target, max_steps, max_size)

def verify_witness(w, target, max_steps=GEN_MAX_STEPS*VERIFY_FACTOR, max_size=GEN_MAX_SIZE*VERIFY_FACTOR):
    """Whether ``w v1 v2 v3`` reduces to `target` (X-free witnesses only)"""
    if contains_x(w):
        return False
    return normalize(apply_variables(w), max_steps, max_size) == target

class comb_spec(search_spec):
    """Search problem of one combinator target"""
    move_count = len(MOVES)

    def __init__(self, target, max_steps=GEN_MAX_STEPS, max_size=GEN_MAX_SIZE):
        self.target = target
        self.max_steps = max_steps
        self.max_size = max_size

    @property
    def initial_state(self):
        return comb_state(X, self.target)

    def apply(self, state, move):
        return apply_move(state, move)

    def status(self, state):
        return status(state, self.max_steps, self.max_size)

    def legal(self, state):
        return legal_moves(state)

    def encode(self, state):
        return encode_state(state)

    def move_label(self, move):
        return MOVE_LABELS[move]

    def witness(self, state):
        return strip_x(state.witness)

"""
Encoding
"""

_HEAD_NAMES = {S: ('s', 2), K: ('k', 1), X: ('x', 0)}

def _head_name(head, arity):
    if head in _HEAD_NAMES:
        prefix, max_arity = _HEAD_NAMES[head]
        name = f"{prefix}{arity}"
    elif head in VARIABLES:
        max_arity = MAX_VAR_ARITY
        name = f"{head}_{arity}"
    else:
        raise EncodingError(f"Unknown atom '{head}'")
    if arity > max_arity:
        raise EncodingError(f"'{head}' applied to {arity} arguments (at most {max_arity})")
    return name

def comb_signature():
    """Operators of the combinator encoding

    ``s0..s2``, ``k0..k1``, ``x0``, ``v<i>_0..v<i>_8`` and the binary
    ``pair`` joining witness and target.
    """
    ops = [term_operator(f"s{a}", a) for a in range(3)]
    ops += [term_operator(f"k{a}", a) for a in range(2)]
    ops.append(term_operator('x0', 0))
    for v in VARIABLES:
        ops += [term_operator(f"{v}_{a}", a) for a in range(MAX_VAR_ARITY + 1)]
    ops.append(term_operator('pair', 2))
    return signature(ops)

_signature = comb_signature()

def encode_comb(c):
    """Collapses application spines: a head applied to a arguments
    becomes the operator ``<head><a>`` over the encoded arguments

    Raises
    ------
    EncodingError
        When a spine is longer than the signature allows
    """
    head, args = unwind(c)
    op = _signature.lookup(_head_name(head, len(args)))
    return term(op, [encode_comb(a) for a in args])

def encode_state(state):
    return term(_signature.lookup('pair'), [encode_comb(state.witness), encode_comb(state.target)])

"""
Problem generation
"""

def is_target(c):
    """Only variables, with spines short enough to be encoded"""
    stack = [c]
    while stack:
        node = stack.pop()
        head, args = unwind(node)
        if head not in VARIABLES or len(args) > MAX_VAR_ARITY:
            return False
        stack.extend(args)
    return True

def gen_problems(count=2200, rng=None, max_solution_size=20, max_steps=GEN_MAX_STEPS,
                 max_size=GEN_MAX_SIZE, max_draws=None, callback=None):
    """Generates problems from random normal forms

    Each draw picks a size uniformly in [1, `max_solution_size`] and a
    uniform normal form `w` of that size. The normal form of
    ``w v1 v2 v3`` becomes a target when it exists within the bounds
    and contains only variables. For each target the smallest witness
    is kept.

    Parameters
    ----------
    count : int
        Number of distinct targets
    rng : :class:`numpy.random.Generator`, optional
        Fresh unseeded generator when None
    max_draws : int, optional
        Give up after this many draws
    callback : callable, optional
        Called as ``callback(draws, found)`` after each draw

    Returns
    -------
    problems : list of :class:`synthesis_tools.tasks.problems.problem`

    Raises
    ------
    GenerationStalledError
        When `max_draws` is reached first
    """
    if rng is None:
        rng = np.random.default_rng()
    best = {}
    draws = 0
    while len(best) < count:
        if max_draws is not None and draws >= max_draws:
            raise GenerationStalledError(f"Found {len(best)} of {count} targets in {draws} draws")
        draws += 1
        size = int(rng.integers(1, max_solution_size + 1))
        w = random_nf(size, rng)
        image = normalize(apply_variables(w), max_steps, max_size)
        if image is not None and is_target(image):
            old = best.get(image)
            if old is None or comb_size(w) < comb_size(old):
                best[image] = w
        if callback is not None:
            callback(draws, len(best))

    logger.debug(f"Generated {count} combinator targets in {draws} draws")
    return [problem_io.problem(i, target, w, comb_size(w)) for i, (target, w) in enumerate(best.items())]

"""
Text formats
"""

_token_re = re.compile(r'\s*(?:(S|K|X|v[1-3])|(\()|(\)))')

def render_comb(c):
    """Applicative notation with minimal parentheses, e.g. ``S (K S) K``"""
    head, args = unwind(c)
    return ' '.join([head] + [f"({render_comb(a)})" if is_app(a) else a for a in args])

def parse_comb(text):
    """Inverse of :func:`render_comb`

    Raises
    ------
    TermParseError
    """
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _token_re.match(text, pos)
        if not m:
            raise TermParseError(f"Unexpected character '{text[pos]}'", pos)
        tokens.append((m.group(1) or m.group(2) or m.group(3), m.end()))
        pos = m.end()

    def expr(i):
        items = []
        while i < len(tokens) and tokens[i][0] != ')':
            tok = tokens[i][0]
            if tok == '(':
                sub, i = expr(i + 1)
                if i >= len(tokens):
                    raise TermParseError("Missing ')'", len(text))
                i += 1
            else:
                sub = tok
                i += 1
            items.append(sub)
        if not items:
            raise TermParseError("Empty expression", tokens[i-1][1] if i else 0)
        return app(*items), i

    c, i = expr(0)
    if i != len(tokens):
        raise TermParseError("Unbalanced ')'", tokens[i][1] - 1)
    return c

_tptp_axioms = ("fof(axS,axiom, ![X, Y, Z]: (a(a(a(s,X),Y),Z) = a(a(X,Z),a(Y,Z)))).\n"
                "fof(axK,axiom, ![X, Y]: (a(a(k,X),Y) = X)).\n")

def _tptp_term(c):
    if is_app(c):
        return f"a({_tptp_term(c[0])},{_tptp_term(c[1])})"
    return 'V' + c[1:]

def export_tptp(target):
    """First-order TPTP problem asking for a witness of `target`"""
    return (_tptp_axioms + "fof(conjecture,conjecture, ?[Vc]: ![V1, V2, V3]: "
            f"(a(a(a(Vc,V1),V2),V3) = {_tptp_term(target)})).\n")

def write_problems(problems, file, header_lines=()):
    problem_io.write_problems(problems, render_comb, render_comb, file=file, header_lines=header_lines)

def read_problems(filepath):
    return problem_io.read_problems(filepath, parse_comb, parse_comb)

"""
Solution analysis
"""

def subterm_occurrences(witnesses):
    """Occurrences of every node of the application trees of `witnesses`

    Returns
    -------
    rows : list of (rendering, count)
        By descending count, then rendering
    """
    counts = Counter()
    for w in witnesses:
        stack = [w]
        while stack:
            node = stack.pop()
            counts[render_comb(node)] += 1
            if is_app(node):
                stack.extend(node)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
