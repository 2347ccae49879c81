"""
Synthesis of Diophantine equations over Z/16Z

A polynomial in the parameter k and the variables x, y, z defines the
set D(p) = { k | exists x, y, z with p(k, x, y, z) = 0 (mod 16) }. A
problem asks for a polynomial defining a given subset of [0, 15].

A monomial is stored as a padded tuple ``(coef, ek, ex, ey, ez)`` and a
polynomial as a tuple of at most five monomials, sorted by strictly
decreasing exponent vectors. The list form used in files drops trailing
zero exponents, e.g. ``[[1, 2, 3], [2, 0, 0, 4]]`` for k^2 x^3 + 2 y^4.
"""
from collections import namedtuple, Counter
from functools import lru_cache
import re

import numpy as np
import simplejson

from synthesis_tools.term import signature, term, term_operator
from synthesis_tools.search.mcts import search_spec, Status
from synthesis_tools.tasks import problems as problem_io
from synthesis_tools.errors import IllegalMoveError, GenerationStalledError, TermParseError

import logging
logger = logging.getLogger(__name__)

MODULUS = 16
VARIABLES = ('k', 'x', 'y', 'z')
MAX_MONOMIALS = 5
MAX_EXPONENT = 4
MAX_COEF = MODULUS - 1

N_COEF_MOVES = MAX_COEF
N_EXP_MOVES = MAX_EXPONENT + 1
MOVE_COUNT = N_COEF_MOVES + N_EXP_MOVES

FULL_SET = frozenset(range(MODULUS))

dioph_state = namedtuple('dioph_state', ['poly', 'pending', 'target'])
dioph_state.__doc__ = """Search state

Attributes
----------
poly : tuple
    Completed monomials (normalized)
pending : tuple or None
    ``(coef, exponents)`` of the monomial being built
target : frozenset
"""

def coef_move(c):
    return c - 1

def exp_move(e):
    return N_COEF_MOVES + e

def move_label(move):
    if move < N_COEF_MOVES:
        return f"Coef({move + 1})"
    return f"Exp({move - N_COEF_MOVES})"

"""
Polynomials
"""

def _pad(m):
    m = list(m)
    if not m:
        raise ValueError("Empty monomial")
    exps = m[1:]
    if len(exps) > len(VARIABLES):
        raise ValueError(f"Monomial {m} has more than {len(VARIABLES)} exponents")
    return (m[0],) + tuple(exps) + (0,)*(len(VARIABLES) - len(exps))

def normalize_poly(monomials):
    """Canonical polynomial

    Merges monomials with equal exponents (coefficients mod 16), drops
    zero coefficients and sorts by decreasing exponent vector.

    Parameters
    ----------
    monomials : iterable
        Monomials in list form ``[coef, e1, ...]`` or padded

    Returns
    -------
    poly : tuple of padded monomials
    """
    coefs = {}
    for m in monomials:
        m = _pad(m)
        coefs[m[1:]] = (coefs.get(m[1:], 0) + m[0]) % MODULUS
    return tuple((c,) + exps for exps, c in sorted(coefs.items(), reverse=True) if c != 0)

def is_normalized(poly):
    if len(poly) > MAX_MONOMIALS:
        return False
    for i, m in enumerate(poly):
        if not 1 <= m[0] <= MAX_COEF or any(not 0 <= e <= MAX_EXPONENT for e in m[1:]):
            return False
        if i > 0 and not m[1:] < poly[i-1][1:]:
            return False
    return True

def to_list(poly):
    """List form: one list per monomial, trailing zero exponents dropped"""
    out = []
    for m in poly:
        m = list(m)
        while len(m) > 1 and m[-1] == 0:
            m.pop()
        out.append(m)
    return out

def poly_size(poly):
    """Sum of the lengths of the monomials in list form"""
    return sum(len(m) for m in to_list(poly))

def eval_poly(p, k, x, y, z):
    """Value of `p` at (k, x, y, z) in Z/16Z

    `p` may be in list or padded form.
    """
    values = (k, x, y, z)
    total = 0
    for m in p:
        term_value = m[0]
        for v, e in zip(values, m[1:]):
            term_value = term_value * pow(v, e, MODULUS) % MODULUS
        total = (total + term_value) % MODULUS
    return total

_powers = np.array([[pow(v, e, MODULUS) for e in range(MAX_EXPONENT + 1)] for v in range(MODULUS)],
                   dtype=np.int64)

@lru_cache(maxsize=2**16)
def _dioph_set(poly):
    shape = (MODULUS,)*len(VARIABLES)
    total = np.zeros(shape, dtype=np.int64)
    for m in poly:
        value = np.full(shape, m[0] % MODULUS, dtype=np.int64)
        for axis, e in enumerate(m[1:]):
            view = [1]*len(VARIABLES)
            view[axis] = MODULUS
            value = value * _powers[:, e].reshape(view) % MODULUS
        total = (total + value) % MODULUS
    zeros = (total == 0).reshape(MODULUS, -1).any(axis=1)
    return frozenset(int(k) for k in np.flatnonzero(zeros))

def clear_caches():
    _dioph_set.cache_clear()

def dioph_set(poly):
    """Set of k in [0, 15] for which some x, y, z make `poly` vanish

    The empty polynomial is 0 everywhere and defines the full set.
    """
    return _dioph_set(tuple(_pad(m) for m in poly))

def verify_witness(poly, target):
    """Exhaustive check that `poly` defines `target`

    Evaluates the polynomial point by point with :func:`eval_poly`.
    """
    target = frozenset(target)
    for k in range(MODULUS):
        found = False
        for x in range(MODULUS):
            for y in range(MODULUS):
                for z in range(MODULUS):
                    if eval_poly(poly, k, x, y, z) == 0:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if found != (k in target):
            return False
    return True

"""
Search problem
"""

def legal_moves(state):
    """Coefficient moves open a monomial, exponent moves extend it

    The move completing a monomial must keep the exponent vectors
    strictly decreasing.
    """
    if state.pending is None:
        if len(state.poly) >= MAX_MONOMIALS:
            return []
        return list(range(N_COEF_MOVES))
    exps = state.pending[1]
    if len(exps) < len(VARIABLES) - 1 or not state.poly:
        return [exp_move(e) for e in range(N_EXP_MOVES)]
    previous = state.poly[-1][1:]
    return [exp_move(e) for e in range(N_EXP_MOVES) if exps + (e,) < previous]

def apply_move(state, move):
    """
    Raises
    ------
    IllegalMoveError
    """
    if move not in legal_moves(state):
        raise IllegalMoveError(f"Move {move_label(move) if 0 <= move < MOVE_COUNT else move} is not legal")
    if move < N_COEF_MOVES:
        return dioph_state(state.poly, (move + 1, ()), state.target)
    coef, exps = state.pending
    exps = exps + (move - N_COEF_MOVES,)
    if len(exps) == len(VARIABLES):
        return dioph_state(state.poly + ((coef,) + exps,), None, state.target)
    return dioph_state(state.poly, (coef, exps), state.target)

def status(state):
    """Won when no monomial is pending and the polynomial defines the
    target; lost when not won and no move is legal
    """
    if state.pending is None and dioph_set(state.poly) == state.target:
        return Status.WON
    if not legal_moves(state):
        return Status.LOST
    return Status.ONGOING

def heuristic_value(state):
    """Share of [0, 15] classified correctly by the completed monomials"""
    d = dioph_set(state.poly)
    return sum((k in d) == (k in state.target) for k in range(MODULUS)) / MODULUS

class dioph_spec(search_spec):
    """Search problem of one Diophantine target set"""
    move_count = MOVE_COUNT

    def __init__(self, target):
        self.target = frozenset(target)

    @property
    def initial_state(self):
        return dioph_state((), None, self.target)

    def apply(self, state, move):
        return apply_move(state, move)

    def status(self, state):
        return status(state)

    def legal(self, state):
        return legal_moves(state)

    def encode(self, state):
        return encode_state(state)

    def move_label(self, move):
        return move_label(move)

    def witness(self, state):
        return state.poly

"""
Encoding
"""

_set_re = re.compile(r'set_([0-9a-f]{4})$')

def set_literal_name(target):
    mask = sum(1 << k for k in target)
    return f"set_{mask:04x}"

def _set_vector(name):
    m = _set_re.match(name)
    if not m:
        return None
    mask = int(m.group(1), 16)
    return np.array([1.0 if mask >> k & 1 else -1.0 for k in range(MODULUS)])

LITERALS = {'set_': _set_vector}

def dioph_signature():
    """Operators of the polynomial encoding

    ``add`` and ``mul`` (binary), ``pending`` (unary), ``empty``,
    coefficients ``c1..c15``, variable powers ``k_pow0..z_pow4`` and
    ``pair``. Target sets are literals ``set_<hex mask>`` with a fixed
    +1/-1 embedding.
    """
    ops = [term_operator('pair', 2), term_operator('add', 2), term_operator('mul', 2),
           term_operator('pending', 1), term_operator('empty', 0)]
    ops += [term_operator(f"c{c}", 0) for c in range(1, MAX_COEF + 1)]
    ops += [term_operator(f"{v}_pow{e}", 0) for v in VARIABLES for e in range(MAX_EXPONENT + 1)]
    return signature(ops, literals=LITERALS)

_signature = dioph_signature()

def _leaf(name):
    return term(_signature.lookup(name), ())

def _fold(name, items):
    op = _signature.lookup(name)
    t = items[0]
    for item in items[1:]:
        t = term(op, (t, item))
    return t

def _encode_monomial(coef, exps, keep_zeros=False):
    items = [_leaf(f"c{coef}")]
    items += [_leaf(f"{v}_pow{e}") for v, e in zip(VARIABLES, exps) if e or keep_zeros]
    return _fold('mul', items)

def encode_poly(poly, pending=None):
    items = [_encode_monomial(m[0], m[1:]) for m in poly]
    if pending is not None:
        items.append(term(_signature.lookup('pending'), (_encode_monomial(*pending, keep_zeros=True),)))
    if not items:
        return _leaf('empty')
    return _fold('add', items)

def encode_state(state):
    return term(_signature.lookup('pair'),
                (encode_poly(state.poly, state.pending), _leaf(set_literal_name(state.target))))

"""
Problem generation
"""

def random_poly(rng):
    """Random polynomial before normalization

    One to five monomials, each with a coefficient in [1, 15] and an
    exponent in [0, 4] for a random subset of the variables.
    """
    monomials = []
    for _ in range(int(rng.integers(1, MAX_MONOMIALS + 1))):
        nvars = int(rng.integers(0, len(VARIABLES) + 1))
        chosen = rng.choice(len(VARIABLES), size=nvars, replace=False)
        exps = [0]*len(VARIABLES)
        for v in chosen:
            exps[v] = int(rng.integers(0, MAX_EXPONENT + 1))
        monomials.append([int(rng.integers(1, MAX_COEF + 1))] + exps)
    return monomials

def gen_problems(count=2200, rng=None, max_draws=None, callback=None):
    """Generates problems from random polynomials

    The set defined by each normalized random polynomial becomes a
    target; the smallest polynomial is kept for each set. Empty
    polynomials and the full set [0, 15] are discarded.

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
            raise GenerationStalledError(f"Found {len(best)} of {count} target sets in {draws} draws")
        draws += 1
        poly = normalize_poly(random_poly(rng))
        if poly:
            image = dioph_set(poly)
            if image != FULL_SET:
                old = best.get(image)
                if old is None or poly_size(poly) < poly_size(old):
                    best[image] = poly
        if callback is not None:
            callback(draws, len(best))

    logger.debug(f"Generated {count} target sets in {draws} draws")
    return [problem_io.problem(i, target, poly, poly_size(poly)) for i, (target, poly) in enumerate(best.items())]

"""
Text formats
"""

def render_set(target):
    return ','.join(str(k) for k in sorted(target))

def parse_set(text):
    text = text.strip()
    if not text:
        return frozenset()
    values = [int(v) for v in text.split(',')]
    if any(not 0 <= v < MODULUS for v in values):
        raise ValueError(f"Set element out of range in '{text}'")
    return frozenset(values)

def render_poly(poly):
    """List form as JSON, e.g. ``[[1, 2, 3], [2, 0, 0, 4]]``"""
    return simplejson.dumps(to_list(poly))

def parse_poly(text):
    """Reads a normalized polynomial in list form

    Raises
    ------
    TermParseError
        When the text is not a normalized polynomial
    """
    try:
        lists = simplejson.loads(text)
        poly = tuple(_pad(m) for m in lists)
    except (ValueError, TypeError) as e:
        raise TermParseError(f"Invalid polynomial '{text}': {e}", 0)
    if not is_normalized(poly):
        raise TermParseError(f"Polynomial '{text}' is not normalized", 0)
    return poly

def render_monomial(m):
    """Readable monomial, e.g. ``7k^2x^2``, ``y``, ``12``"""
    m = _pad(m)
    powers = ''.join(v if e == 1 else f"{v}^{e}" for v, e in zip(VARIABLES, m[1:]) if e)
    if not powers:
        return str(m[0])
    return powers if m[0] == 1 else f"{m[0]}{powers}"

def write_problems(problems, file, header_lines=()):
    problem_io.write_problems(problems, render_set, render_poly, file=file, header_lines=header_lines)

def read_problems(filepath):
    return problem_io.read_problems(filepath, parse_set, parse_poly)

"""
Solution analysis
"""

def monomial_occurrences(witnesses):
    """Occurrences of every monomial among `witnesses`

    Returns
    -------
    rows : list of (rendering, count)
        By descending count, then rendering
    """
    counts = Counter(render_monomial(m) for poly in witnesses for m in poly)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
