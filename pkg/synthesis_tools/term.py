"""
This module contains the operator signatures and first-order terms
(labeled ordered trees) shared by the tree neural network and the
synthesis tasks.
"""
import re
from collections import namedtuple

from synthesis_tools.errors import SignatureError, TermParseError

import logging
logger = logging.getLogger(__name__)

_name_re = re.compile(r'[A-Za-z0-9_]+')

class term_operator(namedtuple('term_operator', ['name', 'arity'])):
    """An operator symbol with a fixed arity

    Attributes
    ----------
    name : str
        Identifier matching ``[A-Za-z0-9_]+``
    arity : int
        Number of arguments (>= 0)
    """
    __slots__ = ()

    def __new__(cls, name, arity):
        if not _name_re.fullmatch(name):
            raise SignatureError(f"Invalid operator name: '{name}'")
        if arity < 0:
            raise SignatureError(f"Negative arity for operator '{name}'")
        return super().__new__(cls, name, int(arity))

class signature(object):
    """A finite set of operators, identified by name

    Besides declared operators, a signature may recognise families of
    arity-0 *literal* operators whose embedding is fixed rather than
    learned (for example the target set of a Diophantine problem). A
    literal family is a callable mapping an operator name to a vector,
    or to None when the name does not belong to the family.

    Parameters
    ----------
    operators : iterable of :class:`term_operator` or (name, arity) tuples
    literals : dict, optional
        Mapping of name prefix to a literal family callable
    """
    def __init__(self, operators=(), literals=None):
        self._ops = {}
        self.literals = dict(literals or {})
        for op in operators:
            self.add(op if isinstance(op, term_operator) else term_operator(*op))

    def add(self, op):
        if op.name in self._ops:
            raise SignatureError(f"Duplicate operator name: '{op.name}'")
        self._ops[op.name] = op
        return op

    @property
    def operators(self):
        return list(self._ops.values())

    def literal_vector(self, name):
        """Returns the fixed vector of a literal operator (None otherwise)"""
        for prefix, family in self.literals.items():
            if name.startswith(prefix):
                v = family(name)
                if v is not None:
                    return v
        return None

    def lookup(self, name):
        """Operator for `name`

        Raises
        ------
        SignatureError
            If the name is neither declared nor a literal
        """
        op = self._ops.get(name)
        if op is not None:
            return op
        if self.literal_vector(name) is not None:
            return term_operator(name, 0)
        raise SignatureError(f"Unknown operator: '{name}'")

    def __contains__(self, x):
        if isinstance(x, term_operator):
            return self._ops.get(x.name) == x or (x.arity == 0 and self.literal_vector(x.name) is not None)
        try:
            self.lookup(x)
            return True
        except SignatureError:
            return False

    def __getitem__(self, name):
        return self.lookup(name)

    def __iter__(self):
        return iter(self._ops.values())

    def __len__(self):
        return len(self._ops)

class term(object):
    """Immutable operator-labeled ordered tree

    Terms compare and hash structurally, so they can be used as
    dictionary keys. Well-formedness is not enforced at construction
    (see :func:`check_wf`).
    """
    __slots__ = ('op', 'args', '_hash', '_size')

    def __init__(self, op, args=()):
        args = tuple(args)
        object.__setattr__(self, 'op', op)
        object.__setattr__(self, 'args', args)
        object.__setattr__(self, '_hash', hash((op.name, args)))
        object.__setattr__(self, '_size', 1 + sum(a._size for a in args))

    def __setattr__(self, key, value):
        raise AttributeError("term is immutable")

    def __reduce__(self):
        # hashes of str differ between processes, so rebuild on unpickling
        return (term, (self.op, self.args))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, term):
            return NotImplemented
        return (self._hash == other._hash and self._size == other._size
                and self.op == other.op and self.args == other.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"term({serialize_term(self)!r})"

    def __str__(self):
        return serialize_term(self)

def make_term(sig, name, *args):
    """Convenience constructor looking the operator up in `sig`"""
    return term(sig.lookup(name), args)

def check_wf(t, sig):
    """Whether `t` is well-formed over `sig`

    Every node's operator must belong to the signature and have
    exactly arity-many children.
    """
    stack = [t]
    while stack:
        node = stack.pop()
        if node.op not in sig or len(node.args) != node.op.arity:
            return False
        stack.extend(node.args)
    return True

def term_size(t):
    """Total number of nodes"""
    return t._size

def subterms(t):
    """Yields every node of `t` in pre-order (with repetitions)"""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.args))

def serialize_term(t):
    """Renders `t` as ``name`` or ``name(arg1,arg2,...)``"""
    if not t.args:
        return t.op.name
    return t.op.name + '(' + ','.join(serialize_term(a) for a in t.args) + ')'

def parse_term(text, sig):
    """Parses the text form produced by :func:`serialize_term`

    Parameters
    ----------
    text : str
    sig : :class:`signature`

    Returns
    -------
    t : :class:`term`

    Raises
    ------
    TermParseError
        On malformed input or an argument count differing from the arity
    SignatureError
        When `sig` lacks an operator name
    """
    pos = _skip_ws(text, 0)
    t, pos = _parse_at(text, pos, sig)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise TermParseError("Trailing characters", pos)
    return t

def _skip_ws(text, pos):
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos

def _parse_at(text, pos, sig):
    m = _name_re.match(text, pos)
    if not m:
        where = "end of input" if pos >= len(text) else f"'{text[pos]}'"
        raise TermParseError(f"Expected operator name, found {where}", pos)
    name = m.group(0)
    op = sig.lookup(name)
    pos = _skip_ws(text, m.end())

    args = []
    if pos < len(text) and text[pos] == '(':
        pos = _skip_ws(text, pos + 1)
        while True:
            arg, pos = _parse_at(text, pos, sig)
            args.append(arg)
            pos = _skip_ws(text, pos)
            if pos >= len(text):
                raise TermParseError("Unexpected end of input", pos)
            if text[pos] == ',':
                pos = _skip_ws(text, pos + 1)
            elif text[pos] == ')':
                pos += 1
                break
            else:
                raise TermParseError(f"Expected ',' or ')', found '{text[pos]}'", pos)

    if len(args) != op.arity:
        raise TermParseError(f"Operator '{name}' expects {op.arity} argument(s), got {len(args)}", m.start())

    return term(op, args), pos
