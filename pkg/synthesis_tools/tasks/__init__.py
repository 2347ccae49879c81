"""
Registry of synthesis tasks

Generic code (the learning loop and the command line) reaches a task
only through its :class:`task` descriptor.
"""
from synthesis_tools.errors import UnsupportedTaskError

class task(object):
    """Everything the generic code needs to know about a task

    Attributes
    ----------
    name : str
    move_count : int
        Size of the move alphabet (policy head dimension)
    literals : dict
        Literal operator families of the encoding
    """
    name = None
    move_count = 0
    literals = {}
    has_tptp = False
    has_heuristic = False

    def signature(self):
        raise NotImplementedError

    def make_spec(self, target, verification=False):
        """Search problem for `target`; `verification` widens the
        divergence bounds used by the win check"""
        raise NotImplementedError

    def gen_problems(self, count, rng, **kwargs):
        raise NotImplementedError

    def read_problems(self, filepath):
        raise NotImplementedError

    def write_problems(self, problems, file, header_lines=()):
        raise NotImplementedError

    def render_target(self, target):
        raise NotImplementedError

    def parse_target(self, text):
        raise NotImplementedError

    def render_witness(self, witness):
        raise NotImplementedError

    def parse_witness(self, text):
        raise NotImplementedError

    def verify(self, witness, target):
        raise NotImplementedError

    def occurrences(self, witnesses):
        raise NotImplementedError

    def clear_caches(self):
        """Empties the memoized evaluations of the task module"""
        self.module.clear_caches()

    def heuristic_value(self, state):
        raise UnsupportedTaskError(f"No heuristic value function for task '{self.name}'")

    def export_tptp(self, target):
        raise UnsupportedTaskError(f"TPTP export is not available for task '{self.name}'")

class combin_task(task):
    name = 'combin'
    has_tptp = True

    def __init__(self):
        from synthesis_tools.tasks import combin
        self.module = combin
        self.move_count = len(combin.MOVES)
        self.literals = combin.LITERALS

    def signature(self):
        return self.module.comb_signature()

    def make_spec(self, target, verification=False):
        c = self.module
        if verification:
            return c.comb_spec(target, c.GEN_MAX_STEPS*c.VERIFY_FACTOR, c.GEN_MAX_SIZE*c.VERIFY_FACTOR)
        return c.comb_spec(target)

    def gen_problems(self, count, rng, **kwargs):
        return self.module.gen_problems(count, rng, **kwargs)

    def read_problems(self, filepath):
        return self.module.read_problems(filepath)

    def write_problems(self, problems, file, header_lines=()):
        self.module.write_problems(problems, file, header_lines)

    def render_target(self, target):
        return self.module.render_comb(target)

    def parse_target(self, text):
        return self.module.parse_comb(text)

    def render_witness(self, witness):
        return self.module.render_comb(witness)

    def parse_witness(self, text):
        return self.module.parse_comb(text)

    def verify(self, witness, target):
        return self.module.verify_witness(witness, target)

    def occurrences(self, witnesses):
        return self.module.subterm_occurrences(witnesses)

    def export_tptp(self, target):
        return self.module.export_tptp(target)

class dioph_task(task):
    name = 'dioph'
    has_heuristic = True

    def __init__(self):
        from synthesis_tools.tasks import dioph
        self.module = dioph
        self.move_count = dioph.MOVE_COUNT
        self.literals = dioph.LITERALS

    def signature(self):
        return self.module.dioph_signature()

    def make_spec(self, target, verification=False):
        return self.module.dioph_spec(target)

    def gen_problems(self, count, rng, **kwargs):
        kwargs.pop('max_solution_size', None)
        return self.module.gen_problems(count, rng, **kwargs)

    def read_problems(self, filepath):
        return self.module.read_problems(filepath)

    def write_problems(self, problems, file, header_lines=()):
        self.module.write_problems(problems, file, header_lines)

    def render_target(self, target):
        return self.module.render_set(target)

    def parse_target(self, text):
        return self.module.parse_set(text)

    def render_witness(self, witness):
        return self.module.render_poly(witness)

    def parse_witness(self, text):
        return self.module.parse_poly(text)

    def verify(self, witness, target):
        return self.module.verify_witness(witness, target)

    def occurrences(self, witnesses):
        return self.module.monomial_occurrences(witnesses)

    def heuristic_value(self, state):
        return self.module.heuristic_value(state)

TASKS = {'combin': combin_task, 'dioph': dioph_task}

def get_task(name):
    """Task descriptor by name

    Raises
    ------
    UnsupportedTaskError
    """
    try:
        return TASKS[name]()
    except KeyError:
        raise UnsupportedTaskError(f"Unknown task '{name}' (expected one of {', '.join(TASKS)})")
