"""
Exceptions raised by synthesis_tools
"""

class SynthesisError(Exception):
    """Base class of all package errors"""
    pass

class SignatureError(SynthesisError):
    pass

class TermParseError(SynthesisError):
    """Malformed term text

    Attributes
    ----------
    position : int
        Offset in the input text where parsing failed
    """
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position

class CheckpointFormatError(SynthesisError):
    """Malformed TNN checkpoint

    Attributes
    ----------
    lineno : int
        1-based line number of the offending line
    """
    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno

class CheckpointVersionError(CheckpointFormatError):
    pass

class DimensionError(SynthesisError):
    pass

class EmptyDatasetError(SynthesisError):
    pass

class SearchError(SynthesisError):
    pass

class IllegalMoveError(SynthesisError):
    pass

class EncodingError(SynthesisError):
    pass

class GenerationStalledError(SynthesisError):
    pass

class ProblemFileError(SynthesisError):
    pass

class UnsupportedTaskError(SynthesisError):
    pass
