from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version('synthesis_tools')
except PackageNotFoundError:
    __version__ = 'unknown'

__all__ = ["term", "rl"]
