import sys
import pathlib

from setuptools import find_packages, setup

if sys.version_info[0] != 3 or sys.version_info[1] < 9:
    print("Package requires Python version 3.9+")
    sys.exit(1)

install_requires = [
    "numpy>=1.17",
    "pandas",
    "simplejson",
    "tqdm",
    "click",
    "click-option-group",
    "yaspin",
    "colorlog",
]

extras_require = {
    "test": ["pytest", "scipy>=1.0"],
}

__version__ = "0.1.0"

setup(
    name = "synthesis_tools",
    version = __version__,
    license = "GPL-3.0-or-later",
    description = "Self-learned synthesis of combinators and Diophantine equations",
    long_description=(pathlib.Path(__file__).parent / "README.md").read_text(),
    long_description_content_type="text/markdown",
    keywords = ["program synthesis", "combinatory logic", "diophantine equations",
                "monte carlo tree search", "tree neural networks", "reinforcement learning"],
    zip_safe = False,
    packages = find_packages(exclude=["tests", "examples", "examples.*"]),
    package_data={'synthesis_tools': ['logging.conf']},
    install_requires = install_requires,
    extras_require = extras_require,
    include_package_data = True,
    entry_points = {"console_scripts": ["synth = synthesis_tools.__main__:main"]},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
)
