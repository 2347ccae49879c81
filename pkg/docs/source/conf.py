import os
import sys

from datetime import datetime
extensions = [
    "sphinx.ext.intersphinx",
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "numpydoc",
    "sphinx_click",
]

autosectionlabel_prefix_document = True
numpydoc_show_class_members = False

intersphinx_mapping = {
    'numpy': ('https://numpy.org/doc/stable', None),
    'pandas': ('https://pandas.pydata.org/docs', None),
}

sys.path.insert(0, os.path.abspath('../..'))

project = 'synthesis-tools'
copyright = f'{datetime.now().year}, synthesis-tools developers'
author = 'synthesis-tools developers'
version = '0.1.0'
templates_path = ['_templates']
source_suffix = {
    ".rst": "restructuredtext",
}
master_doc = 'index'
pygments_style = 'sphinx'

html_theme = 'pydata_sphinx_theme'
html_theme_options = {
    "external_links": [],
}
