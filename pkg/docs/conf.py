#!/usr/bin/env python3
#
# Improvr documentation build configuration file

import os, runpy, sys

sys.path.insert(0, os.path.abspath('..'))

from improvr import conf
conf.configure()

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'Improvr'
copyright = '2026, Christopher Trudeau'
author = 'Christopher Trudeau'

# version comes from setup.py's SETUP_ARGS
setup_module = runpy.run_path(os.path.join(os.path.dirname(__file__),
    '..', 'setup.py'))
version = setup_module['SETUP_ARGS']['version']
release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'Improvrdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
  (master_doc, 'Improvr.tex', 'Improvr Documentation',
   'Christopher Trudeau', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'improvr', 'Improvr Documentation',
     [author], 1)
]
