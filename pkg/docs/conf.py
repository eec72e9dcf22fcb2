# -*- coding: utf-8 -*-
#
# LQG Feedback documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from lqg_feedback import __version__  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'LQG Feedback'
copyright = u'2026, LQG Feedback authors'
author = u'LQG Feedback authors'

version = __version__
release = __version__

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'LQGFeedbackdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (master_doc, 'LQGFeedback.tex', u'LQG Feedback Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'lqg-feedback', u'LQG Feedback Documentation',
     [author], 1)
]


def setup(app):
    app.add_object_type('confval', 'confval',
                        objname='configuration value',
                        indextemplate='pair: %s; configuration value')
