# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information

project = 'Link Chain'
copyright = '2023, Cibolabs'
author = 'Cibolabs'

# -- General configuration ---------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration

extensions = [
    'sphinx.ext.autodoc', 'numpydoc',
    'sphinx.ext.autosectionlabel', 'sphinx.ext.intersphinx']

templates_path = ['_templates']
exclude_patterns = []
autodoc_mock_imports = ['numpy', 'scipy']
autodoc_member_order = 'bysource'
# Make sure section targets are unique
autosectionlabel_prefix_document=True


# -- Options for HTML output -------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output

html_theme = 'pydata_sphinx_theme'

html_static_path = []

numpydoc_show_class_members = False

# -- Options for intersphinx extension ---------------------------------------

intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
    "python": ("https://docs.python.org/3", None),
}
