"""
Numerical operator-semigroup calculus package initialization.
"""
import logging

from semigroup_calculus.version import get_current_version

__version__ = get_current_version()

logging.getLogger(__name__).addHandler(logging.NullHandler())
