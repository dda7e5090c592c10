"""
Numerical continuation and verification toolkit for the logistic
elliptic problem with sublinear boundary harvesting, written in Python
"""

__version__ = "0.4.0"
__description__ = "Continuation, eigenvalue and monotone-iteration toolkit for logistic problems with sublinear boundary harvesting"
__author__ = "logistic-harvest developers"
__author_email__ = "logistic-harvest@users.noreply.github.com"
__license__ = "MIT"
__repository__ = "logistic-harvest/logistic-harvest"

import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())
