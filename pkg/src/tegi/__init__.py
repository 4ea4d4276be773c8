"""tegi: tensor index notation as a programming language.

A small Scheme-flavoured interpreter whose parameter kinds ($, %, *$)
let functions written on scalars apply pointwise across marked tensor
axes, with Einstein-style contraction, index completion, and enough
differential-form machinery (wedge, d, hodge) to do curvature by hand.
"""

from .errors import TegiError
from .evaluator import Interpreter, format_value

__version__ = "0.1.0"

__all__ = ["Interpreter", "TegiError", "format_value", "__version__"]
