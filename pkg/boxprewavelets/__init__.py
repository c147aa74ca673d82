"""Top-level module for boxprewavelets"""

# Import boxprewavelets sub-modules
from . import laurent
from . import boxspline
from . import certify
from . import prewavelet
from . import render
from . import export
from . import utils
