"""Combinatorial engine for Gauss diagrams of knotted spheres.

The package represents sphere diagrams of 2-dimensional knots as
combinatorial maps (darts, rotation system, edge involution) decorated
with signed, oriented, paired curves, cusps and triple groupings.  On
top of that it computes parity invariants of double lines, applies the
local deformation moves together with the crossing switch and
virtualization quotients, and reduces harvested parity relations with
exact Smith normal form to certify universality statements.
"""

from .errors import DiagramError, DomainError, ParseError, ValidationError
from .abelian import AbelianGroup, Z, Z2
from .snf import smith_normal_form
