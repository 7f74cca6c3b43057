"""Exact symbolic engine for star products on a symplectic chart.

Everything is computed with truncated formal series over exact
complex-rational polynomial coefficients, so algebraic identities can be
checked as exact equations rather than floating-point approximations.
"""

from .poly import CR_I, CR_ONE, CR_ZERO, CRat, Poly, crat, rat
from .weyl_core import (
    END,
    SCALAR,
    VEC,
    DimensionError,
    GradedElement,
    KindError,
    TruncationOrder,
    commutator_ad,
    omega_form,
    omega_tilde,
    scaled_ad,
)

__version__ = "0.1.0"
