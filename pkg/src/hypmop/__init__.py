"""Multiple orthogonal polynomials with two hypergeometric weights on the step line."""

from .numkernel import (BreakdownError, ConvergenceError, GaussBorel, Jet3, Mat,
                        gauss_borel, jet_eval, leading_minors, working_precision)
from .weights import (FIXTURES, FX_C, FX_GC, FX_GM, FX_M, FamilyError, WeightFamily,
                      moment, moment_table, pearson_residual, pfq_eval, pochhammer,
                      shift_params, weight_eval)

__version__ = "0.1.0"
