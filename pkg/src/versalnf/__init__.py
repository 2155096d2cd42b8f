"""Exact symbolic engine for versal normal forms of parametric linear
vector fields (general-linear and symplectic) and first-order nonlinear
normal forms of nilpotent singularities, built on rational sl2 machinery.

Everything is computed over exact scalars: reduced multivariate rational
functions over the rationals, optionally inside a tower of square-root
extensions.  No eigenvalues are ever computed; the pipeline only uses
characteristic polynomials, linear elimination, and branch selection for
the quadratic matching steps.
"""

from .expr import (
    BranchPointError,
    Context,
    DivisionByZeroScalar,
    ExprError,
    ParameterDecl,
    ParseError,
    RingModeViolation,
    TowerScalar,
    build_context,
    laurent_coeffs,
    parse_expression,
    series_expand,
)
from .pmatrix import (
    AffineSolutionFamily,
    CharPoly,
    LinearSolveError,
    ParamMatrix,
    charpoly,
    conjugacy_solve,
    det,
    inverse,
    matrix_eval,
    solve_linear,
)
from .sl2 import (
    Sl2Triple,
    SymplecticContext,
    is_symplectic,
    jacobson_morozov,
    sn_split,
    style_subspaces,
    transport_form,
)
from .pvf import PolyVectorField, field_from_matrix, matrix_from_field
from .homological import (
    GradeOperator,
    NormalFormStepResult,
    ResonanceError,
    build_q,
    find_resonances,
    graded_normal_form,
    nbar,
    nonsemisimple_reduce,
    normal_form_step,
    resonance_detect,
)
from .vnf import (
    BranchRule,
    PipelineOptions,
    VersalAnsatz,
    VersalResult,
    build_ansatz,
    match_charpoly,
    solve_transformation,
    versal_pipeline,
)
from .cases import CASES, CaseReport, case_dim2, case_dim3, case_l4, case_pipe

__version__ = "0.1.0"
