"""divbound: divergences, discrete transport, convex conjugates, and the
inequality engine connecting them to generalization-error bounds on finite
spaces.

Sub-modules
-----------
spaces       finite metric spaces, measures, functions, seeded randomness
convex       rate functions, conjugates, generalized inverses, n-scaling
divergences  phi-divergences and their dual functionals
transport    Wasserstein distances (primal flow solver + dual LP)
tci          forward/converse inequality sweeps and constant estimation
learning     exact-enumeration generalization-error experiments
serialize    JSON file formats
cli          command-line interface (``divbound`` entry point)
"""

from .config import TOLERANCES, Tolerances
from .convex import (
    LEGENDRE_FENCHEL,
    YOUNG,
    ConjugateRate,
    ConvexRate,
    Power,
    Quadratic,
    Tabulated,
    conjugate,
    generalized_inverse,
    lambda_sweep_bound,
    numeric_conjugate_value,
    optimal_lambda,
    scale_by_n,
)
from .divergences import (
    KL,
    ChiSquareForm,
    DivergenceKind,
    DivergenceValue,
    Hellinger,
    TotalVariation,
    chi_square,
    divergence,
    dual_psi,
    fenchel_gap,
    kind_from_name,
    product_dual_identity_check,
    total_variation,
)
from .errors import (
    BudgetExceeded,
    DegenerateSpace,
    DivboundError,
    Infinite,
    InsufficientBudget,
    InsufficientGrid,
    InternalError,
    InvalidFloor,
    NotStrictlyConvex,
    PositivityViolation,
    SpaceMismatch,
    UnsupportedDual,
)
from .learning import (
    BoundReport,
    GibbsAlgorithm,
    JointLaw,
    LearningProblem,
    bound_report,
    chi2_bound,
    cmi_bound,
    gen_err_exact,
    gibbs_kernel,
    ismi_bound,
    mi_bound,
    mutual_information,
    tiny_gibbs_configs,
)
from .spaces import (
    DiscreteMeasure,
    FiniteMetricSpace,
    RealFunction,
    SeededRng,
    central_moment,
    cgf,
    expectation,
    label_space,
    lipschitz_seminorm,
    product_measure,
    product_space,
    random_measure,
)
from .tci import (
    MomentConstant,
    SubGaussianFit,
    TciReport,
    forward_bound,
    lambda_grid,
    lipschitz_family_sampler,
    moment_constant,
    subgaussian_fit,
    tci_check,
    verify_converse,
    verify_forward,
)
from .transport import (
    CouplingPlan,
    TransportResult,
    hamming_space,
    w1_dual,
    wasserstein,
)

__version__ = "0.1.0"
