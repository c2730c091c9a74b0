"""Exact truncated Kähler potentials: Calabi's criterion, cone lifts and curvature."""

__version__ = "0.1.0"

from .series import (  # noqa: E402
    GaussianRational,
    GradedOrder,
    HermitianSeries,
    HoloSeries,
    InvariantError,
    Series,
    exp,
    gram_from_factors,
    index_position,
    laurent_substitute,
    log,
    monomial_at,
    mul,
    power,
    wirtinger,
)
from .calabi import (  # noqa: E402
    CalabiMatrix,
    ConsistentUpTo,
    DegenerateMetricError,
    NotInduced,
    NotPsd,
    Psd,
    calabi_matrix,
    diastasis_normalize,
    find_inducing_multiple,
    inducibility,
    psd_check_exact,
)
from .cone import (  # noqa: E402
    ConePotential,
    cone_inducibility,
    epsilon_submatrix,
    flatness_witness,
    homothety,
    lift,
    radial_blocks,
    verify_radial_derivative_identity,
)
from .curvature import (  # noqa: E402
    metric_from_potential,
    ricci_flat_check,
    ricci_report,
    sasaki_einstein_bridge,
)
from .corpus import builtin, parse_potential, serialize  # noqa: E402
