"""Desk-scale audits of boundary actions of hyperbolic groups.

The package builds exact finite balls of Cayley graphs for three
hyperbolic families (free groups, free products of cyclic groups,
metric small-cancellation presentations), realizes lexicographically
minimal geodesic rays and their sequence types at finite depth, models
the shift space those sequences live in, and runs quantitative audits
of the fellow-traveling, class-count and cover bounds that connect the
two sides.
"""

from .cayley import (
    CayleyBall,
    HyperbolicityEstimate,
    build_ball,
    estimate_delta,
    load_ball,
    save_ball,
)
from .errors import BoundarylexError
from .group_oracle import (
    Alphabet,
    FreeGroupOracle,
    FreeProductOfCyclicsOracle,
    GroupOracle,
    SmallCancellationOracle,
    dehn_reduce,
    free_reduce,
    is_trivial,
    parse_presentation,
    symmetric_alphabet,
)
from .presets import PRESETS, get_preset
from .rays import (
    BoundaryPoint,
    RaySurrogate,
    SigmaSequence,
    boundary_ball,
    check_tubular_general,
    check_tubular_same_base,
    make_periodic_ray,
    phi_hat,
    stabilization_probe,
    substitute_geodesic,
    translate_ray,
    typ_of,
)
from .shift_space import (
    FinitePartition,
    PeriodicSeq,
    TruncatedSeq,
    asdim_cover,
    audit_cover,
    filtration_Rn,
    rho_graph,
    rho_s,
    shift_closure,
    tail_partition,
)

__version__ = "0.1.0"
