"""Finite T0 inverse-limit reconstruction of finite metric samples.

Builds adjusted finite approximative sequences (FAS) over a metric sample,
the poset levels of nonempty small-diameter subsets, the nearest-point
bonding maps between them, and truncated inverse-limit threads, together
with certificates for the countable and ultrametric reconstruction results.
"""

from fasrecon.errors import (
    CapExceeded,
    ElementError,
    FasError,
    FasreconError,
    IncoherentThread,
    InsufficientDepth,
    MetricError,
    NotUltrametric,
    ParseError,
)
from fasrecon.metric import (
    MetricSample,
    dist_to_set,
    gen_cantor,
    gen_circle,
    gen_convergent,
    gen_interval_grid,
    gen_padic,
    hausdorff_distance,
    ingest,
    is_ultrametric,
    validate_metric,
)
from fasrecon.construction import (
    DenseEnumeration,
    Fas,
    FasLevel,
    build_countable_fas,
    build_eps_approx,
    build_fas,
    build_ultra_fas,
    gamma,
    nestify,
    paper_interval_fas,
    paper_unnested_fas,
    verify_adjusted,
)
from fasrecon.finspace import (
    SpaceElement,
    enumerate_level,
    leq,
    make_element,
    min_nbhd,
)
from fasrecon.bonding import bond, bond_chain, bond_via_nearby, check_ultra_commute, nearby
from fasrecon.limit import (
    Thread,
    enumerate_threads,
    fiber,
    injectivity_certificate,
    phi_estimate,
    xn_candidates,
    xn_star,
    xstar_thread,
)
from fasrecon.homology import betti, build_complex

__version__ = "0.1.0"
