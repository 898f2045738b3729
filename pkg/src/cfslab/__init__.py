"""cfslab: finite causal fermion systems and their inherent structures.

Build regularized Dirac-sea systems on a flat torus or assemble abstract
systems from operator lists; classify pairs causally, orient them in time,
compute spin connections, splice maps, holonomy, Lorentzian distances,
causal-set orders, orthogonality lattices, tangent-cone histograms, and the
canonical Hilbert-Schmidt geometry of the operator manifold.
"""

from .core import (
    CausalClass,
    CausalFermionSystem,
    OperatorPoint,
    SpinSpace,
    Tolerances,
    classify,
    classify_spectrum,
    is_regular,
    product_spectrum,
    restrict_to_regular,
    spin_space,
    time_direction,
    time_orientation,
)
from .ambient import TangentVector, hs_distance, metric_h, project_tangent, retract
from .causal import (
    CausalGraph,
    LengthScales,
    build_causal_graph,
    distance_matrix,
    ell,
    enumerate_lattice,
    lorentzian_distance,
    ortho_complement,
    partial_order,
    tangent_cone_histogram,
)
from .errors import (
    CfsError,
    DimensionMismatchError,
    EmptySystemError,
    LeftManifoldError,
    NotSpinConnectableError,
    SpliceError,
    ValidationError,
)
from .io import read_system, system_to_json, write_system
from .minkowski import (
    MinkowskiConfig,
    MixtureSpec,
    ModeSet,
    build_modes,
    build_system,
    dirac_frame,
    local_correlation,
    mix_systems,
)
from .pairs import PairAnalysis, PairEngine
from .spin import (
    CliffordSubspace,
    ClosedChain,
    KernelMap,
    SignOperator,
    SpinConnection,
    closed_chain,
    compose_transport,
    directional_sign,
    euclidean_sign,
    holonomy,
    kernel,
    metric_connection,
    physical_wave_function,
    properly_timelike,
    spin_connectable,
    spin_connection,
    splice_map,
    verify_clifford,
)

__version__ = "0.1.0"
