"""mu3: triple linking invariants of 3-component links and third-order
helicity of divergence-free tube fields.

The library computes the Milnor-type triple linking number of a link as a
degree-style invariant of a torus-to-sphere map, and estimates the matching
third-order helicity of circulation fields supported on disjoint solid tubes
by averaging the invariant over closed-up orbit triples.
"""

from .errors import (
    Mu3Error,
    GeometryError,
    NumericsError,
    InputOutputError,
    PoleSingularity,
    ComponentsIntersect,
    UnresolvablePole,
    UnknownLink,
    UndersampledField,
    NotExact,
    GridMismatch,
    NotRegularValue,
    BrokenChain,
    TubesOverlap,
    EmbeddingFailed,
    LeftTube,
    ClosureFailed,
    EstimatorUnreliable,
    IncompleteTable,
    ConfigError,
)
from .catalog import catalog, LinkCatalogEntry
from .maps import gauss_map, conf_map3, sample_on_grid, GaussMap, ConfMap3
from .forms import (
    pullback_area_form,
    pullback_area_form_t2,
    harmonic_part,
    solve_potential,
    integrate_alpha_wedge_omega,
    integrate_form2_on_t2,
)
from .invariants import (
    InvariantResult,
    linking_number,
    hopf_degree,
    mu123,
    subtorus_degrees,
)
from .preimage import extract_preimage, PreimageLink
from .tubes import (
    EllipseCore,
    PlateauBump,
    TubeField,
    TubeSystem,
    VectorFieldSpec,
    build_borromean_tubes,
    build_hopf_tubes,
)
from .orbits import (
    integrate_orbit,
    close_orbit,
    orbit_triple,
    OpenOrbit,
    ClosedOrbit,
    OrbitTriple,
    VortexFlow,
)
from .estimator import (
    asymptotic_mu123,
    pairwise_helicity_check,
    h123_flux_formula,
    energy_l2,
    ErgodicEstimate,
    EnergyResult,
)

__version__ = "0.1.0"
