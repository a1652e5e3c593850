from .profile import (
    Classification,
    EndpointKind,
    ProfileDomain,
    ProfileState,
    SolitonParams,
    SolitonProfile,
)
from .ode import (
    Direction,
    IntegrationLimits,
    OriginStart,
    concavity_certificate,
    equilibrium_linearization,
    fixed_step_oracle,
    integrate,
    ode_rhs,
    perturb_equilibrium,
    series_origin,
)
from .classify import classify, rigidity_report
