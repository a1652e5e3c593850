from .fibers import FiberGeometry, FiberKind, fiber_from_name
from .geometry import (
    WarpingSample,
    einstein_ode_residual,
    ricci_closed_form,
    riemann_closed_form,
    scalar_closed_form,
    second_fundamental_form,
    weyl_closed_form,
)
from .chart import WarpingFunction, build_chart
