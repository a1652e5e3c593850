from .core import (
    MetricChart,
    ScalarFieldOnChart,
    christoffel,
    gradient_and_hessian,
    riemann_ricci_scalar,
    weyl,
)
