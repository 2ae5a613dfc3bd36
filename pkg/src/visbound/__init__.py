"""Lower bounds for the visibility index of bodies of given volume in the unit ball."""

__version__ = "0.1.0"

from .constants import DimensionContext, lambda_to_Lambda, make_dimension_context
from .kernel import K_reduced, eta_of_theta, kappa_dtheta, kappa_of_theta
from .discretize import cost_matrix, marginal_weights
from .transport import TransportInstance, TransportPlan, solve_transport
