"""Interference and link-outage correlation in slotted-ALOHA Poisson networks."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    FadingModel,
    LinkConfig,
    NetworkConfig,
    conditional_ratio,
    joint_success_probability,
    mean_interference,
    interference_variance,
    spatial_temporal_correlation,
    success_probability,
    temporal_correlation,
)
from .montecarlo import EstimateWithError, SimulationPlan, simulate  # noqa: E402
from .pathloss import PathLossModel  # noqa: E402
