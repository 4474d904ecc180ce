"""Controller placement and WDM wavelength allocation for coordinated BS sets."""

__version__ = "0.1.0"

from .placement import CostWeights, Placement, place_cbs, run_heuristic  # noqa: E402
from .prioritization import PrioritizationThresholds  # noqa: E402
from .scenario import CBSSpec, ScenarioParams, generate_scenario  # noqa: E402
from .topology import BackhaulGraph, CapacityError, Vertex, link_latency  # noqa: E402

__all__ = [
    "BackhaulGraph", "CapacityError", "CBSSpec", "CostWeights", "Placement",
    "PrioritizationThresholds", "ScenarioParams", "Vertex", "generate_scenario",
    "link_latency", "place_cbs", "run_heuristic",
]
