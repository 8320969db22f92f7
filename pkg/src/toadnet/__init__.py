"""Banyan OTDM fabric simulator with crosstalk identification and localization."""
from .cils import (
    Clean,
    Diagnostic,
    Fault,
    LocalizationReport,
    default_threshold,
    identify,
    localize,
    run_cils,
)
from .crosstalk import (
    AccumulationMode,
    CrosstalkParams,
    StageCount,
    invert_stage_count,
    normalized_crosstalk,
    parallel_router_output,
    series_crosstalk,
)
from .errors import *  # noqa: F401,F403
from .simulator import (
    FaultSpec,
    Packet,
    SimulationResult,
    TapMeasurement,
    propagate,
    simulate_slots,
)
from .topology import Hop, Lightpath, NetworkTopology, NodeCoord, build_banyan, route

__version__ = "0.1.0"
