"""Crosstalk identification and localization from destination taps.

Identification turns a (launch, received) power pair into a normalized
crosstalk reading and a clean/fault verdict. Localization counts how many
stage units the reading contains and walks the lightpath back from the
destination by that many hops to name the router where contamination began.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

from .crosstalk import (
    DEFAULT_TOL,
    AccumulationMode,
    CrosstalkParams,
    invert_stage_count,
    normalized_crosstalk,
)
from .errors import (
    InfeasibleCountError,
    InvalidParameterError,
    NothingToLocalizeError,
    ToadnetError,
)
from .simulator import SimulationResult, TapMeasurement
from .topology import Lightpath, NetworkTopology, NodeCoord


@dataclass(frozen=True)
class Clean:
    x_meas: float

    is_fault = False


@dataclass(frozen=True)
class Fault:
    x_meas: float

    is_fault = True


DetectionVerdict = Union[Clean, Fault]


@dataclass(frozen=True)
class LocalizationReport:
    packet_id: Optional[int]
    x_meas: float
    n_count: int
    fault_node: NodeCoord
    residual: float
    mode: AccumulationMode
    iterations: int = 0


@dataclass(frozen=True)
class Diagnostic:
    """A tap that was flagged but could not be localized."""

    packet_id: Optional[int]
    x_meas: Optional[float]
    kind: str
    message: str


def default_threshold(params: CrosstalkParams) -> float:
    """Halfway between a clean reading and one contaminated stage."""
    return params.unit / 2


def identify(p_in: float, s_out: float, threshold: float, slack: float = 0.0) -> DetectionVerdict:
    if threshold < 0:
        raise InvalidParameterError(f"threshold={threshold} must be >= 0")
    x_meas = normalized_crosstalk(s_out, p_in, slack)
    return Fault(x_meas) if x_meas > threshold else Clean(x_meas)


def localize(
    x_meas: float,
    path: Lightpath,
    params: CrosstalkParams,
    tol: float = DEFAULT_TOL,
    packet_id: Optional[int] = None,
) -> LocalizationReport:
    if path.k < 1:
        raise InvalidParameterError("lightpath has no hops")
    counted = invert_stage_count(x_meas, params, tol)
    n = counted.count
    if n == 0:
        raise NothingToLocalizeError(f"x_meas={x_meas} holds no whole stage unit")
    if n > path.k:
        raise InfeasibleCountError(
            f"counted {n} contaminated stages on a {path.k}-stage lightpath"
        )
    stage = path.k - n + 1
    return LocalizationReport(
        packet_id, x_meas, n, path.node_at(stage), counted.residual, params.mode, counted.iterations
    )


_KINDS = {
    "MeasurementInconsistentError": "measurement-inconsistent",
    "NonIdentifiableUnitError": "non-identifiable-unit",
    "AmbiguousMeasurementError": "ambiguous-measurement",
    "NothingToLocalizeError": "nothing-to-localize",
    "InfeasibleCountError": "infeasible-count",
    "InvalidParameterError": "invalid-parameter",
}


def error_kind(exc: Exception) -> str:
    return _KINDS.get(type(exc).__name__, type(exc).__name__)


def examine_tap(tap: TapMeasurement, params, threshold, tol, slack=0.0):
    """Run one tap through both blocks.

    Returns ``(verdict, outcome)`` where outcome is a report, a diagnostic,
    or None for a clean tap. ``verdict`` is None when identification failed.
    """
    try:
        verdict = identify(tap.p_in, tap.s_out, threshold, slack)
    except ToadnetError as exc:
        return None, Diagnostic(tap.packet_id, None, error_kind(exc), str(exc))
    if not verdict.is_fault:
        return verdict, None
    try:
        return verdict, localize(verdict.x_meas, tap.lightpath, params, tol, tap.packet_id)
    except ToadnetError as exc:
        return verdict, Diagnostic(tap.packet_id, verdict.x_meas, error_kind(exc), str(exc))


def run_cils(
    topo: NetworkTopology,
    result: SimulationResult,
    params: CrosstalkParams,
    threshold: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> List[Union[LocalizationReport, Diagnostic]]:
    """Identify and localize every tap; clean taps produce no entry."""
    if threshold is None:
        threshold = default_threshold(params)
    out = []
    for tap in result.taps:
        if tap.lightpath.k != topo.k:
            out.append(Diagnostic(tap.packet_id, None, "invalid-parameter",
                                  f"tap path has {tap.lightpath.k} hops, fabric has {topo.k} stages"))
            continue
        _, outcome = examine_tap(tap, params, threshold, tol)
        if outcome is not None:
            out.append(outcome)
    return out
