"""Crosstalk power arithmetic for parallel TOAD routers.

All coefficients are linear power ratios. The per-stage unit is
``u = n * x_tot``: the normalized crosstalk one n-way parallel router adds.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    AmbiguousMeasurementError,
    InvalidParameterError,
    MeasurementInconsistentError,
    NonIdentifiableUnitError,
)

DEFAULT_TOL = 1e-9
DEFAULT_SLACK = 0.0


class AccumulationMode(enum.Enum):
    LINEAR = "linear"
    MULTIPLICATIVE = "multiplicative"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParameterError(
                f"mode={value!r} must be one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class CrosstalkParams:
    x_inter: float
    x_intra: float
    n: int = 2
    mode: AccumulationMode = AccumulationMode.MULTIPLICATIVE

    def __post_init__(self):
        object.__setattr__(self, "mode", AccumulationMode.parse(self.mode))
        if not (self.x_inter >= 0 and self.x_intra >= 0):
            raise InvalidParameterError("x_inter and x_intra must be >= 0")
        if not self.x_tot < 1:
            raise InvalidParameterError(f"x_tot={self.x_tot} must be < 1")
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise InvalidParameterError(f"parallel degree n={self.n!r} must be an integer >= 1")

    @classmethod
    def from_total(cls, x_tot, n=2, mode=AccumulationMode.MULTIPLICATIVE):
        """Put the whole per-router total on the interchannel term."""
        return cls(x_tot, 0.0, n, mode)

    @property
    def x_tot(self) -> float:
        return self.x_inter + self.x_intra

    @property
    def unit(self) -> float:
        return self.n * self.x_tot


class StageCount(NamedTuple):
    count: int
    residual: float
    iterations: int


def parallel_router_output(p_in: float, params: CrosstalkParams) -> float:
    """Output power of ``n`` parallel routers fed with ``p_in`` mW."""
    if not p_in > 0:
        raise InvalidParameterError(f"p_in={p_in!r} mW must be > 0")
    return p_in * (1 + params.n * params.x_tot)


def normalized_crosstalk(s: float, p0: float, slack: float = DEFAULT_SLACK) -> float:
    """Fractional excess power ``(s - p0) / p0`` at a tap.

    ``slack`` (mW) is how far below ``p0`` a reading may fall before it is
    treated as signal loss rather than crosstalk.
    """
    if not p0 > 0:
        raise InvalidParameterError(f"p0={p0!r} mW must be > 0")
    if s < p0 - slack:
        raise MeasurementInconsistentError(
            f"measured {s} mW below launch power {p0} mW (slack {slack}): signal loss, not crosstalk"
        )
    return (s - p0) / p0


def series_crosstalk(params: CrosstalkParams, stages: int) -> float:
    """Normalized crosstalk after ``stages`` contaminated routers in series."""
    if stages < 0:
        raise InvalidParameterError(f"stages={stages} must be >= 0")
    if params.mode is AccumulationMode.LINEAR:
        return stages * params.unit
    return (1 + params.unit) ** stages - 1


def invert_stage_count(x_meas: float, params: CrosstalkParams, tol: float = DEFAULT_TOL) -> StageCount:
    """Count how many stage units make up ``x_meas`` by successive removal.

    Linear mode subtracts the unit; multiplicative mode divides ``1 + x`` by
    ``1 + unit``. The loop keeps going while the remainder is at least
    ``unit - tol`` so exact multiples are counted in full.
    """
    if not x_meas >= 0:
        raise InvalidParameterError(f"x_meas={x_meas!r} must be >= 0")
    if not tol > 0:
        raise InvalidParameterError(f"tol={tol!r} must be > 0")
    u = params.unit
    if u <= tol:
        raise NonIdentifiableUnitError(f"stage unit n*x_tot={u} does not exceed tol={tol}")

    remainder = x_meas
    count = 0
    if params.mode is AccumulationMode.LINEAR:
        while remainder >= u - tol:
            remainder -= u
            count += 1
    else:
        growth = 1 + u
        while remainder >= u - tol:
            remainder = (1 + remainder) / growth - 1
            count += 1
    if abs(remainder) > tol:
        raise AmbiguousMeasurementError(
            f"x_meas={x_meas} leaves residual {remainder:.3g} after {count} units of {u}",
            count,
            remainder,
        )
    return StageCount(count, remainder, count)
