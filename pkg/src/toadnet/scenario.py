"""JSON scenario documents for the ``run`` command."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

from .cils import default_threshold
from .crosstalk import DEFAULT_TOL, AccumulationMode, CrosstalkParams
from .errors import ScenarioError, ToadnetError
from .simulator import FaultSpec, Packet
from .topology import MAX_STAGES, NodeCoord

REQUIRED = ("k", "x_inter", "x_intra", "n", "faults", "traffic")


@dataclass
class ScenarioConfig:
    k: int
    params: CrosstalkParams
    threshold: float
    tol: float = DEFAULT_TOL
    faults: List[FaultSpec] = field(default_factory=list)
    traffic: List[Packet] = field(default_factory=list)
    noise_r: float = 0.0
    seed: int = 0
    name: Optional[str] = None


def db_to_linear(db: float) -> float:
    return 10 ** (db / 10)


def _number(doc, key, where=None, integer=False):
    label = f"{where}.{key}" if where else key
    value = doc[key]
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok:
        kind = "an integer" if integer else "a number"
        raise ScenarioError(f"{label} must be {kind}, got {value!r}")
    return value


def _require(doc, key, where=None):
    if key not in doc:
        label = f"{where}.{key}" if where else key
        raise ScenarioError(f"missing required key {label!r}")


def parse_scenario(text: str, db: bool = False) -> ScenarioConfig:
    """Parse and validate a scenario document.

    With ``db=True`` the ``x_inter``/``x_intra`` values are read as dB and
    converted to linear power ratios.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in REQUIRED:
        _require(doc, key)

    k = _number(doc, "k", integer=True)
    if not 1 <= k <= MAX_STAGES:
        raise ScenarioError(f"k out of range: {k} not in [1, {MAX_STAGES}]")
    x_inter = _number(doc, "x_inter")
    x_intra = _number(doc, "x_intra")
    if db:
        x_inter, x_intra = db_to_linear(x_inter), db_to_linear(x_intra)
    n = _number(doc, "n", integer=True)
    try:
        params = CrosstalkParams(float(x_inter), float(x_intra), n, doc.get("mode", "multiplicative"))
    except ToadnetError as exc:
        raise ScenarioError(f"params: {exc}") from None

    tol = _number(doc, "tol") if "tol" in doc else DEFAULT_TOL
    if not tol > 0:
        raise ScenarioError(f"tol out of range: {tol} must be > 0")
    threshold = _number(doc, "threshold") if "threshold" in doc else default_threshold(params)
    if threshold < 0:
        raise ScenarioError(f"threshold out of range: {threshold} must be >= 0")
    noise_r = _number(doc, "noise_r") if "noise_r" in doc else 0.0
    if not 0 <= noise_r < 1:
        raise ScenarioError(f"noise_r out of range: {noise_r} not in [0, 1)")
    seed = _number(doc, "seed", integer=True) if "seed" in doc else 0

    if not isinstance(doc["faults"], list):
        raise ScenarioError("faults must be a list")
    faults = []
    routers = 1 << (k - 1)
    for i, item in enumerate(doc["faults"]):
        where = f"faults[{i}]"
        if not isinstance(item, dict):
            raise ScenarioError(f"{where} must be an object with stage and index")
        for key in ("stage", "index"):
            _require(item, key, where)
        stage = _number(item, "stage", where, integer=True)
        index = _number(item, "index", where, integer=True)
        if not 1 <= stage <= k:
            raise ScenarioError(f"{where}.stage out of range: {stage} not in [1, {k}]")
        if not 0 <= index < routers:
            raise ScenarioError(f"{where}.index out of range: {index} not in [0, {routers - 1}]")
        faults.append(FaultSpec(NodeCoord(stage, index)))

    if not isinstance(doc["traffic"], list) or not doc["traffic"]:
        raise ScenarioError("traffic must be a non-empty list")
    traffic = []
    ports = 1 << k
    used = set()
    for i, item in enumerate(doc["traffic"]):
        where = f"traffic[{i}]"
        if not isinstance(item, dict):
            raise ScenarioError(f"{where} must be an object")
        for key in ("src", "dst"):
            _require(item, key, where)
            port = _number(item, key, where, integer=True)
            if not 0 <= port < ports:
                raise ScenarioError(f"{where}.{key} out of range: {port} not in [0, {ports - 1}]")
        p0 = _number(item, "p0_mw", where) if "p0_mw" in item else 1.0
        if not p0 > 0:
            raise ScenarioError(f"{where}.p0_mw out of range: {p0} must be > 0")
        slot = _number(item, "slot", where, integer=True) if "slot" in item else 0
        if slot < 0:
            raise ScenarioError(f"{where}.slot out of range: {slot} must be >= 0")
        pid = _number(item, "id", where, integer=True) if "id" in item else i
        if (item["src"], slot) in used:
            raise ScenarioError(f"{where}: input {item['src']} already injects in slot {slot}")
        used.add((item["src"], slot))
        traffic.append(Packet(pid, item["src"], item["dst"], float(p0), slot))
    if len({p.id for p in traffic}) != len(traffic):
        raise ScenarioError("traffic ids must be unique")

    return ScenarioConfig(k, params, float(threshold), float(tol), faults, traffic,
                          float(noise_r), seed, doc.get("name"))
